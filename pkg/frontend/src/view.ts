/** What the user is currently looking at.
 *
 * The view never holds map data of its own; combined with a snapshot
 * it fully determines the screen, so reloading with the same view
 * reproduces the same picture.
 */

export type Mode = "live" | "history";
export type Overlay = "ist" | "soll" | "diff";

export interface HistoryWindow {
  start: string;
  end: string;
}

export interface ViewState {
  readonly mode: Mode;
  readonly window: HistoryWindow | null;
  readonly selected: string | null;
  readonly overlay: Overlay;
}

export function liveView(overlay: Overlay = "ist"): ViewState {
  return { mode: "live", window: null, selected: null, overlay };
}

export function historyView(
  window: HistoryWindow,
  overlay: Overlay = "ist",
): ViewState {
  return checkView({ mode: "history", window, selected: null, overlay });
}

export function checkView(view: ViewState): ViewState {
  if (view.mode === "history") {
    if (view.window === null) {
      throw new Error("history mode needs a window");
    }
    if (view.window.start >= view.window.end) {
      throw new Error("history window must start before it ends");
    }
  }
  return view;
}

export function withSelection(view: ViewState, id: string | null): ViewState {
  return { ...view, selected: id };
}

export function withOverlay(view: ViewState, overlay: Overlay): ViewState {
  return { ...view, overlay };
}
