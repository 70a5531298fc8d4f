/** Wires client, poller, view state and rendering into one screen. */

import { MapClient } from "./api";
import { initiateContact } from "./contact";
import type { Poller, PollStatus } from "./poll";
import { createPoller } from "./poll";
import { renderView } from "./render";
import type { Overlay, ViewState } from "./view";
import { checkView, liveView, withOverlay, withSelection } from "./view";

export interface AppConfig {
  server: string;
  viewer: string;
  token?: string;
  intervalMs?: number;
}

export interface App {
  poller: Poller;
  getView(): ViewState;
  setView(view: ViewState): void;
  stop(): void;
}

export function startApp(root: HTMLElement, config: AppConfig): App {
  const doc = root.ownerDocument;
  const client = new MapClient(config.server, { token: config.token });
  let view: ViewState = liveView();

  const content = doc.createElement("div");
  content.className = "content";
  const controls = buildControls(doc, {
    onOverlay(overlay) {
      view = withOverlay(view, overlay);
      render(poller.status);
    },
    onLive() {
      view = { ...liveView(view.overlay), selected: view.selected };
      void poller.tick();
    },
    onHistory(start, end) {
      view = checkView({
        mode: "history",
        window: { start, end },
        selected: view.selected,
        overlay: view.overlay,
      });
      void poller.tick();
    },
  });
  root.replaceChildren(controls, content);

  function render(status: PollStatus): void {
    if (status.snapshot === null) {
      const note = doc.createElement("p");
      note.className = status.stale ? "stale-banner" : "loading";
      note.textContent = status.stale
        ? `Server nicht erreichbar: ${status.error ?? ""}`
        : "Lade Karte ...";
      content.replaceChildren(note);
      return;
    }
    renderView(content, {
      snapshot: status.snapshot,
      view,
      status: { stale: status.stale, lastRefresh: status.lastRefresh },
      handlers: {
        onSelect(id) {
          view = withSelection(view, id);
          render(poller.status);
        },
        onContact(profileId, scheme) {
          void contact(profileId, scheme);
        },
      },
    });
  }

  async function contact(profileId: string, scheme: string): Promise<void> {
    const profile = poller.status.snapshot?.profiles.find(
      (p) => p.id === profileId,
    );
    if (profile === undefined) {
      return;
    }
    await initiateContact(profile, scheme, {
      client,
      viewer: config.viewer,
      opener(uri) {
        doc.defaultView?.open(uri, "_self");
      },
    });
    await poller.tick();
  }

  const poller = createPoller(client, () => view, render, {
    intervalMs: config.intervalMs,
  });
  poller.start();

  return {
    poller,
    getView: () => view,
    setView(next) {
      view = checkView(next);
      void poller.tick();
    },
    stop: () => poller.stop(),
  };
}

interface ControlCallbacks {
  onOverlay(overlay: Overlay): void;
  onLive(): void;
  onHistory(start: string, end: string): void;
}

function buildControls(doc: Document, on: ControlCallbacks): HTMLElement {
  const bar = doc.createElement("nav");
  bar.className = "controls";

  const liveButton = doc.createElement("button");
  liveButton.className = "mode-live";
  liveButton.textContent = "Live";
  liveButton.addEventListener("click", () => on.onLive());

  const start = doc.createElement("input");
  start.type = "datetime-local";
  start.className = "window-start";
  const end = doc.createElement("input");
  end.type = "datetime-local";
  end.className = "window-end";
  const historyButton = doc.createElement("button");
  historyButton.className = "mode-history";
  historyButton.textContent = "Verlauf";
  historyButton.addEventListener("click", () => {
    if (start.value !== "" && end.value !== "") {
      on.onHistory(toIso(start.value), toIso(end.value));
    }
  });

  const overlay = doc.createElement("select");
  overlay.className = "overlay-select";
  for (const [value, label] of [
    ["ist", "Ist"],
    ["soll", "Soll"],
    ["diff", "Abgleich"],
  ] as const) {
    const option = doc.createElement("option");
    option.value = value;
    option.textContent = label;
    overlay.append(option);
  }
  overlay.addEventListener("change", () =>
    on.onOverlay(overlay.value as Overlay),
  );

  bar.append(liveButton, historyButton, start, end, overlay);
  return bar;
}

function toIso(localValue: string): string {
  // datetime-local values carry no zone; read them as browser-local time
  return new Date(localValue).toISOString();
}
