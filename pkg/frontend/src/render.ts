/** DOM and SVG output.
 *
 * Every function builds fresh elements from data it is given; nothing
 * reads back from the document, so a rerender with the same inputs
 * yields the same tree.
 */

import type { Layout } from "./layout";
import { layoutScene } from "./layout";
import type { ConferenceEntry, Scene, SceneEdge, Thickness } from "./scene";
import { buildScene } from "./scene";
import type { DeviationData, ProfileData, Snapshot } from "./types";
import type { ViewState } from "./view";

const SVG_NS = "http://www.w3.org/2000/svg";

const STROKE_WIDTH: Record<Thickness, number> = {
  thin: 1.5,
  medium: 3,
  thick: 5.5,
};

export interface RenderHandlers {
  onSelect?: (id: string | null) => void;
  onContact?: (profileId: string, scheme: string) => void;
}

export interface RefreshStatus {
  stale: boolean;
  lastRefresh: Date | null;
}

export interface ViewModel {
  snapshot: Snapshot;
  view: ViewState;
  status: RefreshStatus;
  handlers?: RenderHandlers;
  now?: () => Date;
}

/** Build the whole screen for one snapshot into `container`. */
export function renderView(container: HTMLElement, model: ViewModel): void {
  const doc = container.ownerDocument;
  const scene = buildScene(model.snapshot, model.view);
  const layout = layoutScene(scene);
  const handlers = model.handlers ?? {};

  const mapArea = doc.createElement("div");
  mapArea.className = "map-area";
  mapArea.append(
    renderScene(doc, scene, layout, model.view.selected, handlers),
    renderConferencePanel(doc, scene.conferences),
    renderDeviationList(doc, scene.deviations),
  );

  const main = doc.createElement("main");
  main.className = "layout";
  main.append(
    renderYellowPages(doc, model.view.selected, model.snapshot.profiles, {
      handlers,
      now: model.now,
    }),
    mapArea,
  );

  container.replaceChildren(renderStaleBanner(doc, model.status), main);
}

export function renderScene(
  doc: Document,
  scene: Scene,
  layout: Layout,
  selected: string | null,
  handlers: RenderHandlers = {},
): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("class", "flow-map");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute("width", String(layout.width));
  svg.setAttribute("height", String(layout.height));
  svg.append(arrowDefs(doc));
  svg.addEventListener("click", (event) => {
    if (event.target === svg) {
      handlers.onSelect?.(null);
    }
  });

  for (const box of layout.regions) {
    const group = doc.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "region");
    group.setAttribute("data-site", box.site);
    const rect = doc.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(box.x));
    rect.setAttribute("y", String(box.y));
    rect.setAttribute("width", String(box.width));
    rect.setAttribute("height", String(box.height));
    rect.setAttribute("rx", "10");
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("class", "region-label");
    label.setAttribute("x", String(box.x + 12));
    label.setAttribute("y", String(box.y + 22));
    label.textContent = box.label;
    group.append(rect, label);
    svg.append(group);
  }

  for (const edge of scene.edges) {
    const element = edgeElement(doc, edge, layout);
    if (element !== null) {
      svg.append(element);
    }
  }

  for (const region of scene.regions) {
    for (const node of region.nodes) {
      const point = layout.positions.get(node.id);
      if (point === undefined) {
        continue;
      }
      const group = doc.createElementNS(SVG_NS, "g");
      const classes = ["node", node.kind];
      if (node.id === selected) {
        classes.push("selected");
      }
      group.setAttribute("class", classes.join(" "));
      group.setAttribute("data-id", node.id);
      group.setAttribute("transform", `translate(${point.x} ${point.y})`);
      if (node.kind === "artifact") {
        const shape = doc.createElementNS(SVG_NS, "rect");
        shape.setAttribute("x", "-13");
        shape.setAttribute("y", "-16");
        shape.setAttribute("width", "26");
        shape.setAttribute("height", "32");
        group.append(shape);
      } else {
        const shape = doc.createElementNS(SVG_NS, "circle");
        shape.setAttribute("r", "16");
        group.append(shape);
      }
      const text = doc.createElementNS(SVG_NS, "text");
      text.setAttribute("class", "node-label");
      text.setAttribute("y", "30");
      text.setAttribute("text-anchor", "middle");
      text.textContent = node.label;
      group.append(text);
      group.addEventListener("click", () => handlers.onSelect?.(node.id));
      svg.append(group);
    }
  }
  return svg;
}

function edgeElement(
  doc: Document,
  edge: SceneEdge,
  layout: Layout,
): SVGLineElement | null {
  const a = layout.positions.get(edge.source);
  const b = layout.positions.get(edge.target);
  if (a === undefined || b === undefined) {
    return null;
  }
  const line = doc.createElementNS(SVG_NS, "line") as SVGLineElement;
  const classes = ["edge", edge.thickness];
  if (edge.dashed) {
    classes.push("dashed");
  }
  if (edge.ghost) {
    classes.push("ghost");
  }
  if (edge.diff !== null) {
    classes.push(edge.diff);
  }
  line.setAttribute("class", classes.join(" "));
  line.setAttribute("data-key", edge.key);
  line.setAttribute("x1", String(a.x));
  line.setAttribute("y1", String(a.y));
  line.setAttribute("x2", String(b.x));
  line.setAttribute("y2", String(b.y));
  line.setAttribute("stroke-width", String(STROKE_WIDTH[edge.thickness]));
  if (edge.dashed) {
    line.setAttribute("stroke-dasharray", edge.ghost ? "2 6" : "7 4");
  }
  if (edge.directed) {
    line.setAttribute("marker-end", "url(#arrow)");
  }
  const title = doc.createElementNS(SVG_NS, "title");
  const parts = [];
  if (edge.content !== null) {
    parts.push(edge.content);
  }
  if (edge.intensity !== null) {
    parts.push(`${edge.intensity} min/Woche`);
  }
  if (edge.ghost) {
    parts.push("geplant, nicht beobachtet");
  }
  title.textContent = parts.join(", ") || edge.key;
  line.append(title);
  return line;
}

function arrowDefs(doc: Document): SVGElement {
  const defs = doc.createElementNS(SVG_NS, "defs");
  const marker = doc.createElementNS(SVG_NS, "marker");
  marker.setAttribute("id", "arrow");
  marker.setAttribute("viewBox", "0 0 10 10");
  marker.setAttribute("refX", "22");
  marker.setAttribute("refY", "5");
  marker.setAttribute("markerWidth", "7");
  marker.setAttribute("markerHeight", "7");
  marker.setAttribute("orient", "auto-start-reverse");
  const tip = doc.createElementNS(SVG_NS, "path");
  tip.setAttribute("d", "M 0 0 L 10 5 L 0 10 z");
  marker.append(tip);
  defs.append(marker);
  return defs;
}

/** The group communications listed under the map, never drawn as edges. */
export function renderConferencePanel(
  doc: Document,
  conferences: ConferenceEntry[],
): HTMLElement {
  const panel = doc.createElement("section");
  panel.className = "conference-panel";
  const heading = doc.createElement("h2");
  heading.textContent = "Gruppenkommunikation";
  const list = doc.createElement("ul");
  for (const entry of conferences) {
    const item = doc.createElement("li");
    item.className = entry.running ? "conference running" : "conference";
    item.dataset.id = entry.id;
    item.textContent = `${entry.label}: ${entry.participants.join(", ")}`;
    if (entry.running) {
      const badge = doc.createElement("span");
      badge.className = "badge";
      badge.textContent = " (laufend)";
      item.append(badge);
    }
    list.append(item);
  }
  panel.append(heading, list);
  if (conferences.length === 0) {
    panel.hidden = true;
  }
  return panel;
}

export function renderDeviationList(
  doc: Document,
  deviations: DeviationData[],
): HTMLElement {
  const section = doc.createElement("section");
  section.className = "deviation-list";
  const heading = doc.createElement("h2");
  heading.textContent = "Abweichungen vom Plan";
  const list = doc.createElement("ul");
  for (const deviation of deviations) {
    const item = doc.createElement("li");
    item.className = `deviation ${deviation.kind}`;
    let text = `${deviation.kind}: ${deviation.subject.join(" / ")}`;
    if (deviation.planned !== null || deviation.actual !== null) {
      text += ` (geplant ${deviation.planned ?? "?"}, beobachtet ${deviation.actual ?? "?"})`;
    }
    item.textContent = text;
    list.append(item);
  }
  section.append(heading, list);
  if (deviations.length === 0) {
    section.hidden = true;
  }
  return section;
}

const STANDARD_SCHEMES = ["mailto", "tel", "chat"] as const;

export interface YellowPagesOptions {
  handlers?: RenderHandlers;
  now?: () => Date;
}

/** Side panel for the selected participant; hidden without selection. */
export function renderYellowPages(
  doc: Document,
  selected: string | null,
  profiles: ProfileData[],
  options: YellowPagesOptions = {},
): HTMLElement {
  const aside = doc.createElement("aside");
  aside.className = "yellow-pages";
  if (selected === null) {
    aside.hidden = true;
    return aside;
  }
  const profile = profiles.find((p) => p.id === selected);
  if (profile === undefined) {
    const notice = doc.createElement("p");
    notice.className = "removal-notice";
    notice.textContent = `Teilnehmer '${selected}' ist nicht mehr verzeichnet.`;
    aside.append(notice);
    return aside;
  }

  if (profile.photo !== null && profile.photo !== "") {
    const photo = doc.createElement("img");
    photo.className = "photo";
    photo.src = profile.photo;
    photo.alt = profile.name;
    aside.append(photo);
  }
  const heading = doc.createElement("h2");
  heading.textContent = profile.name;
  aside.append(heading);

  const fields = doc.createElement("dl");
  addField(doc, fields, "Standort", profile.site, "site");
  addField(doc, fields, "Ortszeit", localTime(profile.timezone, options.now), "local-time");
  addField(doc, fields, "Status", profile.status, "status");
  addField(doc, fields, "Rolle", profile.role || "-", "role");
  addField(doc, fields, "Kenntnisse", profile.skills.join(", ") || "-", "skills");
  addField(doc, fields, "Aufgabe", profile.current_task || "-", "task");
  addField(doc, fields, "Artefakt", profile.current_artifact || "-", "artifact");
  addField(doc, fields, "Pairing", profile.pair_partner ?? "-", "pair-partner");
  aside.append(fields);

  const contacts = doc.createElement("div");
  contacts.className = "contacts";
  const known = new Map(profile.contacts.map((c) => [c.scheme, c.address]));
  const schemes = [
    ...STANDARD_SCHEMES,
    ...profile.contacts
      .map((c) => c.scheme)
      .filter((s) => !(STANDARD_SCHEMES as readonly string[]).includes(s)),
  ];
  for (const scheme of schemes) {
    const button = doc.createElement("button");
    button.className = `contact contact-${scheme}`;
    button.dataset.scheme = scheme;
    button.textContent = scheme;
    const address = known.get(scheme);
    if (address === undefined) {
      button.disabled = true;
      button.title = "kein Kontakteintrag";
    } else {
      button.dataset.address = address;
      button.addEventListener("click", () =>
        options.handlers?.onContact?.(profile.id, scheme),
      );
    }
    contacts.append(button);
  }
  aside.append(contacts);
  return aside;
}

function addField(
  doc: Document,
  into: HTMLElement,
  label: string,
  value: string,
  slug: string,
): void {
  const dt = doc.createElement("dt");
  dt.textContent = label;
  const dd = doc.createElement("dd");
  dd.className = `field-${slug}`;
  dd.textContent = value;
  into.append(dt, dd);
}

function localTime(timezone: string | null, now?: () => Date): string {
  if (timezone === null || timezone === "") {
    return "-";
  }
  try {
    return new Intl.DateTimeFormat("de-DE", {
      timeZone: timezone,
      hour: "2-digit",
      minute: "2-digit",
    }).format((now ?? (() => new Date()))());
  } catch {
    return "-";
  }
}

/** Shown whenever the last snapshot attempt failed. */
export function renderStaleBanner(
  doc: Document,
  status: RefreshStatus,
): HTMLElement {
  const banner = doc.createElement("div");
  banner.className = "stale-banner";
  if (!status.stale) {
    banner.hidden = true;
    return banner;
  }
  const last =
    status.lastRefresh === null
      ? "noch nie aktualisiert"
      : `zuletzt aktualisiert ${status.lastRefresh.toLocaleTimeString("de-DE")}`;
  banner.textContent = `Server nicht erreichbar, Ansicht veraltet (${last}).`;
  return banner;
}
