/** Deterministic geometry for a scene.
 *
 * Site regions sit in one fixed row; inside a region the nodes start
 * on a ring and relax apart for a fixed number of steps.  No random
 * numbers anywhere, so the same scene always lays out the same way.
 */

import type { Scene } from "./scene";

export interface Point {
  x: number;
  y: number;
}

export interface RegionBox {
  site: string;
  label: string;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface Layout {
  width: number;
  height: number;
  regions: RegionBox[];
  positions: Map<string, Point>;
}

const REGION_WIDTH = 240;
const REGION_HEIGHT = 260;
const REGION_GAP = 24;
const MARGIN = 16;
const NODE_CLEARANCE = 64;
const RELAX_STEPS = 40;

export function layoutScene(scene: Scene): Layout {
  const regions: RegionBox[] = [];
  const positions = new Map<string, Point>();
  let x = MARGIN;
  for (const region of scene.regions) {
    const box: RegionBox = {
      site: region.site,
      label: region.label,
      x,
      y: MARGIN,
      width: REGION_WIDTH,
      height: REGION_HEIGHT,
    };
    regions.push(box);
    placeWithin(box, region.nodes.map((n) => n.id), positions);
    x += REGION_WIDTH + REGION_GAP;
  }
  return {
    width: Math.max(x - REGION_GAP + MARGIN, 2 * MARGIN),
    height: REGION_HEIGHT + 2 * MARGIN,
    regions,
    positions,
  };
}

function placeWithin(
  box: RegionBox,
  ids: string[],
  positions: Map<string, Point>,
): void {
  const cx = box.x + box.width / 2;
  const cy = box.y + box.height / 2;
  if (ids.length === 1) {
    positions.set(ids[0]!, { x: cx, y: cy });
    return;
  }
  const ring = Math.min(box.width, box.height) / 2 - 48;
  const points: Point[] = ids.map((_, i) => {
    const angle = (2 * Math.PI * i) / ids.length - Math.PI / 2;
    return { x: cx + ring * Math.cos(angle), y: cy + ring * Math.sin(angle) };
  });
  for (let step = 0; step < RELAX_STEPS; step += 1) {
    for (let i = 0; i < points.length; i += 1) {
      for (let j = i + 1; j < points.length; j += 1) {
        repel(points[i]!, points[j]!);
      }
    }
    for (const p of points) {
      // gentle pull to the center keeps disconnected nodes inside
      p.x += (cx - p.x) * 0.02;
      p.y += (cy - p.y) * 0.02;
      p.x = clamp(p.x, box.x + 36, box.x + box.width - 36);
      p.y = clamp(p.y, box.y + 44, box.y + box.height - 28);
    }
  }
  ids.forEach((id, i) => positions.set(id, points[i]!));
}

function repel(a: Point, b: Point): void {
  let dx = b.x - a.x;
  let dy = b.y - a.y;
  let distance = Math.hypot(dx, dy);
  if (distance === 0) {
    // identical starts split along x, deterministically
    dx = 1;
    dy = 0;
    distance = 1;
  }
  if (distance >= NODE_CLEARANCE) {
    return;
  }
  const push = (NODE_CLEARANCE - distance) / 2;
  const ux = dx / distance;
  const uy = dy / distance;
  a.x -= ux * push;
  a.y -= uy * push;
  b.x += ux * push;
  b.y += uy * push;
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(Math.max(value, lo), hi);
}
