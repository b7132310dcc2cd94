/** Track-lane geometry: each track renders in its own horizontal lane so
 * labels on different tracks can never occlude one another. */

import type { LabelClass, LabelPayload, TrackDef } from './types.js';

export const LANE_HEIGHT = 28;
export const LANE_GAP = 4;

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function trackForClass(layout: TrackDef[], cls: LabelClass): number {
  for (const t of layout) {
    if (t.classes.includes(cls)) return t.track;
  }
  throw new Error(`class ${cls} is not on any track`);
}

export function laneTop(track: number): number {
  return track * (LANE_HEIGHT + LANE_GAP);
}

export function lanesHeight(layout: TrackDef[]): number {
  return layout.length * (LANE_HEIGHT + LANE_GAP) - LANE_GAP;
}

/** Milliseconds to canvas x for a view window [t0, t1] of `width` pixels. */
export function msToX(ms: number, t0Ms: number, t1Ms: number, width: number): number {
  return ((ms - t0Ms) / (t1Ms - t0Ms)) * width;
}

export function xToMs(x: number, t0Ms: number, t1Ms: number, width: number): number {
  return t0Ms + (x / width) * (t1Ms - t0Ms);
}

export function labelRect(
  label: Pick<LabelPayload, 'track' | 'start_ms' | 'end_ms'>,
  t0Ms: number,
  t1Ms: number,
  width: number,
): Rect {
  const x0 = msToX(label.start_ms, t0Ms, t1Ms, width);
  const x1 = msToX(label.end_ms, t0Ms, t1Ms, width);
  return { x: x0, y: laneTop(label.track), w: x1 - x0, h: LANE_HEIGHT };
}

export function rectsOverlap(a: Rect, b: Rect): boolean {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}
