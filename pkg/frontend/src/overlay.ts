// Overlay geometry as plain draw operations so it can be tested without a
// canvas. REM boxes are solid, VEM boxes dashed, mismatches highlighted;
// probe diff bounds render as a fourth, distinct style.

import { MismatchMessage, ObjectMessage, ProbeFindingMessage, StateMessage } from "./protocol.js";

export const FRAME_W = 160;
export const FRAME_H = 210;
export const MIN_ZOOM = 2;
export const MAX_ZOOM = 4;

export const REM_COLOR = "#ff3333";
export const VEM_COLOR = "#33ffff";
export const MISMATCH_COLOR = "#ffee33";
export const PROBE_COLOR = "#ff33ff";

export interface BoxOp {
  x: number;
  y: number;
  w: number;
  h: number;
  color: string;
  dashed: boolean;
  lineWidth: number;
  label?: string;
}

export function clampZoom(zoom: number): number {
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, Math.round(zoom)));
}

function box(o: ObjectMessage, zoom: number, color: string, dashed: boolean,
             lineWidth = 1): BoxOp {
  return {
    x: o.x * zoom,
    y: o.y * zoom,
    w: o.w * zoom,
    h: o.h * zoom,
    color,
    dashed,
    lineWidth,
    label: o.category,
  };
}

export function remBoxes(objects: ObjectMessage[], zoom: number): BoxOp[] {
  return objects.map((o) => box(o, zoom, REM_COLOR, false));
}

export function vemBoxes(objects: ObjectMessage[], zoom: number): BoxOp[] {
  return objects.map((o) => box(o, zoom, VEM_COLOR, true));
}

export function mismatchBoxes(mismatches: MismatchMessage[], zoom: number): BoxOp[] {
  return mismatches.map((m) => ({
    ...box(m, zoom, MISMATCH_COLOR, false, 2),
    label: `${m.category}:${m.side}`,
  }));
}

export function probeBoxes(finding: ProbeFindingMessage, zoom: number): BoxOp[] {
  const ops: BoxOp[] = [];
  for (const diff of finding.diffs) {
    if (!diff.bounds) continue;
    const [x, y, w, h] = diff.bounds;
    ops.push({
      x: x * zoom, y: y * zoom, w: w * zoom, h: h * zoom,
      color: PROBE_COLOR, dashed: true, lineWidth: 1,
      label: `byte ${finding.byte} = ${diff.value}`,
    });
  }
  return ops;
}

// Full overlay stack for one state message, honoring the toggles it carries.
export function overlayOps(state: StateMessage, zoom: number,
                           probe: ProbeFindingMessage | null): BoxOp[] {
  const ops: BoxOp[] = [];
  if (state.overlays.rem) ops.push(...remBoxes(state.objects_rem, zoom));
  if (state.overlays.vem) ops.push(...vemBoxes(state.objects_vem, zoom));
  if (state.overlays.diff) ops.push(...mismatchBoxes(state.mismatches, zoom));
  if (probe) ops.push(...probeBoxes(probe, zoom));
  return ops;
}
