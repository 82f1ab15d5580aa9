import { describe, expect, it } from "vitest";

import {
  MISMATCH_COLOR,
  PROBE_COLOR,
  REM_COLOR,
  VEM_COLOR,
  clampZoom,
  overlayOps,
  probeBoxes,
  remBoxes,
  vemBoxes,
} from "../src/overlay.js";
import { stateMessage } from "./fixtures.js";

const ball = { category: "Ball", x: 80, y: 110, w: 2, h: 4,
               rgb: [236, 236, 236] as [number, number, number],
               hud: false, value: null };

describe("box styles", () => {
  it("REM boxes are solid and scale with zoom", () => {
    const [op] = remBoxes([ball], 3);
    expect(op).toMatchObject({ x: 240, y: 330, w: 6, h: 12,
                               color: REM_COLOR, dashed: false });
  });

  it("VEM boxes are dashed", () => {
    const [op] = vemBoxes([ball], 2);
    expect(op.dashed).toBe(true);
    expect(op.color).toBe(VEM_COLOR);
  });

  it("probe diff bounds render with the byte and value labeled", () => {
    const ops = probeBoxes({
      byte: 6,
      render_affecting: true,
      diffs: [
        { value: 0, pixels: 10, bounds: [10, 20, 8, 8] },
        { value: 255, pixels: 0, bounds: null },
      ],
    }, 2);
    expect(ops).toHaveLength(1);
    expect(ops[0]).toMatchObject({ x: 20, y: 40, w: 16, h: 16,
                                   color: PROBE_COLOR });
    expect(ops[0].label).toContain("byte 6");
  });
});

describe("overlayOps", () => {
  it("honors the toggles carried by the state message", () => {
    const state = stateMessage({
      mismatches: [{ ...ball, side: "shifted" }],
      overlays: { rem: true, vem: false, diff: true },
    });
    const colors = overlayOps(state, 2, null).map((op) => op.color);
    expect(colors).toContain(REM_COLOR);
    expect(colors).toContain(MISMATCH_COLOR);
    expect(colors).not.toContain(VEM_COLOR);
  });

  it("turning VEM off leaves only solid boxes", () => {
    const state = stateMessage({ overlays: { rem: true, vem: false, diff: true } });
    expect(overlayOps(state, 2, null).every((op) => !op.dashed)).toBe(true);
  });
});

describe("clampZoom", () => {
  it("clamps into the 2x-4x range", () => {
    expect(clampZoom(1)).toBe(2);
    expect(clampZoom(3)).toBe(3);
    expect(clampZoom(9)).toBe(4);
  });
});
