import { describe, expect, it } from "vitest";

import {
  applyError,
  applyState,
  correlationFindings,
  initialViewState,
  selectByte,
  setEditBuffer,
} from "../src/store.js";
import { stateMessage } from "./fixtures.js";

describe("applyState", () => {
  it("flags changed bytes against the previous message", () => {
    let view = applyState(initialViewState(), stateMessage());
    expect(view.changedBytes.size).toBe(0); // first message: nothing to diff
    const ram = new Array(128).fill(0);
    ram[0] = 80;
    ram[9] = 1;
    view = applyState(view, stateMessage({ ram }));
    expect([...view.changedBytes].sort((a, b) => a - b)).toEqual([0, 9]);
  });

  it("clears the last error on a fresh state", () => {
    let view = applyError(initialViewState(), "addr: out of range");
    expect(view.lastError).toBe("addr: out of range");
    view = applyState(view, stateMessage());
    expect(view.lastError).toBeNull();
  });
});

describe("selectByte", () => {
  it("seeds the edit buffer with the current value", () => {
    const ram = new Array(128).fill(0);
    ram[5] = 123;
    let view = applyState(initialViewState(), stateMessage({ ram }));
    view = selectByte(view, 5);
    expect(view.editBuffer).toBe("123");
    view = setEditBuffer(view, "200");
    expect(view.editBuffer).toBe("200");
    view = selectByte(view, null);
    expect(view.editBuffer).toBe("");
  });
});

describe("correlationFindings", () => {
  const findings = [
    { byte: 7, category: "Fruit", prop: "x", r: 0.97, a: 1, b: 0 },
    { byte: 0, category: "Ball", prop: "x", r: -0.99, a: 1, b: 0 },
    { byte: 3, render_affecting: true, diffs: [] },
  ];

  it("filters probe findings and sorts by byte", () => {
    const rows = correlationFindings(findings as never, "byte");
    expect(rows.map((f) => f.byte)).toEqual([0, 7]);
  });

  it("sorts by |r| descending when asked", () => {
    const rows = correlationFindings(findings as never, "r");
    expect(rows.map((f) => f.byte)).toEqual([0, 7]);
    expect(Math.abs(rows[0].r)).toBeGreaterThan(Math.abs(rows[1].r));
  });

  it("handles missing findings", () => {
    expect(correlationFindings(undefined, "byte")).toEqual([]);
  });
});
