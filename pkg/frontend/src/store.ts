// View state reducer. Overlays rendered anywhere in the UI always derive
// from `latest`; nothing here advances game state locally.

import {
  CorrelationFindingMessage,
  FindingMessage,
  StateMessage,
  isProbeFinding,
} from "./protocol.js";

export type FindingsSort = "byte" | "r";

export interface ViewState {
  connected: boolean;
  latest: StateMessage | null;
  changedBytes: Set<number>; // vs the previous state message, for change-flash
  selectedByte: number | null;
  editBuffer: string;
  findingsSort: FindingsSort;
  lastError: string | null;
}

export function initialViewState(): ViewState {
  return {
    connected: false,
    latest: null,
    changedBytes: new Set(),
    selectedByte: null,
    editBuffer: "",
    findingsSort: "byte",
    lastError: null,
  };
}

export function applyState(view: ViewState, msg: StateMessage): ViewState {
  const changed = new Set<number>();
  if (view.latest) {
    for (let i = 0; i < 128; i++) {
      if (view.latest.ram[i] !== msg.ram[i]) changed.add(i);
    }
  }
  return { ...view, latest: msg, changedBytes: changed, lastError: null };
}

export function applyError(view: ViewState, error: string): ViewState {
  return { ...view, lastError: error };
}

export function setConnected(view: ViewState, connected: boolean): ViewState {
  return { ...view, connected };
}

export function selectByte(view: ViewState, addr: number | null): ViewState {
  const current = addr !== null && view.latest ? String(view.latest.ram[addr]) : "";
  return { ...view, selectedByte: addr, editBuffer: current };
}

export function setEditBuffer(view: ViewState, text: string): ViewState {
  return { ...view, editBuffer: text };
}

export function setFindingsSort(view: ViewState, sort: FindingsSort): ViewState {
  return { ...view, findingsSort: sort };
}

export function correlationFindings(
  findings: FindingMessage[] | undefined,
  sort: FindingsSort,
): CorrelationFindingMessage[] {
  const rows = (findings ?? []).filter(
    (f): f is CorrelationFindingMessage => !isProbeFinding(f),
  );
  const sorted = [...rows];
  if (sort === "byte") {
    sorted.sort((a, b) => a.byte - b.byte || a.category.localeCompare(b.category));
  } else {
    sorted.sort((a, b) => Math.abs(b.r) - Math.abs(a.r) || a.byte - b.byte);
  }
  return sorted;
}
