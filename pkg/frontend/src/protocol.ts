// Message schema spoken by the inspector service. Field names are normative;
// the UI consumes them verbatim and never simulates game logic locally.

export interface ObjectMessage {
  category: string;
  x: number;
  y: number;
  w: number;
  h: number;
  rgb: [number, number, number];
  hud: boolean;
  value: number | null;
}

export interface MismatchMessage extends ObjectMessage {
  side: "rem_extra" | "vem_extra" | "shifted";
}

export interface ProbeDiffMessage {
  value: number;
  pixels: number;
  bounds: [number, number, number, number] | null;
}

export interface ProbeFindingMessage {
  byte: number;
  render_affecting: boolean;
  diffs: ProbeDiffMessage[];
}

export interface CorrelationFindingMessage {
  byte: number;
  category: string;
  prop: string;
  r: number;
  a: number;
  b: number;
}

export type FindingMessage = ProbeFindingMessage | CorrelationFindingMessage;

export interface StateMessage {
  frame: string; // base64 PNG
  ram: number[]; // 128 bytes
  objects_rem: ObjectMessage[];
  objects_vem: ObjectMessage[];
  mismatches: MismatchMessage[];
  frame_index: number;
  score: number;
  terminated: boolean;
  overlays: { rem: boolean; vem: boolean; diff: boolean };
  agent: string;
  game_id: string;
  running: boolean;
  findings?: FindingMessage[];
}

export interface ErrorMessage {
  error: string;
}

export type ServerMessage = StateMessage | ErrorMessage;

export type OverlayLayer = "rem" | "vem" | "diff";

export type Command =
  | { cmd: "reset"; seed?: number }
  | { cmd: "step"; n: number }
  | { cmd: "run"; ticks_per_second: number }
  | { cmd: "pause" }
  | { cmd: "set_ram"; addr: number; value: number; token?: string }
  | { cmd: "probe"; addr: number }
  | { cmd: "set_agent"; kind: "random" | "scripted" }
  | { cmd: "toggle_overlay"; layer: OverlayLayer; on: boolean };

export function isErrorMessage(msg: ServerMessage): msg is ErrorMessage {
  return typeof (msg as ErrorMessage).error === "string";
}

export function isStateMessage(msg: ServerMessage): msg is StateMessage {
  const m = msg as StateMessage;
  return typeof m.frame === "string" && Array.isArray(m.ram) && m.ram.length === 128;
}

export function isProbeFinding(f: FindingMessage): f is ProbeFindingMessage {
  return Array.isArray((f as ProbeFindingMessage).diffs);
}

// Byte edits are validated client-side before a set_ram ever leaves the UI.
export function parseByteValue(text: string): number | null {
  const trimmed = text.trim();
  if (!/^(0x[0-9a-fA-F]{1,2}|\d{1,3})$/.test(trimmed)) return null;
  const value = trimmed.startsWith("0x") ? parseInt(trimmed, 16) : parseInt(trimmed, 10);
  return value >= 0 && value <= 255 ? value : null;
}
