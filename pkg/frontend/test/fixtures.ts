// Shared test doubles: a canned state message and a fake WebSocket.

import { SocketLike } from "../src/connection.js";
import { ServerMessage, StateMessage } from "../src/protocol.js";

export function stateMessage(overrides: Partial<StateMessage> = {}): StateMessage {
  return {
    frame: "aGVsbG8=",
    ram: new Array(128).fill(0),
    objects_rem: [
      { category: "Ball", x: 80, y: 110, w: 2, h: 4, rgb: [236, 236, 236],
        hud: false, value: null },
    ],
    objects_vem: [
      { category: "Ball", x: 80, y: 110, w: 2, h: 4, rgb: [236, 236, 236],
        hud: false, value: null },
    ],
    mismatches: [],
    frame_index: 0,
    score: 0,
    terminated: false,
    overlays: { rem: true, vem: true, diff: true },
    agent: "random",
    game_id: "paddle",
    running: false,
    ...overrides,
  };
}

export class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  // test helpers simulating the server side
  open(): void {
    this.onopen?.();
  }

  reply(msg: ServerMessage): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }

  sentCommands(): Array<Record<string, unknown>> {
    return this.sent.map((s) => JSON.parse(s));
  }
}
