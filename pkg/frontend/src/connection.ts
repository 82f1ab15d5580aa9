// WebSocket transport with a single in-flight command. The session streams
// unsolicited state messages while running, so acknowledgments are simply
// "the next state message after a send"; errors release the slot too.

import { Command, ServerMessage } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionEvents {
  onMessage: (msg: ServerMessage) => void;
  onOpen?: () => void;
  onClose?: () => void;
}

export class Connection {
  private socket: SocketLike;
  private pending: Command[] = [];
  private inFlight = false;
  open = false;

  constructor(url: string, events: ConnectionEvents, factory: SocketFactory) {
    this.socket = factory(url);
    this.socket.onopen = () => {
      this.open = true;
      events.onOpen?.();
    };
    this.socket.onclose = () => {
      this.open = false;
      this.pending = [];
      this.inFlight = false;
      events.onClose?.();
    };
    this.socket.onmessage = (ev) => {
      // any server reply (state or error) acknowledges the in-flight command
      if (this.inFlight) {
        this.inFlight = false;
        this.flush();
      }
      events.onMessage(JSON.parse(ev.data) as ServerMessage);
    };
  }

  send(command: Command): void {
    if (!this.open) return;
    this.pending.push(command);
    this.flush();
  }

  get queuedCount(): number {
    return this.pending.length + (this.inFlight ? 1 : 0);
  }

  private flush(): void {
    if (this.inFlight || this.pending.length === 0) return;
    const next = this.pending.shift()!;
    this.inFlight = true;
    this.socket.send(JSON.stringify(next));
  }

  close(): void {
    this.socket.close();
  }
}
