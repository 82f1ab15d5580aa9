import { describe, expect, it } from "vitest";

import { Connection } from "../src/connection.js";
import { FakeSocket, stateMessage } from "./fixtures.js";

function connect() {
  const socket = new FakeSocket();
  const received: unknown[] = [];
  const events = { opened: 0, closed: 0 };
  const conn = new Connection("ws://test/ws", {
    onMessage: (msg) => received.push(msg),
    onOpen: () => events.opened++,
    onClose: () => events.closed++,
  }, () => socket);
  return { socket, conn, received, events };
}

describe("Connection", () => {
  it("drops commands until the socket opens", () => {
    const { socket, conn } = connect();
    conn.send({ cmd: "pause" });
    expect(socket.sent).toHaveLength(0);
    socket.open();
    conn.send({ cmd: "pause" });
    expect(socket.sentCommands()).toEqual([{ cmd: "pause" }]);
  });

  it("keeps at most one command in flight", () => {
    const { socket, conn } = connect();
    socket.open();
    conn.send({ cmd: "step", n: 1 });
    conn.send({ cmd: "step", n: 2 });
    conn.send({ cmd: "step", n: 3 });
    expect(socket.sent).toHaveLength(1);
    expect(conn.queuedCount).toBe(3);
    socket.reply(stateMessage()); // ack releases the next command
    expect(socket.sent).toHaveLength(2);
    socket.reply(stateMessage());
    socket.reply(stateMessage());
    expect(socket.sentCommands().map((c) => c.n)).toEqual([1, 2, 3]);
    expect(conn.queuedCount).toBe(0);
  });

  it("error replies release the in-flight slot too", () => {
    const { socket, conn, received } = connect();
    socket.open();
    conn.send({ cmd: "set_ram", addr: 0, value: 80 });
    conn.send({ cmd: "step", n: 1 });
    socket.reply({ error: "token: set_ram requires the session capability token" });
    expect(socket.sent).toHaveLength(2);
    expect(received).toHaveLength(1);
  });

  it("close clears the queue and reports", () => {
    const { socket, conn, events } = connect();
    socket.open();
    conn.send({ cmd: "step", n: 1 });
    conn.send({ cmd: "step", n: 2 });
    socket.close();
    expect(events.closed).toBe(1);
    expect(conn.open).toBe(false);
    expect(conn.queuedCount).toBe(0);
  });

  it("unsolicited streamed messages are delivered while running", () => {
    const { socket, received } = connect();
    socket.open();
    socket.reply(stateMessage({ frame_index: 1, running: true }));
    socket.reply(stateMessage({ frame_index: 2, running: true }));
    expect(received).toHaveLength(2);
  });
});
