// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { App, createApp } from "../src/app.js";
import { FakeSocket, stateMessage } from "./fixtures.js";

let socket: FakeSocket;
let app: App;
let painted: string[];

function mount(): App {
  socket = new FakeSocket();
  painted = [];
  const root = document.createElement("div");
  document.body.appendChild(root);
  return createApp(root, {
    url: "ws://test/ws",
    socketFactory: () => socket,
    painter: (_canvas, base64) => painted.push(base64),
  });
}

beforeEach(() => {
  document.body.innerHTML = "";
  app = mount();
  socket.open();
  socket.reply(stateMessage());
});

function clickCell(addr: number): void {
  const cell = app.hexGrid.querySelector<HTMLSpanElement>(
    `[data-addr="${addr}"]`)!;
  cell.click();
}

describe("frame and overlays", () => {
  it("paints every state message", () => {
    expect(painted).toEqual(["aGVsbG8="]);
    socket.reply(stateMessage({ frame: "Zg==", frame_index: 1 }));
    expect(painted).toEqual(["aGVsbG8=", "Zg=="]);
    expect(app.status.textContent).toContain("frame 1");
  });

  it("canvas size follows the zoom selector within 2x-4x", () => {
    expect(app.frameCanvas.width).toBe(320);
    expect(app.frameCanvas.height).toBe(420);
  });
});

describe("hex grid editing", () => {
  it("commits a valid edit as exactly one set_ram command", () => {
    clickCell(0);
    app.editInput.value = "80";
    app.editInput.dispatchEvent(new Event("input"));
    app.commitButton.click();
    const commands = socket.sentCommands();
    expect(commands).toEqual([{ cmd: "set_ram", addr: 0, value: 80 }]);
  });

  it("refuses out-of-range edits before sending", () => {
    clickCell(0);
    app.editInput.value = "300";
    app.editInput.dispatchEvent(new Event("input"));
    app.commitButton.click();
    expect(socket.sent).toHaveLength(0);
    expect(app.editInput.classList.contains("invalid")).toBe(true);
  });

  it("round trips: the committed edit shows up in the grid and REM overlay", () => {
    clickCell(0);
    app.editInput.value = "80";
    app.editInput.dispatchEvent(new Event("input"));
    app.commitButton.click();
    const ram = new Array(128).fill(0);
    ram[0] = 80;
    socket.reply(stateMessage({ ram }));
    const cell = app.hexGrid.querySelector<HTMLSpanElement>('[data-addr="0"]')!;
    expect(cell.textContent).toBe("50"); // 80 = 0x50
    expect(cell.classList.contains("flash")).toBe(true);
  });
});

describe("transport controls", () => {
  it("each button maps to exactly one command", () => {
    for (const [action, expected] of [
      ["reset", { cmd: "reset" }],
      ["step", { cmd: "step", n: 1 }],
      ["step 10", { cmd: "step", n: 10 }],
      ["pause", { cmd: "pause" }],
    ] as const) {
      socket.sent = [];
      const button = document.querySelector<HTMLButtonElement>(
        `[data-action="${action}"]`)!;
      button.click();
      expect(socket.sentCommands()).toEqual([expected]);
      socket.reply(stateMessage());
    }
  });

  it("run carries the slider rate", () => {
    app.rateSlider.value = "60";
    document.querySelector<HTMLButtonElement>('[data-action="run"]')!.click();
    expect(socket.sentCommands()).toEqual(
      [{ cmd: "run", ticks_per_second: 60 }]);
  });

  it("overlay checkboxes send toggle_overlay", () => {
    const vem = document.querySelector<HTMLInputElement>('[data-layer="vem"]')!;
    vem.checked = false;
    vem.dispatchEvent(new Event("change"));
    expect(socket.sentCommands()).toEqual(
      [{ cmd: "toggle_overlay", layer: "vem", on: false }]);
  });

  it("agent selector sends set_agent", () => {
    app.agentSelect.value = "scripted";
    app.agentSelect.dispatchEvent(new Event("change"));
    expect(socket.sentCommands()).toEqual(
      [{ cmd: "set_agent", kind: "scripted" }]);
  });
});

describe("probe workflow", () => {
  it("probe button targets the selected byte and findings attach", () => {
    clickCell(6);
    app.probeButton.click();
    expect(socket.sentCommands()).toEqual([{ cmd: "probe", addr: 6 }]);
    socket.reply(stateMessage({
      findings: [{
        byte: 6, render_affecting: true,
        diffs: [{ value: 0, pixels: 12, bounds: [10, 20, 8, 8] }],
      }],
    }));
    expect(app.lastProbe?.byte).toBe(6);
  });
});

describe("findings and heatmap", () => {
  it("correlation findings render as table rows and heatmap cells", () => {
    socket.reply(stateMessage({
      findings: [
        { byte: 0, category: "Ball", prop: "x", r: 1.0, a: 1, b: 0 },
        { byte: 2, category: "Player", prop: "y", r: 0.99, a: 1, b: 10 },
      ],
    }));
    expect(app.findingsTable.querySelectorAll("tr")).toHaveLength(3);
    const cells = app.heatmapDiv.querySelectorAll<HTMLSpanElement>(".heatcell");
    expect(cells.length).toBe(2 * 2);
    // click-through selects the byte in the hex grid
    const target = [...cells].find((c) => c.dataset.byte === "2")!;
    target.click();
    expect(app.view.selectedByte).toBe(2);
  });
});

describe("connection lifecycle", () => {
  it("errors surface in the banner without losing the session", () => {
    socket.reply({ error: "addr: expected integer in [0, 127], got 400" });
    expect(app.banner.textContent).toContain("addr");
    socket.reply(stateMessage({ frame_index: 3 }));
    expect(app.status.textContent).toContain("frame 3");
  });

  it("disconnect shows a banner and disables controls", () => {
    socket.close();
    expect(app.banner.textContent).toBe("disconnected");
    const reset = document.querySelector<HTMLButtonElement>(
      '[data-action="reset"]')!;
    expect(reset.disabled).toBe(true);
  });

  it("a reconnected client reproduces the identical view from one message", () => {
    const ram = new Array(128).fill(7);
    socket.reply(stateMessage({ ram, frame_index: 41, score: 5 }));
    const before = app.hexGrid.textContent;

    const fresh = mount(); // simulated page reload
    socket.open();
    socket.reply(stateMessage({ ram, frame_index: 41, score: 5 }));
    expect(fresh.hexGrid.textContent).toBe(before);
    expect(fresh.status.textContent).toBe(app.status.textContent);
  });
});
