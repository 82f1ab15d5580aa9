// DOM wiring: one Connection, one ViewState, declarative re-render on every
// state message. Every user action maps to exactly one protocol command.

import { Connection, SocketFactory } from "./connection.js";
import { buildHeatmap, cellKey } from "./heatmap.js";
import { GRID_COLS, buildGrid } from "./hexgrid.js";
import { FRAME_H, FRAME_W, clampZoom, overlayOps } from "./overlay.js";
import {
  Command,
  ProbeFindingMessage,
  ServerMessage,
  isErrorMessage,
  isProbeFinding,
  isStateMessage,
  parseByteValue,
} from "./protocol.js";
import {
  ViewState,
  applyError,
  applyState,
  correlationFindings,
  initialViewState,
  selectByte,
  setConnected,
  setEditBuffer,
  setFindingsSort,
} from "./store.js";

export type FramePainter = (canvas: HTMLCanvasElement, base64Png: string) => void;

export interface AppOptions {
  url: string;
  socketFactory: SocketFactory;
  painter?: FramePainter;
  zoom?: number;
}

const defaultPainter: FramePainter = (canvas, base64Png) => {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const img = new Image();
  img.onload = () => {
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(img, 0, 0, canvas.width, canvas.height);
  };
  img.src = `data:image/png;base64,${base64Png}`;
};

export class App {
  view: ViewState = initialViewState();
  zoom: number;
  lastProbe: ProbeFindingMessage | null = null;
  readonly connection: Connection;

  readonly banner: HTMLDivElement;
  readonly frameCanvas: HTMLCanvasElement;
  readonly overlayCanvas: HTMLCanvasElement;
  readonly status: HTMLDivElement;
  readonly hexGrid: HTMLDivElement;
  readonly editInput: HTMLInputElement;
  readonly commitButton: HTMLButtonElement;
  readonly probeButton: HTMLButtonElement;
  readonly agentSelect: HTMLSelectElement;
  readonly rateSlider: HTMLInputElement;
  readonly findingsTable: HTMLTableElement;
  readonly heatmapDiv: HTMLDivElement;
  private controls: (HTMLButtonElement | HTMLInputElement | HTMLSelectElement)[] = [];
  private painter: FramePainter;

  constructor(root: HTMLElement, options: AppOptions) {
    this.zoom = clampZoom(options.zoom ?? 2);
    this.painter = options.painter ?? defaultPainter;
    const doc = root.ownerDocument;

    this.banner = doc.createElement("div");
    this.banner.className = "banner";
    this.banner.textContent = "connecting...";
    root.appendChild(this.banner);

    const stage = doc.createElement("div");
    stage.className = "stage";
    this.frameCanvas = doc.createElement("canvas");
    this.overlayCanvas = doc.createElement("canvas");
    this.frameCanvas.className = "frame";
    this.overlayCanvas.className = "overlay";
    this.resizeCanvases();
    stage.appendChild(this.frameCanvas);
    stage.appendChild(this.overlayCanvas);
    root.appendChild(stage);

    this.status = doc.createElement("div");
    this.status.className = "status";
    root.appendChild(this.status);

    const transport = doc.createElement("div");
    transport.className = "transport";
    const button = (label: string, command: () => Command) => {
      const el = doc.createElement("button");
      el.textContent = label;
      el.dataset.action = label;
      el.onclick = () => this.send(command());
      transport.appendChild(el);
      this.controls.push(el);
      return el;
    };
    button("reset", () => ({ cmd: "reset" }));
    button("step", () => ({ cmd: "step", n: 1 }));
    button("step 10", () => ({ cmd: "step", n: 10 }));
    button("run", () => ({ cmd: "run", ticks_per_second: Number(this.rateSlider.value) }));
    button("pause", () => ({ cmd: "pause" }));

    this.rateSlider = doc.createElement("input");
    this.rateSlider.type = "range";
    this.rateSlider.min = "1";
    this.rateSlider.max = "240";
    this.rateSlider.value = "15";
    transport.appendChild(this.rateSlider);
    this.controls.push(this.rateSlider);

    this.agentSelect = doc.createElement("select");
    for (const kind of ["random", "scripted"]) {
      const opt = doc.createElement("option");
      opt.value = kind;
      opt.textContent = kind;
      this.agentSelect.appendChild(opt);
    }
    this.agentSelect.onchange = () =>
      this.send({ cmd: "set_agent", kind: this.agentSelect.value as "random" | "scripted" });
    transport.appendChild(this.agentSelect);
    this.controls.push(this.agentSelect);

    for (const layer of ["rem", "vem", "diff"] as const) {
      const toggle = doc.createElement("input");
      toggle.type = "checkbox";
      toggle.checked = true;
      toggle.dataset.layer = layer;
      toggle.onchange = () =>
        this.send({ cmd: "toggle_overlay", layer, on: toggle.checked });
      transport.appendChild(toggle);
      this.controls.push(toggle);
    }

    const zoomSelect = doc.createElement("select");
    zoomSelect.dataset.action = "zoom";
    for (const z of [2, 3, 4]) {
      const opt = doc.createElement("option");
      opt.value = String(z);
      opt.textContent = `${z}x`;
      zoomSelect.appendChild(opt);
    }
    zoomSelect.onchange = () => {
      this.zoom = clampZoom(Number(zoomSelect.value));
      this.resizeCanvases();
      this.render();
    };
    transport.appendChild(zoomSelect);
    root.appendChild(transport);

    this.hexGrid = doc.createElement("div");
    this.hexGrid.className = "hexgrid";
    root.appendChild(this.hexGrid);

    const editor = doc.createElement("div");
    editor.className = "editor";
    this.editInput = doc.createElement("input");
    this.editInput.type = "text";
    this.editInput.oninput = () => {
      this.view = setEditBuffer(this.view, this.editInput.value);
    };
    this.editInput.onkeydown = (ev: KeyboardEvent) => {
      if (ev.key === "Enter") this.commitEdit();
    };
    this.commitButton = doc.createElement("button");
    this.commitButton.textContent = "write";
    this.commitButton.onclick = () => this.commitEdit();
    this.probeButton = doc.createElement("button");
    this.probeButton.textContent = "probe";
    this.probeButton.onclick = () => {
      if (this.view.selectedByte !== null) {
        this.send({ cmd: "probe", addr: this.view.selectedByte });
      }
    };
    editor.appendChild(this.editInput);
    editor.appendChild(this.commitButton);
    editor.appendChild(this.probeButton);
    root.appendChild(editor);
    this.controls.push(this.editInput, this.commitButton, this.probeButton);

    this.findingsTable = doc.createElement("table");
    this.findingsTable.className = "findings";
    root.appendChild(this.findingsTable);
    this.heatmapDiv = doc.createElement("div");
    this.heatmapDiv.className = "heatmap";
    root.appendChild(this.heatmapDiv);

    this.setControlsEnabled(false);
    this.connection = new Connection(options.url, {
      onMessage: (msg) => this.receive(msg),
      onOpen: () => {
        this.view = setConnected(this.view, true);
        this.banner.textContent = "";
        this.banner.classList.remove("error");
        this.setControlsEnabled(true);
      },
      onClose: () => {
        this.view = setConnected(this.view, false);
        this.banner.textContent = "disconnected";
        this.banner.classList.add("error");
        this.setControlsEnabled(false);
      },
    }, options.socketFactory);
  }

  send(command: Command): void {
    this.connection.send(command);
  }

  commitEdit(): void {
    const addr = this.view.selectedByte;
    const value = parseByteValue(this.view.editBuffer);
    this.editInput.classList.toggle("invalid", value === null);
    if (addr === null || value === null) return;
    this.send({ cmd: "set_ram", addr, value });
  }

  receive(msg: ServerMessage): void {
    if (isErrorMessage(msg)) {
      this.view = applyError(this.view, msg.error);
      this.banner.textContent = msg.error;
      this.banner.classList.add("error");
      return;
    }
    if (!isStateMessage(msg)) return;
    this.view = applyState(this.view, msg);
    const probes = (msg.findings ?? []).filter(isProbeFinding);
    if (probes.length > 0) this.lastProbe = probes[probes.length - 1];
    this.render();
  }

  render(): void {
    const state = this.view.latest;
    if (!state) return;
    this.painter(this.frameCanvas, state.frame);
    this.drawOverlays();
    this.status.textContent =
      `${state.game_id}  frame ${state.frame_index}  score ${state.score}` +
      `${state.running ? "  running" : ""}${state.terminated ? "  terminated" : ""}`;
    this.agentSelect.value = state.agent;
    this.renderHexGrid();
    this.renderFindings();
  }

  private drawOverlays(): void {
    const state = this.view.latest;
    if (!state) return;
    const ctx = this.overlayCanvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.overlayCanvas.width, this.overlayCanvas.height);
    for (const op of overlayOps(state, this.zoom, this.lastProbe)) {
      ctx.strokeStyle = op.color;
      ctx.lineWidth = op.lineWidth;
      ctx.setLineDash(op.dashed ? [4, 3] : []);
      ctx.strokeRect(op.x + 0.5, op.y + 0.5, op.w - 1, op.h - 1);
    }
  }

  private renderHexGrid(): void {
    const state = this.view.latest;
    if (!state) return;
    const doc = this.hexGrid.ownerDocument;
    this.hexGrid.textContent = "";
    for (const cell of buildGrid(state.ram, this.view.changedBytes,
                                 this.view.selectedByte)) {
      const el = doc.createElement("span");
      el.className = "cell"
        + (cell.changed ? " flash" : "")
        + (cell.selected ? " selected" : "");
      el.dataset.addr = String(cell.addr);
      el.textContent = cell.hex;
      el.onclick = () => {
        this.view = selectByte(this.view, cell.addr);
        this.editInput.value = this.view.editBuffer;
        this.renderHexGrid();
      };
      this.hexGrid.appendChild(el);
      if (cell.col === GRID_COLS - 1) this.hexGrid.appendChild(doc.createElement("br"));
    }
  }

  private renderFindings(): void {
    const state = this.view.latest;
    if (!state) return;
    const doc = this.findingsTable.ownerDocument;
    const rows = correlationFindings(state.findings, this.view.findingsSort);
    this.findingsTable.textContent = "";
    const header = doc.createElement("tr");
    for (const [label, sort] of [["byte", "byte"], ["property", null],
                                 ["r", "r"], ["fit", null]] as const) {
      const th = doc.createElement("th");
      th.textContent = label;
      if (sort) {
        th.onclick = () => {
          this.view = setFindingsSort(this.view, sort);
          this.renderFindings();
        };
      }
      header.appendChild(th);
    }
    this.findingsTable.appendChild(header);
    for (const f of rows) {
      const tr = doc.createElement("tr");
      const cells = [String(f.byte), `${f.category}.${f.prop}`,
                     f.r.toFixed(4), `a=${f.a} b=${f.b}`];
      for (const text of cells) {
        const td = doc.createElement("td");
        td.textContent = text;
        tr.appendChild(td);
      }
      this.findingsTable.appendChild(tr);
    }
    this.renderHeatmap(rows);
  }

  private renderHeatmap(rows: ReturnType<typeof correlationFindings>): void {
    const doc = this.heatmapDiv.ownerDocument;
    this.heatmapDiv.textContent = "";
    const heatmap = buildHeatmap(rows);
    for (const prop of heatmap.props) {
      const rowEl = doc.createElement("div");
      rowEl.className = "heatrow";
      for (const byte of heatmap.bytes) {
        const r = heatmap.cells.get(cellKey(byte, prop)) ?? 0;
        const el = doc.createElement("span");
        el.className = "heatcell";
        el.dataset.byte = String(byte);
        el.dataset.prop = prop;
        el.style.opacity = String(r);
        el.title = `${prop} ~ byte ${byte} (|r|=${r.toFixed(3)})`;
        el.onclick = () => {
          // click-through: select the byte in the hex grid
          this.view = selectByte(this.view, byte);
          this.editInput.value = this.view.editBuffer;
          this.renderHexGrid();
        };
        rowEl.appendChild(el);
      }
      this.heatmapDiv.appendChild(rowEl);
    }
  }

  private resizeCanvases(): void {
    for (const canvas of [this.frameCanvas, this.overlayCanvas]) {
      canvas.width = FRAME_W * this.zoom;
      canvas.height = FRAME_H * this.zoom;
    }
  }

  private setControlsEnabled(enabled: boolean): void {
    for (const el of this.controls) el.disabled = !enabled;
  }
}

export function createApp(root: HTMLElement, options: AppOptions): App {
  return new App(root, options);
}
