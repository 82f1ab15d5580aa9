"""Interactive session server for the RAM annotation loop.

One console per session. Commands arrive as JSON messages over a WebSocket
(or the mirrored request/response endpoints) and every command is answered
with a full state message: the rendered frame as base64 PNG, the raw RAM,
both extraction results, and the current mismatch list.
"""

from __future__ import annotations

import asyncio
import base64
import io
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image

from . import console as console_mod
from .agents import AGENT_KINDS, make_agent
from .discovery import probe_byte
from .evalkit import match_objects
from .model import GameObject, ObjectList, to_rgb
from .rem import extract_rem
from .vem import extract_vem

OVERLAY_LAYERS = ("rem", "vem", "diff")


class CommandError(ValueError):
    """Malformed command; names the offending field."""


def _object_dict(o: GameObject) -> dict:
    return {"category": o.category, "x": o.x, "y": o.y, "w": o.w, "h": o.h,
            "rgb": list(o.rgb), "hud": o.hud, "value": o.value}


@dataclass
class Session:
    """Single-owner console wrapper; commands are serialized by the caller."""

    game_id: str
    seed: int
    quirks: bool = True
    token: Optional[str] = None
    agent_kind: str = "random"
    overlays: dict = field(default_factory=lambda: {l: True for l in OVERLAY_LAYERS})
    score: int = 0
    findings: Optional[list] = None

    def __post_init__(self) -> None:
        self.console = console_mod.create(self.game_id, self.seed,
                                          enable_quirks=self.quirks)
        self.agent = make_agent(self.agent_kind, self.game_id, self.seed)
        self.run_rate: Optional[float] = None

    # --- command handling -----------------------------------------------------

    def handle(self, msg: dict) -> dict:
        cmd = msg.get("cmd")
        handler = getattr(self, f"_cmd_{cmd}", None)
        if not isinstance(cmd, str) or handler is None:
            raise CommandError(f"cmd: unknown command {cmd!r}")
        handler(msg)
        return self.state_message()

    def _int_field(self, msg: dict, name: str, lo: int, hi: int) -> int:
        value = msg.get(name)
        if not isinstance(value, int) or isinstance(value, bool) or not lo <= value <= hi:
            raise CommandError(f"{name}: expected integer in [{lo}, {hi}], got {value!r}")
        return value

    def _cmd_reset(self, msg: dict) -> None:
        if "seed" in msg:
            self.seed = self._int_field(msg, "seed", 0, 2**63 - 1)
        self.console = console_mod.create(self.game_id, self.seed,
                                          enable_quirks=self.quirks)
        self.agent = make_agent(self.agent_kind, self.game_id, self.seed)
        self.score = 0
        self.findings = None

    def _cmd_step(self, msg: dict) -> None:
        n = self._int_field(msg, "n", 0, 10_000) if "n" in msg else 1
        for _ in range(n):
            if self.console.terminated:
                break
            rem = extract_rem(bytes(self.console.ram),
                              self.console.cartridge.decoder_spec,
                              self.console.frame_counter)
            reward, _ = self.console.tick(self.agent.act(rem))
            self.score += reward

    def _cmd_run(self, msg: dict) -> None:
        rate = msg.get("ticks_per_second", 15)
        if not isinstance(rate, (int, float)) or isinstance(rate, bool) or not 0 < rate <= 240:
            raise CommandError(f"ticks_per_second: expected number in (0, 240], got {rate!r}")
        self.run_rate = float(rate)

    def _cmd_pause(self, msg: dict) -> None:
        self.run_rate = None

    def _cmd_set_ram(self, msg: dict) -> None:
        if self.token is not None and msg.get("token") != self.token:
            raise CommandError("token: set_ram requires the session capability token")
        addr = self._int_field(msg, "addr", 0, 127)
        value = self._int_field(msg, "value", 0, 255)
        self.console.poke(addr, value)

    def _cmd_probe(self, msg: dict) -> None:
        addr = self._int_field(msg, "addr", 0, 127)
        self.findings = [probe_byte(self.console, addr).to_dict()]

    def _cmd_set_agent(self, msg: dict) -> None:
        kind = msg.get("kind")
        if kind not in AGENT_KINDS:
            raise CommandError(f"kind: expected one of {AGENT_KINDS}, got {kind!r}")
        self.agent_kind = kind
        self.agent = make_agent(kind, self.game_id, self.seed)

    def _cmd_toggle_overlay(self, msg: dict) -> None:
        layer = msg.get("layer")
        if layer not in OVERLAY_LAYERS:
            raise CommandError(f"layer: expected one of {OVERLAY_LAYERS}, got {layer!r}")
        on = msg.get("on")
        if not isinstance(on, bool):
            raise CommandError(f"on: expected boolean, got {on!r}")
        self.overlays[layer] = on

    # --- state snapshot ---------------------------------------------------------

    def state_message(self) -> dict:
        cart = self.console.cartridge
        frame = self.console.render()
        rem = extract_rem(bytes(self.console.ram), cart.decoder_spec,
                          self.console.frame_counter)
        vem = extract_vem(frame, cart.vision_spec, cart.palette,
                          self.console.frame_counter)
        matching = match_objects(vem, rem)
        mismatches = (
            [{"side": "vem_extra", **_object_dict(vem.objects[i])}
             for i in matching.unmatched_reference]
            + [{"side": "rem_extra", **_object_dict(rem.objects[j])}
               for j in matching.unmatched_candidate]
            + [{"side": "shifted", **_object_dict(rem.objects[p.cand_index])}
               for p in matching.pairs if p.iou != 1]
        )
        buf = io.BytesIO()
        Image.fromarray(to_rgb(frame, cart.palette)).save(buf, format="PNG")
        message = {
            "frame": base64.b64encode(buf.getvalue()).decode("ascii"),
            "ram": list(self.console.ram),
            "objects_rem": [_object_dict(o) for o in rem],
            "objects_vem": [_object_dict(o) for o in vem],
            "mismatches": mismatches,
            "frame_index": self.console.frame_counter,
            "score": self.score,
            "terminated": self.console.terminated,
            "overlays": dict(self.overlays),
            "agent": self.agent_kind,
            "game_id": self.game_id,
            "running": self.run_rate is not None,
        }
        if self.findings is not None:
            message["findings"] = self.findings
        return message


def create_app(game_id: str = "paddle", seed: int = 0, quirks: bool = True,
               token: Optional[str] = None,
               static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="ramvision inspector")
    rest_session = Session(game_id, seed, quirks, token)
    rest_lock = asyncio.Lock()

    @app.get("/api/state")
    async def get_state() -> JSONResponse:
        async with rest_lock:
            return JSONResponse(rest_session.state_message())

    @app.post("/api/command")
    async def post_command(msg: dict) -> JSONResponse:
        async with rest_lock:
            if msg.get("cmd") == "run":
                return JSONResponse(
                    {"error": "cmd: run requires the streaming connection"},
                    status_code=400)
            try:
                return JSONResponse(rest_session.handle(msg))
            except CommandError as exc:
                return JSONResponse({"error": str(exc)}, status_code=400)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        session = Session(game_id, seed, quirks, token)
        await ws.send_json(session.state_message())
        try:
            while True:
                if session.run_rate is None:
                    msg = await ws.receive_json()
                else:
                    # stream ticks until the next command arrives
                    try:
                        msg = await asyncio.wait_for(
                            ws.receive_json(), timeout=1.0 / session.run_rate)
                    except asyncio.TimeoutError:
                        session.handle({"cmd": "step", "n": 1})
                        await ws.send_json(session.state_message())
                        continue
                try:
                    await ws.send_json(session.handle(msg))
                except CommandError as exc:
                    await ws.send_json({"error": str(exc)})
        except WebSocketDisconnect:
            return

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
