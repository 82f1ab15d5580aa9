"""Gym-style environment wrapper over the console.

Observation modes: a fixed-slot object position vector over the last two
steps, the raw 128-byte RAM, or a rolling stack of four 84x84 grayscale
planes. A frame-skip repeats the chosen action and sums rewards; HUD slots
are filterable from object observations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from . import console as console_mod
from .model import Frame, ObjectList, Palette, to_rgb
from .rem import extract_rem
from .vem import extract_vem

OBS_MODES = ("objects", "ram", "pixels")
EXTRACTION_MODES = ("rem", "vem", "both")
PLANE_SIZE = 84
STACK_DEPTH = 4
OBJECT_HISTORY = 2


@dataclass(frozen=True)
class EnvConfig:
    game_id: str
    obs_mode: str = "objects"
    include_hud: bool = True
    frame_skip: int = 1
    seed: int = 0
    quirks_enabled: bool = True
    extraction: str = "both"  # which object lists the info dict carries

    def __post_init__(self) -> None:
        if self.obs_mode not in OBS_MODES:
            raise ValueError(f"obs_mode {self.obs_mode!r} not in {OBS_MODES}")
        if self.extraction not in EXTRACTION_MODES:
            raise ValueError(f"extraction {self.extraction!r} not in {EXTRACTION_MODES}")
        if self.frame_skip < 1:
            raise ValueError("frame_skip must be >= 1")


@lru_cache(maxsize=None)
def _resample_weights(src: int, dst: int) -> np.ndarray:
    """dst x src area-overlap averaging matrix; rows sum to exactly 1."""
    scale = Fraction(src, dst)
    w = np.zeros((dst, src), dtype=np.float64)
    for i in range(dst):
        lo, hi = i * scale, (i + 1) * scale
        for j in range(int(lo), -int(-hi // 1)):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                w[i, j] = float(overlap / scale)
    return w


def grayscale_downsample(frame: Frame, palette: Palette) -> np.ndarray:
    """84x84 uint8 plane: per-pixel luma then exact area-average resampling."""
    lut = np.array(
        [int(0.299 * r + 0.587 * g + 0.114 * b + 0.5) for r, g, b in palette.colors],
        dtype=np.float64,
    )
    luma = lut[frame.pixels]
    wy = _resample_weights(frame.pixels.shape[0], PLANE_SIZE)
    wx = _resample_weights(frame.pixels.shape[1], PLANE_SIZE)
    plane = wy @ luma @ wx.T
    return np.floor(plane + 0.5).astype(np.uint8)


class Env:
    """One console with ALE-shaped reset/step/render plus RAM access."""

    def __init__(self, config: EnvConfig) -> None:
        self.config = config
        self.console: Optional[console_mod.Console] = None
        self._next_seed = config.seed
        self._planes: deque[np.ndarray] = deque(maxlen=STACK_DEPTH)
        self._slots: deque[np.ndarray] = deque(maxlen=OBJECT_HISTORY)
        cart = console_mod.get_cartridge(config.game_id)
        self._slot_categories = tuple(
            c for c in cart.categories if config.include_hud or not c.hud
        )

    # --- lifecycle ----------------------------------------------------------

    def seed(self, seed: int) -> None:
        self._next_seed = seed

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        if seed is not None:
            self._next_seed = seed
        self.console = console_mod.create(
            self.config.game_id, self._next_seed,
            enable_quirks=self.config.quirks_enabled,
        )
        self._planes.clear()
        self._slots.clear()
        if self._needs_pixels():
            plane = grayscale_downsample(self.render(), self.console.cartridge.palette)
            for _ in range(STACK_DEPTH):
                self._planes.append(plane)
        if self._needs_objects():
            slots = self._object_slots()
            for _ in range(OBJECT_HISTORY):
                self._slots.append(slots)
        return self._observation()

    def step(self, action: int) -> tuple[np.ndarray, int, bool, bool, dict]:
        if self.console is None:
            raise RuntimeError("reset() before step()")
        reward, terminated = 0, False
        for _ in range(self.config.frame_skip):
            r, terminated = self.console.tick(action)
            reward += r
            if terminated:
                break
        info: dict = {"frame_index": self.console.frame_counter}
        frame = None
        if self._needs_pixels() or self.config.extraction in ("vem", "both"):
            frame = self.render()
        if self._needs_pixels():
            self._planes.append(
                grayscale_downsample(frame, self.console.cartridge.palette))
        if self._needs_objects() or self.config.extraction in ("rem", "both"):
            rem = extract_rem(bytes(self.console.ram),
                              self.console.cartridge.decoder_spec,
                              self.console.frame_counter)
            if self.config.extraction in ("rem", "both"):
                info["objects_rem"] = rem
            if self._needs_objects():
                self._slots.append(self._object_slots(rem))
        if self.config.extraction in ("vem", "both"):
            info["objects_vem"] = extract_vem(
                frame, self.console.cartridge.vision_spec,
                self.console.cartridge.palette, self.console.frame_counter)
            info["quirk_events"] = tuple(self.console.last_quirk_events)
        return self._observation(), reward, terminated, False, info

    # --- views --------------------------------------------------------------

    def render(self) -> Frame:
        return self.console.render()

    def render_rgb(self) -> np.ndarray:
        return to_rgb(self.console.render(), self.console.cartridge.palette)

    def get_ram(self) -> bytes:
        return bytes(self.console.ram)

    def set_ram(self, addr: int, value: int) -> None:
        self.console.poke(addr, value)

    @property
    def actions(self) -> tuple[str, ...]:
        return console_mod.get_cartridge(self.config.game_id).actions

    # --- internals ----------------------------------------------------------

    def _needs_pixels(self) -> bool:
        return self.config.obs_mode == "pixels"

    def _needs_objects(self) -> bool:
        return self.config.obs_mode == "objects"

    def _object_slots(self, rem: Optional[ObjectList] = None) -> np.ndarray:
        if rem is None:
            rem = extract_rem(bytes(self.console.ram),
                              self.console.cartridge.decoder_spec,
                              self.console.frame_counter)
        out = []
        for cat in self._slot_categories:
            found = rem.by_category(cat.name)[:cat.max_instances]
            for obj in found:
                out.extend((obj.x, obj.y))
            out.extend((0, 0) * (cat.max_instances - len(found)))
        return np.asarray(out, dtype=np.int32)

    def _observation(self) -> np.ndarray:
        if self.config.obs_mode == "ram":
            return np.frombuffer(bytes(self.console.ram), dtype=np.uint8).copy()
        if self.config.obs_mode == "pixels":
            return np.stack(self._planes)
        return np.concatenate(list(self._slots))
