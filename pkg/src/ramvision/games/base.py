"""Cartridge contract and shared rendering helpers.

A cartridge is static data plus pure functions: an initial RAM image, a step
rule mutating the 128-byte RAM, a render rule painting an indexed canvas, a
quirk-free object oracle, and the declarative decoder/vision specs consumed
by the two extraction paths.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import FRAME_HEIGHT, FRAME_WIDTH, GameObject, Palette
from ..rem import DecoderSpec
from ..rng import Xorshift64
from ..vem import VisionSpec

RAM_SIZE = 128
HUD_BOTTOM = 20  # rows above this line are HUD-only


# --- quirk declarations -----------------------------------------------------

@dataclass(frozen=True)
class Quirk:
    """A deliberate RAM-vs-render disagreement mechanism, toggleable by name."""

    name: str
    kind: str  # render_offset | blink | particle | freeze | sprite_shrink | size_jitter
    category: Optional[str] = None
    params: tuple = ()


@dataclass(frozen=True)
class QuirkEvent:
    """One quirk's visible effect on a single rendered frame."""

    kind: str
    category: Optional[str] = None
    box: Optional[tuple[int, int, int, int]] = None


@dataclass(frozen=True)
class StepResult:
    reward: int = 0
    terminated: bool = False
    freeze: bool = False  # this tick started a freeze window


@dataclass(frozen=True)
class CategoryDef:
    name: str
    hud: bool = False
    max_instances: int = 1


@dataclass(frozen=True)
class AffinePair:
    """Ground truth for discovery scoring: property = a * ram[byte] + b."""

    byte: int
    category: str
    prop: str
    a: float
    b: float


def clip_box(x: int, y: int, w: int, h: int) -> Optional[tuple[int, int, int, int]]:
    """Clip a box to the frame; None when fully off-screen."""
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, FRAME_WIDTH), min(y + h, FRAME_HEIGHT)
    if x0 >= x1 or y0 >= y1:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


def clipped_object(
    category: str, x: int, y: int, w: int, h: int, rgb: tuple[int, int, int], **kw
) -> Optional[GameObject]:
    box = clip_box(x, y, w, h)
    if box is None:
        return None
    return GameObject(category, *box, rgb, **kw)


def draw_rect(canvas: np.ndarray, x: int, y: int, w: int, h: int, color: int) -> None:
    box = clip_box(x, y, w, h)
    if box is not None:
        cx, cy, cw, ch = box
        canvas[cy:cy + ch, cx:cx + cw] = color


# 3x5 digit glyphs; every glyph touches all four edges of its cell so a digit
# group's tight pixel bounds are position-only (independent of the value shown).
_DIGIT_ROWS = {
    0: ("111", "101", "101", "101", "111"),
    1: ("110", "010", "010", "010", "111"),
    2: ("111", "001", "111", "100", "111"),
    3: ("111", "001", "111", "001", "111"),
    4: ("101", "101", "111", "001", "001"),
    5: ("111", "100", "111", "001", "111"),
    6: ("111", "100", "111", "101", "111"),
    7: ("111", "001", "001", "001", "001"),
    8: ("111", "101", "111", "101", "111"),
    9: ("111", "101", "111", "001", "111"),
}
DIGIT_W, DIGIT_H, DIGIT_STRIDE = 3, 5, 4

_DIGIT_MASKS = {
    d: np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    for d, rows in _DIGIT_ROWS.items()
}


def number_box(x: int, y: int, n_digits: int) -> tuple[int, int, int, int]:
    """Tight bounds of an n-digit zero-padded group drawn at (x, y)."""
    return (x, y, DIGIT_STRIDE * n_digits - 1, DIGIT_H)


def draw_number(canvas: np.ndarray, value: int, n_digits: int, x: int, y: int, color: int) -> None:
    text = f"{value % (10 ** n_digits):0{n_digits}d}"
    for i, ch in enumerate(text):
        mask = _DIGIT_MASKS[int(ch)]
        dx = x + i * DIGIT_STRIDE
        canvas[y:y + DIGIT_H, dx:dx + DIGIT_W][mask] = color


def boxes_overlap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    return a[0] < b[0] + b[2] and b[0] < a[0] + a[2] and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]


# --- cartridge contract -----------------------------------------------------

class Cartridge(ABC):
    """A deterministic game definition. Subclasses are stateless."""

    id: str
    actions: tuple[str, ...]
    palette: Palette
    categories: tuple[CategoryDef, ...]
    quirks: tuple[Quirk, ...]
    decoder_spec: DecoderSpec
    vision_spec: VisionSpec
    freeze_addr: Optional[int] = None

    @abstractmethod
    def init_ram(self) -> bytearray:
        ...

    @abstractmethod
    def step(self, ram: bytearray, action: int, rng: Xorshift64) -> StepResult:
        ...

    @abstractmethod
    def draw(
        self,
        canvas: np.ndarray,
        ram: bytes,
        frame_counter: int,
        quirk_draws: tuple[int, ...],
        quirks: frozenset[str],
    ) -> list[QuirkEvent]:
        ...

    @abstractmethod
    def ground_truth(self, ram: bytes) -> tuple[GameObject, ...]:
        """Quirk-free object oracle derived from cartridge semantics alone."""

    def draw_quirk_values(self, rng: Xorshift64) -> tuple[int, ...]:
        """Per-tick stochastic quirk draws, consumed in fixed order."""
        return ()

    @abstractmethod
    def affine_truth(self) -> tuple[AffinePair, ...]:
        """Which (byte, property) pairs are affine-decodable, for discovery scoring."""

    @abstractmethod
    def render_affecting_bytes(self, ram: bytes, frame_counter: int = 0) -> frozenset[int]:
        """Bytes for which some probe value changes the rendered frame.

        State-dependent: bytes of an inactive object do not affect the render,
        and blink-gated sprites are only reachable on the matching frame
        parity. Assumes the full declared quirk set is active.
        """

    def quirk_names(self) -> frozenset[str]:
        return frozenset(q.name for q in self.quirks)

    def category(self, name: str) -> CategoryDef:
        for c in self.categories:
            if c.name == name:
                return c
        raise KeyError(name)

    def color(self, index: int) -> tuple[int, int, int]:
        return self.palette[index]
