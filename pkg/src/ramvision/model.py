"""Shared domain types: objects, object lists, indexed frames and palettes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

FRAME_WIDTH = 160
FRAME_HEIGHT = 210


class MalformedFrameError(ValueError):
    """Raised when frame pixel data is inconsistent with its palette."""


@dataclass(frozen=True)
class GameObject:
    """One extracted game object.

    (x, y) is the top-left corner in frame coordinates; width/height are
    inclusive pixel extents (the box covers [x, x+w) x [y, y+h)).
    """

    category: str
    x: int
    y: int
    w: int
    h: int
    rgb: tuple[int, int, int]
    hud: bool = False
    orientation: Optional[int] = None
    value: Optional[int] = None
    track_id: Optional[int] = None

    def __post_init__(self) -> None:
        if not (0 <= self.x and self.x + self.w <= FRAME_WIDTH):
            raise ValueError(f"{self.category}: x span [{self.x}, {self.x + self.w}) outside frame")
        if not (0 <= self.y and self.y + self.h <= FRAME_HEIGHT):
            raise ValueError(f"{self.category}: y span [{self.y}, {self.y + self.h}) outside frame")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"{self.category}: degenerate box {self.w}x{self.h}")

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.w, self.h)

    def with_track_id(self, track_id: int) -> "GameObject":
        return replace(self, track_id=track_id)


def center(obj: GameObject) -> tuple[Fraction, Fraction]:
    """Box center; exact rational so 5-pixel threshold checks have no float fuzz."""
    return (Fraction(2 * obj.x + obj.w, 2), Fraction(2 * obj.y + obj.h, 2))


def iou(a: GameObject, b: GameObject) -> Fraction:
    """Intersection over union of two boxes, exact."""
    ix = max(0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return Fraction(inter, union) if union else Fraction(0)


@dataclass(frozen=True)
class ObjectList:
    """Ordered objects extracted from (or defined for) a single frame."""

    objects: tuple[GameObject, ...]
    frame_index: int = 0

    def __post_init__(self) -> None:
        seen: set[tuple[str, int]] = set()
        for obj in self.objects:
            if obj.track_id is not None:
                key = (obj.category, obj.track_id)
                if key in seen:
                    raise ValueError(f"duplicate track key {key}")
                seen.add(key)

    def __iter__(self) -> Iterator[GameObject]:
        return iter(self.objects)

    def __len__(self) -> int:
        return len(self.objects)

    def by_category(self, category: str) -> tuple[GameObject, ...]:
        return tuple(o for o in self.objects if o.category == category)

    def without_hud(self) -> "ObjectList":
        return ObjectList(tuple(o for o in self.objects if not o.hud), self.frame_index)

    def hud_only(self) -> "ObjectList":
        return ObjectList(tuple(o for o in self.objects if o.hud), self.frame_index)


@dataclass(frozen=True)
class Palette:
    """Console color set; index 0 is the background color."""

    palette_id: str
    colors: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if len(self.colors) > 16:
            raise ValueError("palette limited to 16 entries")
        if len(set(self.colors)) != len(self.colors):
            raise ValueError("palette entries must be distinct")

    def __len__(self) -> int:
        return len(self.colors)

    def __getitem__(self, idx: int) -> tuple[int, int, int]:
        return self.colors[idx]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.colors, dtype=np.uint8)


@dataclass(frozen=True)
class Frame:
    """A 160x210 palette-indexed raster (one byte per pixel, row-major)."""

    pixels: np.ndarray = field(repr=False)
    palette_id: str

    def __post_init__(self) -> None:
        if self.pixels.shape != (FRAME_HEIGHT, FRAME_WIDTH) or self.pixels.dtype != np.uint8:
            raise MalformedFrameError(
                f"expected uint8 ({FRAME_HEIGHT}, {FRAME_WIDTH}) raster, got "
                f"{self.pixels.dtype} {self.pixels.shape}"
            )
        self.pixels.flags.writeable = False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.palette_id == other.palette_id and np.array_equal(self.pixels, other.pixels)

    def __hash__(self) -> int:
        return hash((self.palette_id, self.pixels.tobytes()))


def to_rgb(frame: Frame, palette: Palette) -> np.ndarray:
    """Expand a palette-indexed frame to a 210x160x3 uint8 RGB raster."""
    if int(frame.pixels.max(initial=0)) >= len(palette):
        raise MalformedFrameError(
            f"pixel index {int(frame.pixels.max())} outside palette of size {len(palette)}"
        )
    return palette.as_array()[frame.pixels]


def quantize(rgb: np.ndarray, palette: Palette) -> Frame:
    """Inverse of to_rgb for rasters that only contain palette colors."""
    lut = {color: i for i, color in enumerate(palette.colors)}
    flat = rgb.reshape(-1, 3)
    out = np.empty(flat.shape[0], dtype=np.uint8)
    for i, px in enumerate(map(tuple, flat)):
        try:
            out[i] = lut[px]
        except KeyError:
            raise MalformedFrameError(f"color {px} not in palette {palette.palette_id}") from None
    return Frame(out.reshape(FRAME_HEIGHT, FRAME_WIDTH), palette.palette_id)


def same_geometry(a: Sequence[GameObject], b: Sequence[GameObject]) -> bool:
    """Category/box/color/HUD equality, ignoring value, orientation and track ids.

    Vision extraction cannot read values off the screen, so comparisons against
    it use this weaker notion of equality.
    """
    key = lambda o: (o.category, o.x, o.y, o.w, o.h, o.rgb, o.hud)
    return sorted(map(key, a)) == sorted(map(key, b))
