"""RAM extraction: decode the object state straight from console memory.

A decoder spec is declarative data; every supported byte-to-pixel scheme the
built-in cartridges use (direct coordinates, fixed render offsets, bitmap
grids hanging off an anchor, categorical floor anchors with a fine offset)
is one entry kind here. Extraction never looks at rendered frames, so hidden
or blinking objects are always reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .model import FRAME_HEIGHT, FRAME_WIDTH, GameObject, ObjectList, center


class DecoderConfigError(ValueError):
    """Malformed decoder spec (dangling byte reference, bad table)."""


def _clipped(category, x, y, w, h, color, hud=False, value=None) -> list[GameObject]:
    """Clip a decoded box to the frame; empty when fully off-screen.

    Poked RAM can push positions past the frame edge; the decoded object
    mirrors what the render rule would show (a clipped sprite).
    """
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, FRAME_WIDTH), min(y + h, FRAME_HEIGHT)
    if x0 >= x1 or y0 >= y1:
        return []
    return [GameObject(category, x0, y0, x1 - x0, y1 - y0, color, hud=hud, value=value)]


@dataclass(frozen=True)
class Presence:
    """When a decoded object exists: always, a flag bit, or a nonzero byte."""

    kind: str  # "always" | "flag" | "nonzero"
    byte: Optional[int] = None
    bit: Optional[int] = None

    def holds(self, ram: bytes) -> bool:
        if self.kind == "always":
            return True
        if self.kind == "flag":
            return bool(ram[self.byte] >> self.bit & 1)
        return ram[self.byte] != 0


@dataclass(frozen=True)
class ValueRule:
    """Displayed value as a weighted byte sum (multi-byte scores)."""

    bytes: tuple[int, ...]
    weights: tuple[int, ...]

    def read(self, ram: bytes) -> int:
        return sum(ram[b] * w for b, w in zip(self.bytes, self.weights))


@dataclass(frozen=True)
class DirectEntry:
    """x/y read from single bytes (or constants) with mask and additive offset."""

    category: str
    w: int
    h: int
    color: tuple[int, int, int]
    x_byte: Optional[int] = None
    x_const: int = 0
    x_mask: int = 0xFF
    x_add: int = 0
    y_byte: Optional[int] = None
    y_const: int = 0
    y_mask: int = 0xFF
    y_add: int = 0
    w_byte: Optional[int] = None
    w_scale: int = 1
    presence: Presence = Presence("always")
    hud: bool = False
    value: Optional[ValueRule] = None

    def decode(self, ram: bytes) -> list[GameObject]:
        if not self.presence.holds(ram):
            return []
        x = (ram[self.x_byte] & self.x_mask if self.x_byte is not None else self.x_const) + self.x_add
        y = (ram[self.y_byte] & self.y_mask if self.y_byte is not None else self.y_const) + self.y_add
        w = ram[self.w_byte] * self.w_scale if self.w_byte is not None else self.w
        if w == 0:
            return []
        val = self.value.read(ram) if self.value is not None else None
        return _clipped(self.category, x, y, w, self.h, self.color, hud=self.hud, value=val)


@dataclass(frozen=True)
class BitmapGridEntry:
    """One object per set bit; cell position hangs off anchor bytes by stride."""

    category: str
    w: int
    h: int
    color: tuple[int, int, int]
    bitmap_bytes: tuple[int, ...]  # one byte per row
    cols: int
    anchor_x_byte: int
    anchor_y_byte: int
    stride_x: int
    stride_y: int
    hud: bool = False

    def decode(self, ram: bytes) -> list[GameObject]:
        ax, ay = ram[self.anchor_x_byte], ram[self.anchor_y_byte]
        out = []
        for row, addr in enumerate(self.bitmap_bytes):
            bits = ram[addr]
            for col in range(self.cols):
                if bits >> col & 1:
                    out.extend(_clipped(
                        self.category,
                        ax + self.stride_x * col,
                        ay + self.stride_y * row,
                        self.w, self.h, self.color,
                    ))
        return out


@dataclass(frozen=True)
class CategoricalEntry:
    """y from a categorical anchor table minus a fine offset byte."""

    category: str
    w: int
    h: int
    color: tuple[int, int, int]
    x_byte: int
    index_byte: int
    anchor_table: tuple[int, ...]
    fine_byte: Optional[int]
    base_offset: int  # y = anchor_table[index & mask] + base_offset - fine
    index_mask: int = 0xFF
    presence: Presence = Presence("always")
    hud: bool = False

    def decode(self, ram: bytes) -> list[GameObject]:
        if not self.presence.holds(ram):
            return []
        idx = ram[self.index_byte] & self.index_mask
        if idx >= len(self.anchor_table):
            return []
        fine = ram[self.fine_byte] if self.fine_byte is not None else 0
        y = self.anchor_table[idx] + self.base_offset - fine
        return _clipped(self.category, ram[self.x_byte], y, self.w, self.h, self.color,
                        hud=self.hud)


DecoderEntry = Union[DirectEntry, BitmapGridEntry, CategoricalEntry]


@dataclass(frozen=True)
class DecoderSpec:
    game_id: str
    entries: tuple[DecoderEntry, ...]

    def __post_init__(self) -> None:
        categories = set()
        for e in self.entries:
            categories.add(e.category)
            for addr in _referenced_bytes(e):
                if not 0 <= addr < 128:
                    raise DecoderConfigError(f"{e.category}: byte reference {addr} outside RAM")

    def to_dict(self) -> dict:
        entries = []
        for e in self.entries:
            d = {"kind": type(e).__name__, "category": e.category}
            d["bytes"] = sorted(_referenced_bytes(e))
            entries.append(d)
        return {"game_id": self.game_id, "entries": entries}


def _referenced_bytes(e: DecoderEntry) -> set[int]:
    refs: set[int] = set()
    if isinstance(e, DirectEntry):
        for b in (e.x_byte, e.y_byte, e.w_byte, e.presence.byte):
            if b is not None:
                refs.add(b)
        if e.value is not None:
            refs.update(e.value.bytes)
    elif isinstance(e, BitmapGridEntry):
        refs.update(e.bitmap_bytes)
        refs.update((e.anchor_x_byte, e.anchor_y_byte))
    else:
        refs.update((e.x_byte, e.index_byte))
        for b in (e.fine_byte, e.presence.byte):
            if b is not None:
                refs.add(b)
    return refs


def extract_rem(ram: bytes, spec: DecoderSpec, frame_index: int = 0) -> ObjectList:
    """Decode all present objects from a 128-byte RAM state."""
    objects: list[GameObject] = []
    for entry in spec.entries:
        objects.extend(entry.decode(ram))
    return ObjectList(tuple(objects), frame_index)


# --- tracking -------------------------------------------------------------

MAX_TRACK_DISPLACEMENT = 12  # px, center distance gate for re-identification
RETIRE_AFTER_ABSENT = 8  # ticks a track survives without a detection


@dataclass
class _Track:
    track_id: int
    cx: Fraction
    cy: Fraction
    absent: int = 0


class Tracker:
    """Stable per-category identities via greedy nearest-center assignment.

    Unmatched detections get fresh ids; a track missing for more than
    RETIRE_AFTER_ABSENT consecutive ticks retires and its id is never reused.
    """

    def __init__(self) -> None:
        self._tracks: dict[str, list[_Track]] = {}
        self._next_id = 0

    def update(self, current: ObjectList) -> ObjectList:
        out: list[GameObject] = []
        by_cat: dict[str, list[int]] = {}
        for i, obj in enumerate(current):
            by_cat.setdefault(obj.category, []).append(i)
        assigned: dict[int, int] = {}

        for cat, indices in by_cat.items():
            tracks = self._tracks.setdefault(cat, [])
            pairs = []
            for ti, tr in enumerate(tracks):
                for oi in indices:
                    cx, cy = center(current.objects[oi])
                    d2 = (cx - tr.cx) ** 2 + (cy - tr.cy) ** 2
                    if d2 <= MAX_TRACK_DISPLACEMENT ** 2:
                        pairs.append((d2, tr.track_id, oi, ti))
            pairs.sort()
            used_tracks: set[int] = set()
            used_objs: set[int] = set()
            for d2, _tid, oi, ti in pairs:
                if ti in used_tracks or oi in used_objs:
                    continue
                used_tracks.add(ti)
                used_objs.add(oi)
                tr = tracks[ti]
                cx, cy = center(current.objects[oi])
                tr.cx, tr.cy, tr.absent = cx, cy, 0
                assigned[oi] = tr.track_id
            for ti, tr in enumerate(tracks):
                if ti not in used_tracks:
                    tr.absent += 1
            self._tracks[cat] = [t for t in tracks if t.absent <= RETIRE_AFTER_ABSENT]
            for oi in indices:
                if oi not in used_objs:
                    cx, cy = center(current.objects[oi])
                    tid = self._next_id
                    self._next_id += 1
                    self._tracks[cat].append(_Track(tid, cx, cy))
                    assigned[oi] = tid

        # age categories with no detections this tick
        for cat, tracks in self._tracks.items():
            if cat not in by_cat:
                for tr in tracks:
                    tr.absent += 1
                self._tracks[cat] = [t for t in tracks if t.absent <= RETIRE_AFTER_ABSENT]

        for i, obj in enumerate(current):
            out.append(obj.with_track_id(assigned[i]))
        return ObjectList(tuple(out), current.frame_index)
