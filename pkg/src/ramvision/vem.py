"""Vision extraction: recover objects from a rendered frame.

Per-game declarative rules filter the indexed frame by palette color inside a
search region, group matching pixels into 8-connected components, and claim
pixels in priority order so overlapping rules cannot double-report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .model import FRAME_HEIGHT, FRAME_WIDTH, Frame, GameObject, ObjectList, Palette

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Region:
    """Half-open pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int = 0
    y0: int = 0
    x1: int = FRAME_WIDTH
    y1: int = FRAME_HEIGHT

    def __post_init__(self) -> None:
        if not (0 <= self.x0 < self.x1 <= FRAME_WIDTH and 0 <= self.y0 < self.y1 <= FRAME_HEIGHT):
            raise ValueError(f"region {self} outside frame")


@dataclass(frozen=True)
class VisionRule:
    """One extraction rule: which colors, where, what sizes, which category."""

    category: str
    colors: frozenset[int]
    region: Region = Region()
    min_size: tuple[int, int] = (1, 1)
    max_size: tuple[int, int] = (FRAME_WIDTH, FRAME_HEIGHT)
    hud: bool = False
    priority: int = 0
    merge: bool = False  # fuse all matched components into one box (digit groups)


@dataclass(frozen=True)
class VisionSpec:
    game_id: str
    rules: tuple[VisionRule, ...]

    def __post_init__(self) -> None:
        for i, a in enumerate(self.rules):
            for b in self.rules[i + 1:]:
                if a.colors & b.colors and a.priority == b.priority:
                    disjoint = (
                        a.region.x1 <= b.region.x0 or b.region.x1 <= a.region.x0
                        or a.region.y1 <= b.region.y0 or b.region.y1 <= a.region.y0
                    )
                    if not disjoint:
                        raise ValueError(
                            f"rules {a.category}/{b.category} share colors with overlapping "
                            "regions and equal priority"
                        )

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id,
            "rules": [
                {
                    "category": r.category,
                    "colors": sorted(r.colors),
                    "region": [r.region.x0, r.region.y0, r.region.x1, r.region.y1],
                    "min_size": list(r.min_size),
                    "max_size": list(r.max_size),
                    "hud": r.hud,
                    "priority": r.priority,
                    "merge": r.merge,
                }
                for r in self.rules
            ],
        }


@dataclass
class VemDiagnostics:
    """Tally of blobs seen but not turned into objects."""

    dropped_by_size: int = 0
    dropped_by_category: dict[str, int] = field(default_factory=dict)

    def record_drop(self, category: str, n: int = 1) -> None:
        self.dropped_by_size += n
        self.dropped_by_category[category] = self.dropped_by_category.get(category, 0) + n


def find_components(
    frame: Frame,
    colors: frozenset[int] | set[int],
    region: Region = Region(),
    claimed: Optional[np.ndarray] = None,
) -> list[tuple[int, int, int, int]]:
    """Tight bounding boxes of 8-connected same-colored pixel groups.

    Returns (x, y, w, h) boxes in ascending (y, x) order of their top-left
    corner. Pixels marked in `claimed` are invisible to this call.
    """
    window = frame.pixels[region.y0:region.y1, region.x0:region.x1]
    mask = np.isin(window, list(colors))
    if claimed is not None:
        mask &= ~claimed[region.y0:region.y1, region.x0:region.x1]
    if not mask.any():
        return []
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    boxes = []
    for sl in ndimage.find_objects(labels, max_label=n):
        if sl is None:
            continue
        ys, xs = sl
        boxes.append((
            region.x0 + xs.start,
            region.y0 + ys.start,
            xs.stop - xs.start,
            ys.stop - ys.start,
        ))
    boxes.sort(key=lambda b: (b[1], b[0]))
    return boxes


def extract_vem(
    frame: Frame,
    spec: VisionSpec,
    palette: Palette,
    frame_index: int = 0,
    diagnostics: Optional[VemDiagnostics] = None,
) -> ObjectList:
    """Run all vision rules against a frame and return the detected objects.

    Rules claim pixels in ascending priority order (declaration order breaks
    ties only between rules that can never interact, see VisionSpec). Boxes
    outside a rule's size bounds are dropped and tallied.
    """
    claimed = np.zeros_like(frame.pixels, dtype=bool)
    objects: list[GameObject] = []
    order = sorted(range(len(spec.rules)), key=lambda i: (spec.rules[i].priority, i))
    for idx in order:
        rule = spec.rules[idx]
        boxes = find_components(frame, rule.colors, rule.region, claimed)
        if not boxes:
            continue
        region = rule.region
        window = frame.pixels[region.y0:region.y1, region.x0:region.x1]
        newly = np.isin(window, list(rule.colors)) & ~claimed[region.y0:region.y1, region.x0:region.x1]
        claimed[region.y0:region.y1, region.x0:region.x1] |= newly
        if rule.merge:
            x0 = min(b[0] for b in boxes)
            y0 = min(b[1] for b in boxes)
            x1 = max(b[0] + b[2] for b in boxes)
            y1 = max(b[1] + b[3] for b in boxes)
            boxes = [(x0, y0, x1 - x0, y1 - y0)]
        rgb = palette[min(rule.colors)]
        for (x, y, w, h) in boxes:
            if not (rule.min_size[0] <= w <= rule.max_size[0]
                    and rule.min_size[1] <= h <= rule.max_size[1]):
                if diagnostics is not None:
                    diagnostics.record_drop(rule.category)
                continue
            objects.append(GameObject(rule.category, x, y, w, h, rgb, hud=rule.hud))
    return ObjectList(tuple(objects), frame_index)
