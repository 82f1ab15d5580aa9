"""Vision extraction tests, anchored by a brute-force flood-fill oracle."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ramvision.model import FRAME_HEIGHT, FRAME_WIDTH, Frame, Palette
from ramvision.vem import (
    Region,
    VemDiagnostics,
    VisionRule,
    VisionSpec,
    extract_vem,
    find_components,
)

PALETTE = Palette("test", ((0, 0, 0), (255, 0, 0), (0, 255, 0), (0, 0, 255)))


def make_frame(sparse: dict[tuple[int, int], int] | None = None) -> Frame:
    px = np.zeros((FRAME_HEIGHT, FRAME_WIDTH), dtype=np.uint8)
    for (y, x), c in (sparse or {}).items():
        px[y, x] = c
    return Frame(px, "test")


def flood_fill_boxes(pixels: np.ndarray, colors: set[int]) -> list[tuple[int, int, int, int]]:
    """Independent 8-connected component oracle (stack-based flood fill)."""
    mask = np.isin(pixels, list(colors))
    seen = np.zeros_like(mask)
    boxes = []
    h, w = mask.shape
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or seen[y, x]:
                continue
            stack = [(y, x)]
            seen[y, x] = True
            ys, xs = [], []
            while stack:
                cy, cx = stack.pop()
                ys.append(cy)
                xs.append(cx)
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
            boxes.append((min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1))
    boxes.sort(key=lambda b: (b[1], b[0]))
    return boxes


class TestFindComponents:
    def test_blank_frame(self):
        assert find_components(make_frame(), {1}) == []

    def test_two_disjoint_blobs(self):
        frame = make_frame({(10, 10): 1, (10, 11): 1, (11, 10): 1, (11, 11): 1,
                            (50, 50): 1, (50, 51): 1, (51, 50): 1, (51, 51): 1})
        assert find_components(frame, {1}) == [(10, 10, 2, 2), (50, 50, 2, 2)]

    def test_l_shape_tight_bounds(self):
        cells = {(y, 5): 1 for y in range(20, 28)} | {(27, x): 1 for x in range(5, 12)}
        frame = make_frame(cells)
        assert find_components(frame, {1}) == [(5, 20, 7, 8)]

    def test_diagonal_is_connected(self):
        frame = make_frame({(10, 10): 1, (11, 11): 1, (12, 12): 1})
        assert find_components(frame, {1}) == [(10, 10, 3, 3)]

    def test_region_clipping(self):
        frame = make_frame({(10, 10): 1, (100, 100): 1})
        assert find_components(frame, {1}, Region(0, 0, 160, 50)) == [(10, 10, 1, 1)]

    @settings(max_examples=60, deadline=None)
    @given(st.lists(
        st.tuples(st.integers(0, 38), st.integers(0, 38),
                  st.integers(1, 6), st.integers(1, 6), st.integers(1, 3)),
        max_size=10))
    def test_matches_flood_fill_oracle(self, rects):
        px = np.zeros((FRAME_HEIGHT, FRAME_WIDTH), dtype=np.uint8)
        for x, y, w, h, c in rects:
            px[y:y + h, x:x + w] = c
        frame = Frame(px, "test")
        for colors in ({1}, {2}, {1, 3}):
            assert find_components(frame, colors) == flood_fill_boxes(px, colors)


class TestVisionSpec:
    def test_conflicting_rules_rejected(self):
        with pytest.raises(ValueError):
            VisionSpec("g", (
                VisionRule("a", frozenset({1}), Region(0, 0, 100, 100)),
                VisionRule("b", frozenset({1}), Region(50, 50, 160, 210)),
            ))

    def test_disjoint_regions_allowed(self):
        VisionSpec("g", (
            VisionRule("a", frozenset({1}), Region(0, 0, 160, 20)),
            VisionRule("b", frozenset({1}), Region(0, 20, 160, 210)),
        ))

    def test_distinct_priorities_allowed(self):
        VisionSpec("g", (
            VisionRule("a", frozenset({1}), priority=0),
            VisionRule("b", frozenset({1}), priority=1),
        ))

    def test_to_dict_is_serializable(self):
        import json
        spec = VisionSpec("g", (VisionRule("a", frozenset({1, 2})),))
        json.dumps(spec.to_dict())


class TestExtractVem:
    def test_priority_claims_pixels_once(self):
        frame = make_frame({(30, 30): 1, (30, 31): 1})
        spec = VisionSpec("g", (
            VisionRule("first", frozenset({1}), priority=0),
            VisionRule("second", frozenset({1}), priority=1),
        ))
        objs = extract_vem(frame, spec, PALETTE)
        assert [o.category for o in objs] == ["first"]

    def test_merge_fuses_digit_groups(self):
        frame = make_frame({(5, 10): 1, (5, 20): 1})
        spec = VisionSpec("g", (VisionRule("Score", frozenset({1}), merge=True),))
        objs = extract_vem(frame, spec, PALETTE)
        assert [o.box for o in objs] == [(10, 5, 11, 1)]

    def test_size_bounds_drop_and_tally(self):
        frame = make_frame({(30, 30): 1})
        spec = VisionSpec("g", (VisionRule("big", frozenset({1}), min_size=(3, 3)),))
        diag = VemDiagnostics()
        objs = extract_vem(frame, spec, PALETTE, diagnostics=diag)
        assert len(objs) == 0
        assert diag.dropped_by_size == 1
        assert diag.dropped_by_category == {"big": 1}

    def test_objects_carry_palette_color_and_hud(self):
        frame = make_frame({(5, 5): 2})
        spec = VisionSpec("g", (VisionRule("Lives", frozenset({2}), hud=True),))
        obj = extract_vem(frame, spec, PALETTE).objects[0]
        assert obj.rgb == (0, 255, 0)
        assert obj.hud

    def test_equal_priority_order_permutation_invariant(self):
        frame = make_frame({(5, 5): 1, (100, 100): 2})
        rules = (
            VisionRule("a", frozenset({1}), Region(0, 0, 160, 20)),
            VisionRule("b", frozenset({2}), Region(0, 20, 160, 210)),
        )
        fwd = extract_vem(frame, VisionSpec("g", rules), PALETTE)
        rev = extract_vem(frame, VisionSpec("g", rules[::-1]), PALETTE)
        assert set(fwd.objects) == set(rev.objects)

    def test_visibility_soundness_on_real_frames(self):
        import ramvision as rv
        con = rv.create("invaders", seed=6)
        for _ in range(50):
            con.tick(3)
            frame = con.render()
            for o in rv.extract_vem(frame, con.cartridge.vision_spec,
                                    con.cartridge.palette):
                window = frame.pixels[o.y:o.y + o.h, o.x:o.x + o.w]
                assert window.any(), f"{o.category} box has no colored pixel"
