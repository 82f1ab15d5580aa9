"""Object-list comparison and speed benchmarking.

Two object lists for the same frame are matched per category at a 5-pixel
center tolerance; precision/recall/F1 are aggregated per category over an
episode and macro-averaged. All distance and IOU arithmetic is exact
(doubled integer coordinates and rational IOU), so the perfect-agreement
case scores exactly 1.0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import console as console_mod
from .agents import Agent, make_agent
from .model import GameObject, ObjectList, iou
from .rem import extract_rem
from .rng import derive_seed
from .vem import extract_vem

TOLERANCE_PX = 5

# quirk event kinds as they appear in attribution, mapped to mismatch sides
_REM_EXTRA, _VEM_EXTRA, _SHIFTED = "rem_extra", "vem_extra", "shifted"


@dataclass(frozen=True)
class MatchedPair:
    ref_index: int
    cand_index: int
    distance_sq4: int  # squared center distance in quarter-pixel^2 units
    iou: Fraction


@dataclass(frozen=True)
class Matching:
    """One-to-one per-category matching between a reference and a candidate list."""

    pairs: tuple[MatchedPair, ...]
    unmatched_reference: tuple[int, ...]
    unmatched_candidate: tuple[int, ...]


def _center2(obj: GameObject) -> tuple[int, int]:
    # doubled coordinates keep the 5 px radius check in integers (d^2 <= 100)
    return (2 * obj.x + obj.w, 2 * obj.y + obj.h)


def match_objects(reference: ObjectList, candidate: ObjectList,
                  tolerance_px: int = TOLERANCE_PX) -> Matching:
    """Greedy per-category matching in ascending center-distance order.

    Ties break on (reference y, reference x), then candidate order. Pairs
    farther apart than the tolerance never match. A follow-up augmenting
    pass re-pairs crossed-distance configurations so the matching always
    reaches maximum cardinality; outside those rare cases it is identical
    to the plain greedy result.
    """
    limit = (2 * tolerance_px) ** 2
    pairs: list[MatchedPair] = []
    matched_ref: set[int] = set()
    matched_cand: set[int] = set()
    categories = {o.category for o in reference} | {o.category for o in candidate}
    for cat in sorted(categories):
        ref_idx = [i for i, o in enumerate(reference.objects) if o.category == cat]
        cand_idx = [j for j, o in enumerate(candidate.objects) if o.category == cat]
        d2_of: dict[tuple[int, int], int] = {}
        adj: dict[int, list[int]] = {i: [] for i in ref_idx}
        edges = []
        for i in ref_idx:
            rx, ry = _center2(reference.objects[i])
            for j in cand_idx:
                cx, cy = _center2(candidate.objects[j])
                d2 = (rx - cx) ** 2 + (ry - cy) ** 2
                if d2 <= limit:
                    ro = reference.objects[i]
                    edges.append((d2, ro.y, ro.x, i, j))
                    d2_of[(i, j)] = d2
                    adj[i].append(j)
        edges.sort()
        for i in ref_idx:
            adj[i].sort(key=lambda j: (d2_of[(i, j)], j))
        match_of_cand: dict[int, int] = {}
        for d2, _y, _x, i, j in edges:
            if i in matched_ref or j in match_of_cand:
                continue
            matched_ref.add(i)
            match_of_cand[j] = i

        def augment(i: int, seen: set[int]) -> bool:
            for j in adj[i]:
                if j in seen:
                    continue
                seen.add(j)
                if j not in match_of_cand or augment(match_of_cand[j], seen):
                    match_of_cand[j] = i
                    return True
            return False

        for i in ref_idx:
            if i not in matched_ref and augment(i, set()):
                matched_ref.add(i)
        cat_pairs = []
        for j, i in match_of_cand.items():
            d2 = d2_of[(i, j)]
            ro = reference.objects[i]
            cat_pairs.append((d2, ro.y, ro.x, i, j))
        for d2, _y, _x, i, j in sorted(cat_pairs):
            matched_cand.add(j)
            pairs.append(MatchedPair(i, j, d2,
                                     iou(reference.objects[i], candidate.objects[j])))
    return Matching(
        tuple(pairs),
        tuple(i for i in range(len(reference.objects)) if i not in matched_ref),
        tuple(j for j in range(len(candidate.objects)) if j not in matched_cand),
    )


@dataclass(frozen=True)
class CategoryScore:
    tp: int
    fp: int
    fn: int
    iou_sum: Fraction
    in_reference: bool

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def mean_iou(self) -> Optional[float]:
        return float(self.iou_sum / self.tp) if self.tp else None


@dataclass(frozen=True)
class MismatchRecord:
    frame_index: int
    category: str
    side: str  # rem_extra | vem_extra | shifted
    box: tuple[int, int, int, int]
    attributed_to: Optional[str]  # quirk kind, None when unexplained


@dataclass(frozen=True)
class ComparisonReport:
    """Aggregated VEM-as-reference vs REM-as-candidate scores for one episode.

    IOU is averaged over matched pairs only; unmatched objects lower
    precision/recall but never the IOU column.
    """

    game_id: str
    frames: int
    seed: int
    per_category: dict[str, CategoryScore]
    mismatches: tuple[MismatchRecord, ...] = ()

    @property
    def macro_precision(self) -> float:
        return self._macro("precision")

    @property
    def macro_recall(self) -> float:
        return self._macro("recall")

    @property
    def macro_f1(self) -> float:
        return self._macro("f1")

    @property
    def mean_iou(self) -> float:
        tp = sum(s.tp for s in self.per_category.values())
        total = sum((s.iou_sum for s in self.per_category.values()), Fraction(0))
        return float(total / tp) if tp else 0.0

    def _macro(self, attr: str) -> float:
        scores = [getattr(s, attr) for s in self.per_category.values() if s.in_reference]
        return sum(scores) / len(scores) if scores else 0.0

    @property
    def unattributed(self) -> tuple[MismatchRecord, ...]:
        return tuple(m for m in self.mismatches if m.attributed_to is None)

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id,
            "frames": self.frames,
            "seed": self.seed,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "mean_iou": self.mean_iou,
            "mismatch_count": len(self.mismatches),
            "unattributed_count": len(self.unattributed),
            "per_category": {
                name: {
                    "tp": s.tp, "fp": s.fp, "fn": s.fn,
                    "precision": s.precision, "recall": s.recall, "f1": s.f1,
                    "mean_iou": s.mean_iou,
                }
                for name, s in sorted(self.per_category.items())
            },
            "mismatches": [
                {
                    "frame": m.frame_index, "category": m.category, "side": m.side,
                    "box": list(m.box), "attributed_to": m.attributed_to,
                }
                for m in self.mismatches
            ],
        }


def detection_metrics(game_id: str, frames: int, seed: int,
                      per_frame: list[tuple[ObjectList, ObjectList, Matching, list]],
                      ) -> ComparisonReport:
    """Fold per-frame matchings into a ComparisonReport with mismatch attribution."""
    tally: dict[str, list] = {}  # category -> [tp, fp, fn, iou_sum, in_reference]
    mismatches: list[MismatchRecord] = []
    for reference, candidate, matching, events in per_frame:
        for obj in reference:
            tally.setdefault(obj.category, [0, 0, 0, Fraction(0), False])[4] = True
        for pair in matching.pairs:
            cat = reference.objects[pair.ref_index].category
            row = tally.setdefault(cat, [0, 0, 0, Fraction(0), False])
            row[0] += 1
            row[3] += pair.iou
            if pair.iou != 1:
                mismatches.append(_attribute(
                    reference.frame_index, cat, _SHIFTED,
                    candidate.objects[pair.cand_index].box, events))
        for i in matching.unmatched_reference:
            obj = reference.objects[i]
            row = tally.setdefault(obj.category, [0, 0, 0, Fraction(0), False])
            row[2] += 1
            mismatches.append(_attribute(
                reference.frame_index, obj.category, _VEM_EXTRA, obj.box, events))
        for j in matching.unmatched_candidate:
            obj = candidate.objects[j]
            row = tally.setdefault(obj.category, [0, 0, 0, Fraction(0), False])
            row[1] += 1
            mismatches.append(_attribute(
                reference.frame_index, obj.category, _REM_EXTRA, obj.box, events))
    per_category = {
        cat: CategoryScore(tp, fp, fn, iou_sum, in_ref)
        for cat, (tp, fp, fn, iou_sum, in_ref) in tally.items()
    }
    return ComparisonReport(game_id, frames, seed, per_category, tuple(mismatches))


def _overlaps(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    return a[0] < b[0] + b[2] and b[0] < a[0] + a[2] and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]


def _attribute(frame_index: int, category: str, side: str,
               box: tuple[int, int, int, int], events: list) -> MismatchRecord:
    """Map one mismatch to the quirk event that explains it, if any."""
    attributed = None
    for ev in events:
        if ev.kind == "freeze":
            # a replayed frame desynchronizes VEM from RAM wholesale
            attributed = "freeze"
            break
        if ev.kind == "blink" and side == _REM_EXTRA and ev.category == category:
            attributed = "blink"
            break
        if (ev.kind == "particle" and side == _VEM_EXTRA
                and ev.box is not None and _overlaps(box, ev.box)):
            attributed = "particle"
            break
        if (ev.kind in ("size_jitter", "sprite_shrink", "render_offset")
                and side == _SHIFTED and ev.category == category):
            attributed = ev.kind
            break
    return MismatchRecord(frame_index, category, side, box, attributed)


def run_comparison(game_id: str, agent_kind: str = "random", frames: int = 500,
                   seed: int = 0, quirks: bool = True) -> ComparisonReport:
    """Roll out until `frames` frames are collected, comparing REM against VEM.

    VEM is the reference list, REM the candidate. Terminated episodes restart
    with a derived seed so the frame budget is always met.
    """
    per_frame = []
    episode = 0
    con = console_mod.create(game_id, seed, enable_quirks=quirks)
    agent: Agent = make_agent(agent_kind, game_id, seed)
    while len(per_frame) < frames:
        if con.terminated:
            episode += 1
            con = console_mod.create(game_id, derive_seed(seed, episode),
                                     enable_quirks=quirks)
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec, con.frame_counter)
        con.tick(agent.act(rem))
        frame = con.render()
        events = list(con.last_quirk_events)
        vem = extract_vem(frame, con.cartridge.vision_spec, con.cartridge.palette,
                          con.frame_counter)
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec, con.frame_counter)
        per_frame.append((vem, rem, match_objects(vem, rem), events))
    return detection_metrics(game_id, frames, seed, per_frame)


@dataclass(frozen=True)
class BenchResult:
    game_id: str
    steps: int
    seed: int
    t_rem: float
    t_vem: float

    @property
    def ratio(self) -> float:
        return self.t_vem / self.t_rem if self.t_rem else float("inf")

    def to_dict(self) -> dict:
        return {"game_id": self.game_id, "steps": self.steps, "seed": self.seed,
                "t_rem": self.t_rem, "t_vem": self.t_vem, "ratio": self.ratio}


def bench_speed(game_id: str, steps: int = 10_000, seed: int = 0) -> BenchResult:
    """Time REM-only vs VEM-only extraction over identical seeded rollouts.

    The REM path never renders a frame; the VEM path renders and segments
    every frame. Actions come from a pre-drawn random sequence so both timed
    loops replay the exact same episode.
    """
    cart = console_mod.get_cartridge(game_id)
    agent = make_agent("random", game_id, seed)
    actions = [agent.act(ObjectList(())) for _ in range(steps)]

    def rollout_rem() -> float:
        con = console_mod.create(game_id, seed, enable_quirks=False)
        start = time.perf_counter()
        for a in actions:
            if con.terminated:
                con = console_mod.create(game_id, derive_seed(seed, con.frame_counter),
                                         enable_quirks=False)
            con.tick(a)
            extract_rem(bytes(con.ram), cart.decoder_spec, con.frame_counter)
        return time.perf_counter() - start

    def rollout_vem() -> float:
        con = console_mod.create(game_id, seed, enable_quirks=False)
        start = time.perf_counter()
        for a in actions:
            if con.terminated:
                con = console_mod.create(game_id, derive_seed(seed, con.frame_counter),
                                         enable_quirks=False)
            con.tick(a)
            extract_vem(con.render(), cart.vision_spec, cart.palette, con.frame_counter)
        return time.perf_counter() - start

    return BenchResult(game_id, steps, seed, rollout_rem(), rollout_vem())


def format_report(report: ComparisonReport) -> str:
    """Human-readable table; IOU column covers matched pairs only."""
    lines = [
        f"game {report.game_id}  frames {report.frames}  seed {report.seed}",
        f"{'category':<14} {'prec':>6} {'rec':>6} {'f1':>6} {'iou':>6} {'tp':>5} {'fp':>4} {'fn':>4}",
    ]
    for name, s in sorted(report.per_category.items()):
        iou_s = f"{s.mean_iou:.3f}" if s.mean_iou is not None else "  -  "
        lines.append(
            f"{name:<14} {s.precision:>6.3f} {s.recall:>6.3f} {s.f1:>6.3f} "
            f"{iou_s:>6} {s.tp:>5} {s.fp:>4} {s.fn:>4}")
    lines.append(
        f"{'macro':<14} {report.macro_precision:>6.3f} {report.macro_recall:>6.3f} "
        f"{report.macro_f1:>6.3f} {report.mean_iou:>6.3f}")
    lines.append(
        f"mismatches {len(report.mismatches)}  unattributed {len(report.unattributed)}")
    return "\n".join(lines)
