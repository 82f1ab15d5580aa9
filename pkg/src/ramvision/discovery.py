"""RAM annotation tooling: correlate VEM-observed properties against RAM
bytes, fit affine decodes, and probe bytes by mutation with frame diffing.

Correlation alone is fragile when render quirks desynchronize the screen
from RAM for short windows (freeze replay, blinking), so candidate pairs get
an exact consensus fit: if a single affine line passes through at least 60%
of the samples exactly, that line is reported with rational-precision
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import console as console_mod
from .agents import make_agent
from .model import ObjectList
from .rem import extract_rem
from .rng import derive_seed
from .vem import extract_vem

PROPS = ("x", "y", "w", "h", "visible")
MIN_SUPPORT = 50
R_THRESHOLD = 0.95
CONSENSUS_FRACTION = 0.6
PROBE_VALUES = (0, 1, 64, 128, 255)


@dataclass(frozen=True)
class TraceSet:
    """Aligned per-frame RAM states and VEM property series.

    Property series are keyed (category, prop) and carry NaN on frames where
    the category was not observed as exactly one instance; ambiguous
    multi-instance frames contribute nothing.
    """

    game_id: str
    frames: int
    seed: int
    ram: np.ndarray  # frames x 128, uint8
    series: dict[tuple[str, str], np.ndarray]  # float64, NaN gaps


@dataclass(frozen=True)
class CorrelationFinding:
    byte: int
    category: str
    prop: str
    r: float
    a: float
    b: float
    residual: float  # mean absolute residual over supporting samples
    support: int
    consensus: bool  # fit came from the exact-consensus path

    def to_dict(self) -> dict:
        return {"byte": self.byte, "category": self.category, "prop": self.prop,
                "r": self.r, "a": self.a, "b": self.b, "residual": self.residual,
                "support": self.support, "consensus": self.consensus}


@dataclass(frozen=True)
class ProbeDiff:
    value: int
    pixel_count: int
    bounds: Optional[tuple[int, int, int, int]]  # diff bbox, None when clean


@dataclass(frozen=True)
class ProbeFinding:
    byte: int
    diffs: tuple[ProbeDiff, ...]

    @property
    def render_affecting(self) -> bool:
        return any(d.pixel_count for d in self.diffs)

    def to_dict(self) -> dict:
        return {"byte": self.byte, "render_affecting": self.render_affecting,
                "diffs": [{"value": d.value, "pixels": d.pixel_count,
                           "bounds": list(d.bounds) if d.bounds else None}
                          for d in self.diffs]}


def collect_traces(game_id: str, agent_kind: str = "scripted", frames: int = 500,
                   seed: int = 0, quirks: bool = True) -> TraceSet:
    """Roll out and record RAM snapshots plus VEM property series."""
    if frames < 2:
        raise ValueError("a trace needs at least 2 frames")
    con = console_mod.create(game_id, seed, enable_quirks=quirks)
    agent = make_agent(agent_kind, game_id, seed)
    categories = tuple(c.name for c in con.cartridge.categories)
    ram_trace = np.zeros((frames, 128), dtype=np.uint8)
    series = {(c, p): np.full(frames, np.nan) for c in categories for p in PROPS}
    episode = 0
    for t in range(frames):
        if con.terminated:
            episode += 1
            con = console_mod.create(game_id, derive_seed(seed, episode),
                                     enable_quirks=quirks)
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec, con.frame_counter)
        con.tick(agent.act(rem))
        ram_trace[t] = np.frombuffer(bytes(con.ram), dtype=np.uint8)
        vem = extract_vem(con.render(), con.cartridge.vision_spec,
                          con.cartridge.palette, con.frame_counter)
        for cat in categories:
            found = vem.by_category(cat)
            series[(cat, "visible")][t] = 1.0 if found else 0.0
            if len(found) == 1:
                obj = found[0]
                series[(cat, "x")][t] = obj.x
                series[(cat, "y")][t] = obj.y
                series[(cat, "w")][t] = obj.w
                series[(cat, "h")][t] = obj.h
    return TraceSet(game_id, frames, seed, ram_trace, series)


def _exact_consensus(xs: np.ndarray, ys: np.ndarray) -> Optional[tuple[Fraction, Fraction, np.ndarray]]:
    """Best affine line passing exactly through samples; None if none reaches
    the consensus fraction. Candidate lines come from pairing the first
    sample of each distinct byte value with later distinct-valued samples."""
    xi = xs.astype(np.int64)
    yi = ys.astype(np.int64)
    if not np.allclose(ys, yi):
        return None
    order = np.argsort(xi, kind="stable")
    distinct = [order[i] for i in range(len(order))
                if i == 0 or xi[order[i]] != xi[order[i - 1]]]
    # two byte values fit any line through their clusters; demand three
    if len(distinct) < 3:
        return None
    best: Optional[tuple[int, Fraction, Fraction, np.ndarray]] = None
    # several spread anchors so one polluted sample cannot sink the vote
    picks = np.unique(np.linspace(0, len(distinct) - 1, 8).astype(int))
    for ai in picks:
        anchor = distinct[ai]
        for bi in picks:
            if bi <= ai:
                continue
            other = distinct[bi]
            a = Fraction(int(yi[other] - yi[anchor]), int(xi[other] - xi[anchor]))
            b = yi[anchor] - a * xi[anchor]
            pred = float(a) * xs + float(b)
            inliers = np.abs(ys - pred) < 1e-9
            n = int(inliers.sum())
            if best is None or n > best[0]:
                best = (n, a, b, inliers)
    n, a, b, inliers = best
    if n < max(MIN_SUPPORT, math.ceil(CONSENSUS_FRACTION * len(xs))):
        return None
    return a, b, inliers


def _pearson(xs: np.ndarray, ys: np.ndarray) -> float:
    xc, yc = xs - xs.mean(), ys - ys.mean()
    denom = math.sqrt(float((xc * xc).sum()) * float((yc * yc).sum()))
    return float((xc * yc).sum()) / denom if denom else 0.0


def correlate(traces: TraceSet, min_support: int = MIN_SUPPORT,
              r_threshold: float = R_THRESHOLD) -> list[CorrelationFinding]:
    """Affine findings for every (byte, property) pair above the gate.

    A pair qualifies by raw Pearson |r| >= threshold, or by the exact
    consensus fit when short quirk windows pollute an otherwise perfect
    relation. Output is sorted by |r| descending, then residual, then keys.
    """
    findings: list[CorrelationFinding] = []
    ram = traces.ram.astype(np.float64)
    for (cat, prop), ys_full in sorted(traces.series.items()):
        mask = ~np.isnan(ys_full)
        if int(mask.sum()) < min_support:
            continue
        ys = ys_full[mask]
        if ys.std() == 0:
            continue
        for byte in range(128):
            xs = ram[mask, byte]
            if xs.std() == 0:
                continue
            r = _pearson(xs, ys)
            consensus = _exact_consensus(xs, ys)
            if consensus is not None:
                a, b, inliers = consensus
                inlier_r = _pearson(xs[inliers], ys[inliers])
                if abs(r) < r_threshold and abs(inlier_r) < r_threshold:
                    continue
                pred = float(a) * xs + float(b)
                findings.append(CorrelationFinding(
                    byte, cat, prop, max(r, inlier_r, key=abs),
                    float(a), float(b),
                    float(np.abs(ys - pred).mean()), len(xs), True))
            elif abs(r) >= r_threshold:
                a, b = np.polyfit(xs, ys, 1)
                pred = a * xs + b
                findings.append(CorrelationFinding(
                    byte, cat, prop, r, float(a), float(b),
                    float(np.abs(ys - pred).mean()), len(xs), False))
    findings.sort(key=lambda f: (-abs(f.r), f.residual, f.byte, f.category, f.prop))
    return findings


def probe_byte(console: console_mod.Console, addr: int,
               values: tuple[int, ...] = PROBE_VALUES) -> ProbeFinding:
    """Poke each value into one byte, render, diff against baseline, restore.

    Externally pure: the console is bit-identical before and after.
    """
    if not 0 <= addr < 128:
        raise IndexError(f"RAM address {addr} out of range")
    state = console.snapshot()
    baseline = console.render().pixels
    diffs = []
    for value in values:
        console.poke(addr, value)
        changed = console.render().pixels != baseline
        count = int(changed.sum())
        bounds = None
        if count:
            ys, xs = np.nonzero(changed)
            bounds = (int(xs.min()), int(ys.min()),
                      int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))
        diffs.append(ProbeDiff(value, count, bounds))
        console.restore(state)
    return ProbeFinding(addr, tuple(diffs))


def probe_sweep(console: console_mod.Console,
                values: tuple[int, ...] = PROBE_VALUES) -> list[ProbeFinding]:
    return [probe_byte(console, addr, values) for addr in range(128)]


@dataclass(frozen=True)
class RecoveryReport:
    game_id: str
    total_pairs: int
    recovered: tuple[tuple[int, str, str], ...]
    missed: tuple[tuple[int, str, str], ...]
    false_findings: int

    @property
    def recovery(self) -> float:
        return len(self.recovered) / self.total_pairs if self.total_pairs else 0.0

    def to_dict(self) -> dict:
        return {"game_id": self.game_id, "total_pairs": self.total_pairs,
                "recovery": self.recovery,
                "recovered": [list(p) for p in self.recovered],
                "missed": [list(p) for p in self.missed],
                "false_findings": self.false_findings}


def score_discovery(game_id: str, findings: list[CorrelationFinding]) -> RecoveryReport:
    """Fraction of the cartridge's affine-coded pairs recovered with exact
    coefficients; anything else above the gate counts as a false finding."""
    truth = console_mod.get_cartridge(game_id).affine_truth()
    by_key = {(f.byte, f.category, f.prop): f for f in findings}
    recovered, missed = [], []
    for pair in truth:
        f = by_key.get((pair.byte, pair.category, pair.prop))
        if f is not None and f.a == pair.a and f.b == pair.b:
            recovered.append((pair.byte, pair.category, pair.prop))
        else:
            missed.append((pair.byte, pair.category, pair.prop))
    truth_keys = {(p.byte, p.category, p.prop) for p in truth}
    false_findings = sum(1 for k in by_key if k not in truth_keys)
    return RecoveryReport(game_id, len(truth), tuple(recovered), tuple(missed),
                          false_findings)
