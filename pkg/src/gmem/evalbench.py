"""Full-recall, occlusion-sweep and unknown-probe experiments with CSV output."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .network import MemoryNet, NormMode
from .patterns import BitPattern, BottomRight, DimensionError, MaskedPattern, PatternSet, apply_mask

FULL_RECALL = "full_recall"
OCCLUSION_SWEEP = "occlusion_sweep"
UNKNOWN_PROBE = "unknown_probe"

CSV_HEADER = ("pattern", "winner", "score", "accepted", "correct")


@dataclass(frozen=True)
class ProbeOutcome:
    pattern: int
    winner: int
    score: float
    accepted: bool
    correct: bool
    keep: float | None = None


@dataclass
class ExperimentReport:
    kind: str
    per_pattern: list[ProbeOutcome] = field(repr=False)
    accuracy: float
    max_score: float | None
    min_score: float | None
    failure_fraction: float | None = None
    # occlusion sweeps only: keep fraction -> report at that fraction
    by_fraction: dict[float, "ExperimentReport"] = field(default_factory=dict, repr=False)
    # fractions at which accuracy rose although the kept region shrank
    monotone_violations: list[float] = field(default_factory=list)
    # unknown probe only: full score vector
    scores: np.ndarray | None = field(default=None, repr=False)

    def accuracy_at(self, keep: float) -> float:
        return self.by_fraction[keep].accuracy


def _summarize(kind: str, outcomes: list[ProbeOutcome], **extra) -> ExperimentReport:
    if outcomes:
        acc = sum(o.correct for o in outcomes) / len(outcomes)
        scores = [o.score for o in outcomes]
        hi, lo = max(scores), min(scores)
    else:
        acc, hi, lo = 0.0, None, None
    return ExperimentReport(kind, outcomes, acc, hi, lo, **extra)


def _check_compatible(net: MemoryNet, patterns: PatternSet):
    if (patterns.width, patterns.height) != (net.width, net.height):
        raise DimensionError(
            f"corpus is {patterns.width}x{patterns.height}, net is {net.width}x{net.height}"
        )
    if len(patterns) != net.N:
        raise ValueError(f"net stores {net.N} patterns, corpus has {len(patterns)}")


def _probe_all(net, probes: Iterable[tuple[int, MaskedPattern]], norm) -> list[ProbeOutcome]:
    out = []
    for index, probe in probes:
        r = net.recall(probe, norm)
        out.append(ProbeOutcome(index, r.winner, r.winner_score, r.accepted, r.winner == index))
    return out


def run_full_recall(net: MemoryNet, patterns: PatternSet, norm: NormMode = NormMode.PRESENTED) -> ExperimentReport:
    _check_compatible(net, patterns)
    outcomes = _probe_all(net, ((i, MaskedPattern.full(p)) for i, p in enumerate(patterns)), norm)
    return _summarize(FULL_RECALL, outcomes)


def run_occlusion_sweep(
    net: MemoryNet,
    patterns: PatternSet,
    fractions: Sequence[float],
    region=BottomRight,
    norm: NormMode = NormMode.PRESENTED,
) -> ExperimentReport:
    """Probe every pattern with only a corner region of keep-fraction ``f`` shown.

    ``region`` maps a fraction to a region spec; the default keeps the
    bottom-right corner. The failure fraction is the largest tested ``f``
    with at least one recall error.
    """
    if not fractions:
        raise ValueError("no keep fractions given")
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"keep fraction must be in (0, 1], got {f}")
    _check_compatible(net, patterns)

    by_fraction = {}
    outcomes = []
    for f in fractions:
        spec = region(f)
        probes = ((i, apply_mask(p, spec)) for i, p in enumerate(patterns))
        sub = _summarize(OCCLUSION_SWEEP, _probe_all(net, probes, norm))
        by_fraction[f] = sub
        outcomes.extend(ProbeOutcome(o.pattern, o.winner, o.score, o.accepted, o.correct, f) for o in sub.per_pattern)

    failing = [f for f, sub in by_fraction.items() if sub.accuracy < 1.0]
    ordered = sorted(by_fraction, reverse=True)
    violations = [
        small for big, small in zip(ordered, ordered[1:])
        if by_fraction[small].accuracy > by_fraction[big].accuracy
    ]
    return _summarize(
        OCCLUSION_SWEEP, outcomes,
        failure_fraction=max(failing) if failing else None,
        by_fraction=by_fraction,
        monotone_violations=violations,
    )


def run_unknown_probe(
    net: MemoryNet, patterns: PatternSet, unknown: BitPattern, norm: NormMode = NormMode.PRESENTED
) -> ExperimentReport:
    _check_compatible(net, patterns)
    if unknown.shape != (patterns.width, patterns.height):
        raise DimensionError(f"unknown is {unknown.width}x{unknown.height}, corpus is {patterns.width}x{patterns.height}")
    for i, p in enumerate(patterns):
        if p == unknown:
            raise ValueError(f"unknown pattern is stored as pattern {i}")
    r = net.recall(unknown, norm)
    outcome = ProbeOutcome(-1, r.winner, r.winner_score, r.accepted, not r.accepted)
    return _summarize(UNKNOWN_PROBE, [outcome], scores=r.scores)


# -- CSV ---------------------------------------------------------------------


def _fmt(x: float | None) -> str:
    return "nan" if x is None else f"{x:.6f}"


def write_csv(report: ExperimentReport, sink: TextIO) -> None:
    """Rows in probe order, summary as trailing ``#`` lines.

    Sweep reports carry an extra ``keep`` column and one accuracy line per
    fraction.
    """
    sweep = bool(report.by_fraction)
    header = CSV_HEADER + (("keep",) if sweep else ())
    lines = [",".join(header)]
    for o in report.per_pattern:
        row = [str(o.pattern), str(o.winner), f"{o.score:.6f}", str(int(o.accepted)), str(int(o.correct))]
        if sweep:
            row.append(f"{o.keep:.6f}")
        lines.append(",".join(row))
    if report.per_pattern:
        lines.append(f"# accuracy={report.accuracy:.6f}")
        lines.append(f"# max_score={_fmt(report.max_score)}")
        lines.append(f"# min_score={_fmt(report.min_score)}")
    for f, sub in report.by_fraction.items():
        lines.append(f"# keep={f:.6f} accuracy={sub.accuracy:.6f}")
    if sweep:
        lines.append(f"# failure_fraction={_fmt(report.failure_fraction)}")
        if report.monotone_violations:
            lines.append("# monotone_violations=" + ",".join(f"{f:.6f}" for f in report.monotone_violations))
    sink.write("\n".join(lines) + "\n")


def default_report_name(kind: str, now: _dt.datetime | None = None) -> str:
    now = now or _dt.datetime.now()
    return f"{kind}_{now.strftime('%Y%m%dT%H%M%S')}.csv"
