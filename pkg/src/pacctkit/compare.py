"""Pairwise comparison of two report runs.

Pairs finalized outputs by report name and derives the deltas that make
two logs comparable at a glance: the total-command ratio, the ratio of
distinct-command ratios, and per-bucket percent differences for every
histogram the two runs share. Ratios put the second run (B) in the
numerator, so "B is twenty times larger" reads as a ratio of 20.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .engine import RunResult
from .reports import GeneralSummary, Histogram

# Ratio of distinct-command ratios at which two logs are flagged as
# roughly an order of magnitude apart (either direction).
MAGNITUDE_GAP = 4.5


@dataclass(frozen=True)
class PairedReport:
    """One report present in both runs, with histogram deltas if comparable."""

    name: str
    a: Any
    b: Any
    bucket_percent_deltas: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ComparisonResult:
    label_a: str
    label_b: str
    paired: tuple[PairedReport, ...]
    only_in_a: tuple[str, ...]
    only_in_b: tuple[str, ...]
    total_commands_ratio: float | None
    distinct_ratio_ratio: float | None
    order_of_magnitude_gap: bool


def _outputs(run: Mapping[str, Any] | RunResult) -> Mapping[str, Any]:
    if isinstance(run, RunResult):
        return run.outputs
    return run


def _ratio(va: float | None, vb: float | None) -> float | None:
    if va is None or vb is None or va == 0:
        return None
    return vb / va


def _pair(name: str, a: Any, b: Any) -> PairedReport:
    deltas = None
    if (
        isinstance(a, Histogram)
        and isinstance(b, Histogram)
        and a.spec.edges == b.spec.edges
    ):
        deltas = tuple(pb - pa for pa, pb in zip(a.percents, b.percents))
    return PairedReport(name, a, b, deltas)


def compare_reports(
    a: Mapping[str, Any] | RunResult,
    b: Mapping[str, Any] | RunResult,
    label_a: str = "A",
    label_b: str = "B",
) -> ComparisonResult:
    """Compare two runs report by report.

    Unpaired report names are listed rather than dropped. Identical runs
    come back with ratio 1 everywhere and all-zero bucket deltas.
    """
    out_a, out_b = _outputs(a), _outputs(b)
    paired = tuple(
        _pair(name, out_a[name], out_b[name]) for name in out_a if name in out_b
    )
    only_a = tuple(name for name in out_a if name not in out_b)
    only_b = tuple(name for name in out_b if name not in out_a)

    total_ratio = None
    distinct_ratio = None
    gap = False
    for p in paired:
        if isinstance(p.a, GeneralSummary) and isinstance(p.b, GeneralSummary):
            total_ratio = _ratio(p.a.total_commands, p.b.total_commands)
            distinct_ratio = _ratio(p.a.distinct_ratio, p.b.distinct_ratio)
            break
    if distinct_ratio is not None and distinct_ratio > 0:
        gap = max(distinct_ratio, 1.0 / distinct_ratio) >= MAGNITUDE_GAP

    return ComparisonResult(
        label_a=label_a,
        label_b=label_b,
        paired=paired,
        only_in_a=only_a,
        only_in_b=only_b,
        total_commands_ratio=total_ratio,
        distinct_ratio_ratio=distinct_ratio,
        order_of_magnitude_gap=gap,
    )
