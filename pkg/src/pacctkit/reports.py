"""Workload reports over accounting records.

Nine standard reports: a general summary, two per-user activity
histograms, two top-20 command rankings, three time distributions and a
memory distribution. All are single-pass: an observer accumulates per
record, a finalizer emits an immutable value. A tenth registration
extracts per-user feature vectors for downstream classification.
"""
from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .acct_format import ProcessRecord
from .engine import ReportRegistration

TOP_N = 20

# Counting metrics for ranked lists: every execution instance, or one per
# distinct user who ran the command at least once.
METRIC_INSTANCES = "instance_count"
METRIC_DISTINCT_USERS = "distinct_user_count"


def round_half_up(value: float) -> int:
    """Round to nearest integer, halves away from zero (display rule)."""
    return int(math.floor(value + 0.5))


def _fmt_edge(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return f"{v:g}"


@dataclass(frozen=True)
class HistogramSpec:
    """Bucket layout: edges e0 < e1 < ... < ek define half-open buckets
    [e0,e1) ... [e(k-1),ek) plus one open bucket [ek, inf).

    e0 must be 0 so every nonnegative value lands in exactly one bucket.
    """

    name: str
    edges: tuple[float, ...]
    unit: str = ""

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if not edges:
            raise ValueError(f"{self.name}: at least one edge required")
        if edges[0] != 0.0:
            raise ValueError(f"{self.name}: first edge must be 0, got {edges[0]}")
        if any(a >= b for a, b in zip(edges, edges[1:])):
            raise ValueError(f"{self.name}: edges must be strictly increasing")

    @property
    def n_buckets(self) -> int:
        return len(self.edges)

    def labels(self) -> list[str]:
        edges = self.edges
        out = [
            f"{_fmt_edge(lo)}-{_fmt_edge(hi)}" for lo, hi in zip(edges, edges[1:])
        ]
        out.append(f">{_fmt_edge(edges[-1])}")
        return out

    def bucket_index(self, value: float) -> int:
        if value < 0:
            raise ValueError("histogram values must be nonnegative")
        return bisect_right(self.edges, value) - 1


@dataclass(frozen=True)
class Histogram:
    """Finalized distribution. sample_of is set when counts were scaled up
    from a reservoir sample (adaptive memory mode) instead of counted
    exactly; it holds the true population size (== total)."""

    spec: HistogramSpec
    counts: tuple[int, ...]
    total: int
    sample_of: int | None = None

    def __post_init__(self):
        if len(self.counts) != self.spec.n_buckets:
            raise ValueError("count list does not match bucket count")
        if sum(self.counts) != self.total:
            raise ValueError("counts do not sum to total")

    @property
    def percents(self) -> tuple[float, ...]:
        if self.total == 0:
            return tuple(0.0 for _ in self.counts)
        scale = 100.0 / self.total
        return tuple(c * scale for c in self.counts)

    @property
    def display_percents(self) -> tuple[int, ...]:
        return tuple(round_half_up(p) for p in self.percents)


@dataclass(frozen=True)
class RankedList:
    """Top commands, descending count, ties broken by name ascending."""

    metric: str
    entries: tuple[tuple[str, int], ...]
    total_instances: int


@dataclass(frozen=True)
class GeneralSummary:
    total_commands: int
    distinct_commands: int
    first_event: int | None
    last_event: float | None
    period_days: float
    period_days_ceil: int
    distinct_ratio: float


@dataclass(frozen=True)
class FeatureTable:
    """Per-user feature vectors, one row per uid, sorted by uid."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


DEFAULT_EDGES: dict[str, tuple[float, ...]] = {
    "users-total": (0, 20, 40, 70, 150, 500),
    "users-distinct": (0, 5, 10, 15, 20, 25, 30),
    "stime": (0, 0.1, 0.5, 1, 2, 4, 6, 8, 10),
    "utime": (0, 1, 2, 4, 8, 16),
    "etime": (0, 2, 4, 6, 10, 20, 50, 100, 200, 400),
    "mem": (0, 100, 500, 1000, 2000, 7000),
}

_UNITS = {
    "users-total": "commands",
    "users-distinct": "distinct commands",
    "stime": "seconds",
    "utime": "seconds",
    "etime": "seconds",
    "mem": "8K pages",
}


def default_spec(name: str) -> HistogramSpec:
    return HistogramSpec(name, DEFAULT_EDGES[name], _UNITS[name])


def _spec_or_default(spec: HistogramSpec | None, name: str) -> HistogramSpec:
    if spec is None:
        return default_spec(name)
    if spec.name != name:
        spec = HistogramSpec(name, spec.edges, spec.unit or _UNITS[name])
    return spec


def general_report() -> ReportRegistration:
    """Totals, distinct command count and covered period.

    Every execution instance counts toward the total; a command name
    counts once toward the distinct total no matter how often it ran.
    The period spans the earliest process start to the latest exit.
    """
    total = 0
    names: set[str] = set()
    first: int | None = None
    last: float | None = None

    def observe(rec: ProcessRecord) -> None:
        nonlocal total, first, last
        total += 1
        names.add(rec.comm)
        t0 = rec.btime
        t1 = t0 + rec.etime_s
        if first is None or t0 < first:
            first = t0
        if last is None or t1 > last:
            last = t1

    def finalize() -> GeneralSummary:
        if total == 0:
            return GeneralSummary(0, 0, None, None, 0.0, 0, 0.0)
        days = (last - first) / 86400.0
        return GeneralSummary(
            total_commands=total,
            distinct_commands=len(names),
            first_event=first,
            last_event=last,
            period_days=days,
            period_days_ceil=math.ceil(days),
            distinct_ratio=len(names) / total,
        )

    return ReportRegistration("general", observe, finalize)


def _histogram_of_values(spec: HistogramSpec, values: Iterable[float]) -> Histogram:
    counts = [0] * spec.n_buckets
    edges = spec.edges
    total = 0
    for v in values:
        counts[bisect_right(edges, v) - 1] += 1
        total += 1
    return Histogram(spec, tuple(counts), total)


def user_total_hist(spec: HistogramSpec | None = None) -> ReportRegistration:
    """How many commands each user ran: one histogram entry per uid."""
    spec = _spec_or_default(spec, "users-total")
    counts: dict[int, int] = {}

    def observe(rec: ProcessRecord, counts=counts) -> None:
        uid = rec.uid
        counts[uid] = counts.get(uid, 0) + 1

    return ReportRegistration(
        "users-total",
        observe,
        lambda: _histogram_of_values(spec, counts.values()),
    )


def user_distinct_hist(spec: HistogramSpec | None = None) -> ReportRegistration:
    """How many different commands each user ran."""
    spec = _spec_or_default(spec, "users-distinct")
    seen: dict[int, set[str]] = {}

    def observe(rec: ProcessRecord, seen=seen) -> None:
        s = seen.get(rec.uid)
        if s is None:
            seen[rec.uid] = {rec.comm}
        else:
            s.add(rec.comm)

    return ReportRegistration(
        "users-distinct",
        observe,
        lambda: _histogram_of_values(spec, (len(s) for s in seen.values())),
    )


def _ranked(counts: Mapping[str, int], metric: str, total_instances: int) -> RankedList:
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:TOP_N]
    return RankedList(metric, tuple(top), total_instances)


def top20_total() -> ReportRegistration:
    """Most executed commands, every instance counted."""
    counts: dict[str, int] = {}
    seen = 0

    def observe(rec: ProcessRecord, counts=counts) -> None:
        nonlocal seen
        seen += 1
        c = rec.comm
        counts[c] = counts.get(c, 0) + 1

    return ReportRegistration(
        "top20-total",
        observe,
        lambda: _ranked(counts, METRIC_INSTANCES, seen),
    )


def top20_distinct_users() -> ReportRegistration:
    """Commands ranked by how many different users ran them.

    A user running the same command a thousand times still moves its
    score by one.
    """
    users_of: dict[str, set[int]] = {}
    seen = 0

    def observe(rec: ProcessRecord, users_of=users_of) -> None:
        nonlocal seen
        seen += 1
        s = users_of.get(rec.comm)
        if s is None:
            users_of[rec.comm] = {rec.uid}
        else:
            s.add(rec.uid)

    def finalize() -> RankedList:
        return _ranked(
            {comm: len(uids) for comm, uids in users_of.items()},
            METRIC_DISTINCT_USERS,
            seen,
        )

    return ReportRegistration("top20-distinct", observe, finalize)


def _instance_hist(name: str, attr: str, spec: HistogramSpec | None) -> ReportRegistration:
    spec = _spec_or_default(spec, name)
    counts = [0] * spec.n_buckets
    edges = spec.edges
    total = 0

    def observe(rec: ProcessRecord, counts=counts, edges=edges) -> None:
        nonlocal total
        total += 1
        counts[bisect_right(edges, getattr(rec, attr)) - 1] += 1

    return ReportRegistration(
        name,
        observe,
        lambda: Histogram(spec, tuple(counts), total),
    )


def stime_hist(spec: HistogramSpec | None = None) -> ReportRegistration:
    """Kernel-side CPU time per command instance."""
    return _instance_hist("stime", "stime_s", spec)


def utime_hist(spec: HistogramSpec | None = None) -> ReportRegistration:
    """User-side CPU time per command instance."""
    return _instance_hist("utime", "utime_s", spec)


def etime_hist(spec: HistogramSpec | None = None) -> ReportRegistration:
    """Wall-clock elapsed time per command instance."""
    return _instance_hist("etime", "etime_s", spec)


class Reservoir:
    """Uniform fixed-size sample of a stream (Vitter's algorithm R)."""

    __slots__ = ("capacity", "sample", "n", "_rng")

    def __init__(self, capacity: int, seed: int):
        self.capacity = capacity
        self.sample: list[float] = []
        self.n = 0
        self._rng = random.Random(seed)

    def add(self, value: float) -> None:
        self.n += 1
        if len(self.sample) < self.capacity:
            self.sample.append(value)
        else:
            j = self._rng.randrange(self.n)
            if j < self.capacity:
                self.sample[j] = value

    def median(self) -> float:
        if not self.sample:
            return 0.0
        s = sorted(self.sample)
        mid = len(s) // 2
        if len(s) % 2:
            return s[mid]
        return (s[mid - 1] + s[mid]) / 2.0


_ADAPTIVE_SEED = 0x6D656D  # fixed so adaptive output is reproducible
_ADAPTIVE_SAMPLE = 4096


def _nice_ceil(v: float) -> float:
    # Smallest 1/2/5 x 10^k at or above v.
    if v <= 0:
        return 0.0
    exp = math.floor(math.log10(v))
    base = 10.0**exp
    for m in (1.0, 2.0, 5.0, 10.0):
        if v <= m * base * (1 + 1e-12):
            return m * base
    return 10.0 * base


def _adaptive_edges(hi: float, sample: list[float]) -> tuple[float, ...]:
    if hi <= 0 or not sample:
        return (0.0,)
    s = sorted(sample)
    picks = {0.0}
    for f in (0.05, 0.25, 0.5, 0.75, 0.95):
        picks.add(_nice_ceil(s[int(f * (len(s) - 1))]))
    picks.add(_nice_ceil(hi))
    edges = tuple(sorted(picks))
    return edges if len(edges) >= 2 else (0.0, _nice_ceil(hi))


def _apportion(fractions: list[float], total: int) -> list[int]:
    # Scale fractions to integers summing exactly to total
    # (largest-remainder method).
    raw = [f * total for f in fractions]
    out = [int(r) for r in raw]
    short = total - sum(out)
    order = sorted(range(len(raw)), key=lambda i: (out[i] - raw[i], i))
    for i in order[:short]:
        out[i] += 1
    return out


def mem_hist(
    spec: HistogramSpec | None = None, adaptive: bool = False
) -> ReportRegistration:
    """Average memory footprint (8K pages) per command instance.

    Fixed mode counts exactly against the given or default edges.
    Adaptive mode picks edges at the end of the run from the observed
    maximum and a reservoir sample; counts are then the sample's
    distribution scaled to the record total (exact while the sample
    holds every record, an estimate beyond that).
    """
    if not adaptive:
        return _instance_hist("mem", "mem_pages", spec)

    reservoir = Reservoir(_ADAPTIVE_SAMPLE, _ADAPTIVE_SEED)
    state = {"hi": 0.0}

    def observe(rec: ProcessRecord, add=reservoir.add, state=state) -> None:
        v = rec.mem_pages
        if v > state["hi"]:
            state["hi"] = v
        add(v)

    def finalize() -> Histogram:
        n = reservoir.n
        if n == 0:
            empty = HistogramSpec("mem", (0.0,), _UNITS["mem"])
            return Histogram(empty, (0,), 0, sample_of=0)
        spec_out = HistogramSpec("mem", _adaptive_edges(state["hi"], reservoir.sample), _UNITS["mem"])
        sample_counts = [0] * spec_out.n_buckets
        edges = spec_out.edges
        for v in reservoir.sample:
            sample_counts[bisect_right(edges, v) - 1] += 1
        k = len(reservoir.sample)
        if k == n:
            return Histogram(spec_out, tuple(sample_counts), n, sample_of=n)
        counts = _apportion([c / k for c in sample_counts], n)
        return Histogram(spec_out, tuple(counts), n, sample_of=n)

    return ReportRegistration("mem", observe, finalize)


STANDARD_REPORT_NAMES = (
    "general",
    "users-total",
    "users-distinct",
    "top20-total",
    "top20-distinct",
    "stime",
    "utime",
    "etime",
    "mem",
)


def standard_reports(
    edges: Mapping[str, Iterable[float]] | None = None,
    mem_adaptive: bool = False,
) -> list[ReportRegistration]:
    """The nine standard reports in their canonical order.

    edges overrides bucket boundaries per report name; mem_adaptive
    switches the memory report to end-of-run bucket selection.
    """
    edges = dict(edges or {})

    def spec_for(name: str) -> HistogramSpec | None:
        if name in edges:
            return HistogramSpec(name, tuple(edges[name]), _UNITS[name])
        return None

    return [
        general_report(),
        user_total_hist(spec_for("users-total")),
        user_distinct_hist(spec_for("users-distinct")),
        top20_total(),
        top20_distinct_users(),
        stime_hist(spec_for("stime")),
        utime_hist(spec_for("utime")),
        etime_hist(spec_for("etime")),
        mem_hist(spec_for("mem"), adaptive=mem_adaptive),
    ]


_MEDIAN_RESERVOIR = 1024


class UserAggregate:
    """Running per-user state feeding the feature table."""

    __slots__ = (
        "uid", "total_commands", "distinct_commands", "superuser_count",
        "sums", "maxes", "reservoirs", "bucket_counts",
    )

    def __init__(self, uid: int, time_specs: tuple[HistogramSpec, ...]):
        self.uid = uid
        self.total_commands = 0
        self.distinct_commands: set[str] = set()
        self.superuser_count = 0
        self.sums = [0.0, 0.0, 0.0, 0.0]  # stime, utime, etime, mem
        self.maxes = [0.0, 0.0, 0.0, 0.0]
        # One RNG per user keeps sampling deterministic and independent
        # of which other users appear in the log.
        rng_seed = 0x5EED0000 ^ uid
        self.reservoirs = tuple(
            Reservoir(_MEDIAN_RESERVOIR, rng_seed + i) for i in range(4)
        )
        self.bucket_counts = tuple([0] * s.n_buckets for s in time_specs)

    def add(self, rec: ProcessRecord, time_specs: tuple[HistogramSpec, ...]) -> None:
        self.total_commands += 1
        self.distinct_commands.add(rec.comm)
        if rec.flags.superuser:
            self.superuser_count += 1
        values = (rec.stime_s, rec.utime_s, rec.etime_s, rec.mem_pages)
        sums = self.sums
        maxes = self.maxes
        for i, v in enumerate(values):
            sums[i] += v
            if v > maxes[i]:
                maxes[i] = v
            self.reservoirs[i].add(v)
        for spec, counts, v in zip(time_specs, self.bucket_counts, values):
            counts[bisect_right(spec.edges, v) - 1] += 1


_FAMILIES = ("stime", "utime", "etime", "mem")


def feature_columns(time_specs: tuple[HistogramSpec, ...]) -> tuple[str, ...]:
    cols = ["uid", "user", "total_commands", "distinct_commands"]
    for fam in _FAMILIES:
        cols += [f"{fam}_mean", f"{fam}_median", f"{fam}_max"]
    for spec in time_specs:
        cols += [f"{spec.name}_frac_{label}" for label in spec.labels()]
    cols.append("superuser_fraction")
    return tuple(cols)


def extract_user_features(
    aggregates: Mapping[int, UserAggregate],
    time_specs: tuple[HistogramSpec, ...],
    user_names: Mapping[int, str] | None = None,
) -> FeatureTable:
    """Flatten accumulated per-user state into one row per uid.

    Means, maxima and bucket fractions are exact; medians come from each
    user's reservoir sample, so they are exact for users with at most
    1024 records and approximate beyond that.
    """
    names = user_names or {}
    rows = []
    for uid in sorted(aggregates):
        agg = aggregates[uid]
        n = agg.total_commands
        row = [uid, names.get(uid, ""), n, len(agg.distinct_commands)]
        for i in range(4):
            row += [agg.sums[i] / n, agg.reservoirs[i].median(), agg.maxes[i]]
        for counts in agg.bucket_counts:
            row += [c / n for c in counts]
        row.append(agg.superuser_count / n)
        rows.append(tuple(row))
    return FeatureTable(feature_columns(time_specs), tuple(rows))


def user_features(
    time_edges: Mapping[str, Iterable[float]] | None = None,
    user_names: Mapping[int, str] | None = None,
) -> ReportRegistration:
    """Per-user feature vectors as a report registration."""
    edges = dict(time_edges or {})
    time_specs = tuple(
        HistogramSpec(name, tuple(edges.get(name, DEFAULT_EDGES[name])), _UNITS[name])
        for name in ("stime", "utime", "etime")
    )
    aggregates: dict[int, UserAggregate] = {}

    def observe(rec: ProcessRecord, aggregates=aggregates) -> None:
        agg = aggregates.get(rec.uid)
        if agg is None:
            agg = aggregates[rec.uid] = UserAggregate(rec.uid, time_specs)
        agg.add(rec, time_specs)

    return ReportRegistration(
        "features",
        observe,
        lambda: extract_user_features(aggregates, time_specs, user_names),
    )
