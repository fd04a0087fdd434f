"""Deterministic synthetic accounting log generator.

Produces binary pacct files with statistically controlled workloads for
tests, golden outputs and scale runs. Three built-in profiles mimic an
internet-facing login server, an HPC batch cluster and a short
masquerader burst.

Determinism contract: one Mersenne Twister stream (random.Random) seeded
from the config drives every draw in a fixed per-record order, so the
same config always yields byte-identical output. Ground truth is tallied
from the values as they will read back after comp_t quantization, which
makes the returned summary exactly equal to what the report engine
computes from the written file.
"""
from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from math import ceil
from pathlib import Path
from typing import BinaryIO, Mapping

from .acct_format import (
    DEFAULT_AHZ,
    Endianness,
    FlagSet,
    FormatKind,
    ProcessRecord,
    decode_comp_t,
    encode_comp_t,
    encode_record,
)
from .reports import DEFAULT_EDGES, HistogramSpec

RNG_ALGORITHM = "mt19937"
UID_BASE = 1000
DEFAULT_TIME_ORIGIN = 1_672_531_200  # 2023-01-01T00:00:00Z

_TIME_FAMILIES = ("stime", "utime", "etime")
_WEIGHT_TOL = 1e-6


def _normalized(weights):
    total = sum(weights)
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    return tuple(w / total for w in weights)


@dataclass(frozen=True)
class UserProfile:
    """Statistical description of one workload population.

    command_vocabulary: (name, weight) pairs; weights are normalized.
    commands_per_user: (user_fraction, activity_weight) groups splitting
    the population into activity classes (e.g. bimodal low/high).
    time_bucket_weights: per family (stime/utime/etime), one probability
    per bucket of that family's default histogram edges.
    mem_weights: (lo, hi, weight) page ranges; mem_range spans them all.
    """

    name: str
    command_vocabulary: tuple[tuple[str, float], ...]
    commands_per_user: tuple[tuple[float, float], ...]
    time_bucket_weights: Mapping[str, tuple[float, ...]]
    mem_weights: tuple[tuple[float, float, float], ...]
    superuser_fraction: float
    period_days: float
    default_users: int

    def __post_init__(self):
        if not self.command_vocabulary:
            raise ValueError(f"{self.name}: empty vocabulary")
        if any(w < 0 for _, w in self.command_vocabulary):
            raise ValueError(f"{self.name}: negative vocabulary weight")
        names = [c for c, _ in self.command_vocabulary]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.name}: duplicate command names")
        fractions = [f for f, _ in self.commands_per_user]
        if any(f <= 0 for f in fractions) or abs(sum(fractions) - 1) > _WEIGHT_TOL:
            raise ValueError(f"{self.name}: user fractions must sum to 1")
        if any(w <= 0 for _, w in self.commands_per_user):
            raise ValueError(f"{self.name}: activity weights must be positive")
        for fam in _TIME_FAMILIES:
            weights = self.time_bucket_weights[fam]
            expected = len(DEFAULT_EDGES[fam])
            if len(weights) != expected:
                raise ValueError(
                    f"{self.name}: {fam} needs {expected} bucket weights"
                )
            if any(w < 0 for w in weights) or abs(sum(weights) - 1) > 1e-3:
                raise ValueError(f"{self.name}: {fam} weights must sum to 1")
        total_mem = 0.0
        for lo, hi, w in self.mem_weights:
            if lo < 0 or hi < lo or w < 0:
                raise ValueError(f"{self.name}: bad memory range ({lo}, {hi})")
            total_mem += w
        if abs(total_mem - 1) > 1e-3:
            raise ValueError(f"{self.name}: memory range weights must sum to 1")
        if not 0 <= self.superuser_fraction <= 1:
            raise ValueError(f"{self.name}: superuser fraction out of [0, 1]")
        if self.period_days <= 0:
            raise ValueError(f"{self.name}: period must be positive")
        if self.default_users < 1:
            raise ValueError(f"{self.name}: need at least one user")

    @property
    def mem_range(self) -> tuple[float, float]:
        return (
            min(lo for lo, _, _ in self.mem_weights),
            max(hi for _, hi, _ in self.mem_weights),
        )

    @property
    def vocabulary_size(self) -> int:
        return len(self.command_vocabulary)


@dataclass(frozen=True)
class GeneratorConfig:
    profile: UserProfile
    n_users: int
    n_records: int
    seed: int
    format: FormatKind = FormatKind.LINUX64
    order: Endianness = Endianness.LITTLE
    time_origin: int = DEFAULT_TIME_ORIGIN
    ahz: int = DEFAULT_AHZ

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be at least 1")
        if self.n_records < 0:
            raise ValueError("n_records cannot be negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.ahz <= 0:
            raise ValueError("ahz must be positive")
        if self.time_origin < 0:
            raise ValueError("time_origin must be nonnegative")


def _weighted_picker(rng: random.Random, weights):
    cum = list(accumulate(weights))
    total = cum[-1]

    def pick() -> int:
        return bisect_right(cum, rng.random() * total)

    return pick


def _quantize(ticks: int) -> int:
    return decode_comp_t(encode_comp_t(ticks))


def _time_sampler(rng: random.Random, family: str, weights, ahz: int):
    """Draw quantized ticks targeting the family's default buckets.

    The drawn tick is run through the comp_t codec immediately so the
    value used for ground truth equals the value read back from disk.
    """
    edges = DEFAULT_EDGES[family]
    tick_edges = [int(round(e * ahz)) for e in edges]
    tick_edges.append(max(tick_edges[-1] * 2, tick_edges[-1] + 1))
    pick_bucket = _weighted_picker(rng, weights)

    def draw() -> int:
        b = pick_bucket()
        lo, hi = tick_edges[b], tick_edges[b + 1]
        if hi <= lo:
            hi = lo + 1
        return _quantize(rng.randrange(lo, hi))

    return draw


def _mem_sampler(rng: random.Random, mem_weights):
    ranges = [(int(lo), max(int(hi), int(lo) + 1)) for lo, hi, _ in mem_weights]
    pick_range = _weighted_picker(rng, [w for _, _, w in mem_weights])

    def draw() -> int:
        lo, hi = ranges[pick_range()]
        return _quantize(rng.randrange(lo, hi))

    return draw


def _user_weights(profile: UserProfile, n_users: int) -> list[float]:
    # Split users into activity classes by index: the first
    # fraction-of-users get the first class weight and so on.
    weights = []
    for fraction, weight in profile.commands_per_user:
        weights.extend([weight] * round(fraction * n_users))
    while len(weights) < n_users:
        weights.append(profile.commands_per_user[-1][1])
    return weights[:n_users]


_FLUSH_EVERY = 8192


def generate_log(cfg: GeneratorConfig, sink) -> dict:
    """Write n_records synthetic records and return their ground truth.

    sink is a path or a writable binary file. The summary holds exact
    per-command, per-user and per-bucket counts plus the general totals,
    all tallied from post-quantization values, so the report engine run
    on the written file reproduces them exactly.
    """
    owned = isinstance(sink, (str, Path))
    fh: BinaryIO = open(sink, "wb") if owned else sink
    try:
        return _generate(cfg, fh)
    finally:
        if owned:
            fh.close()


def _generate(cfg: GeneratorConfig, fh: BinaryIO) -> dict:
    profile = cfg.profile
    rng = random.Random(cfg.seed)
    inv_ahz = 1.0 / cfg.ahz  # mirrors the decoder's seconds conversion

    vocab = [c for c, _ in profile.command_vocabulary]
    pick_comm = _weighted_picker(rng, [w for _, w in profile.command_vocabulary])
    pick_user = _weighted_picker(rng, _user_weights(profile, cfg.n_users))
    draw_stime = _time_sampler(rng, "stime", profile.time_bucket_weights["stime"], cfg.ahz)
    draw_utime = _time_sampler(rng, "utime", profile.time_bucket_weights["utime"], cfg.ahz)
    draw_etime = _time_sampler(rng, "etime", profile.time_bucket_weights["etime"], cfg.ahz)
    draw_mem = _mem_sampler(rng, profile.mem_weights)
    # Start times: exponential inter-arrivals rescaled so the log spans
    # a few hours less than the profile period, keeping the whole-day
    # ceiling at exactly period_days regardless of record count.
    slack = 3600.0 * (4.0 + 4.0 * rng.random())
    target_span = max(profile.period_days * 86400.0 - slack, 0.0)
    gaps = [rng.expovariate(1.0) for _ in range(max(cfg.n_records - 1, 0))]
    gap_scale = target_span / sum(gaps) if gaps else 0.0

    specs = {name: HistogramSpec(name, DEFAULT_EDGES[name]) for name in
             ("stime", "utime", "etime", "mem")}
    bucket_counts = {name: [0] * spec.n_buckets for name, spec in specs.items()}

    per_comm: dict[str, int] = {}
    comm_users: dict[str, set[int]] = {}
    per_user_total: dict[int, int] = {}
    per_user_distinct: dict[int, set[str]] = {}
    first_event: int | None = None
    last_event: float | None = None

    clock = float(cfg.time_origin)
    n_vocab = len(vocab)
    out: list[bytes] = []
    written = 0

    for i in range(cfg.n_records):
        uid = UID_BASE + pick_user()
        # The first pass through the vocabulary guarantees full coverage,
        # pinning the distinct-command count exactly for sizeable logs.
        comm = vocab[i] if i < n_vocab else vocab[pick_comm()]
        s_ticks = draw_stime()
        u_ticks = draw_utime()
        e_ticks = max(draw_etime(), s_ticks + u_ticks)
        mem = draw_mem()
        superuser = rng.random() < profile.superuser_fraction
        if i:
            clock += gaps[i - 1] * gap_scale
        btime = int(clock)

        stime_s = s_ticks * inv_ahz
        utime_s = u_ticks * inv_ahz
        etime_s = e_ticks * inv_ahz
        rec = ProcessRecord(
            uid=uid,
            gid=100 + uid % 7,
            comm=comm,
            btime=btime,
            utime_s=utime_s,
            stime_s=stime_s,
            etime_s=etime_s,
            mem_pages=float(mem),
            io_blocks=0.0,
            rw_blocks=0.0,
            flags=FlagSet.from_byte(0x02 if superuser else 0),
        )
        out.append(encode_record(rec, cfg.format, cfg.order, cfg.ahz))
        written += 1
        if len(out) >= _FLUSH_EVERY:
            fh.write(b"".join(out))
            out.clear()

        per_comm[comm] = per_comm.get(comm, 0) + 1
        users = comm_users.get(comm)
        if users is None:
            comm_users[comm] = {uid}
        else:
            users.add(uid)
        per_user_total[uid] = per_user_total.get(uid, 0) + 1
        seen = per_user_distinct.get(uid)
        if seen is None:
            per_user_distinct[uid] = {comm}
        else:
            seen.add(comm)
        exit_time = btime + etime_s
        if first_event is None or btime < first_event:
            first_event = btime
        if last_event is None or exit_time > last_event:
            last_event = exit_time
        bucket_counts["stime"][bisect_right(specs["stime"].edges, stime_s) - 1] += 1
        bucket_counts["utime"][bisect_right(specs["utime"].edges, utime_s) - 1] += 1
        bucket_counts["etime"][bisect_right(specs["etime"].edges, etime_s) - 1] += 1
        bucket_counts["mem"][bisect_right(specs["mem"].edges, float(mem)) - 1] += 1

    if out:
        fh.write(b"".join(out))

    if written:
        days = (last_event - first_event) / 86400.0
        general = {
            "total_commands": written,
            "distinct_commands": len(per_comm),
            "first_event": first_event,
            "last_event": last_event,
            "period_days": days,
            "period_days_ceil": ceil(days),
            "distinct_ratio": len(per_comm) / written,
        }
    else:
        general = {
            "total_commands": 0,
            "distinct_commands": 0,
            "first_event": None,
            "last_event": None,
            "period_days": 0.0,
            "period_days_ceil": 0,
            "distinct_ratio": 0.0,
        }

    return {
        "schema_version": 1,
        "generator": {
            "profile": profile.name,
            "n_users": cfg.n_users,
            "n_records": cfg.n_records,
            "seed": cfg.seed,
            "format": cfg.format.value,
            "endianness": cfg.order.value,
            "ahz": cfg.ahz,
            "time_origin": cfg.time_origin,
            "uid_base": UID_BASE,
            "rng": RNG_ALGORITHM,
        },
        "records_written": written,
        "general": general,
        "per_comm_instances": per_comm,
        "per_comm_distinct_users": {c: len(u) for c, u in comm_users.items()},
        "per_user_total": per_user_total,
        "per_user_distinct": {u: len(s) for u, s in per_user_distinct.items()},
        "bucket_counts": bucket_counts,
    }


def _with_tail(head: list[tuple[str, float]], tail_size: int, tail_weight: float):
    tail = [(f"app{i:03d}", tail_weight) for i in range(tail_size)]
    return tuple(head + tail)


def _internet_profile() -> UserProfile:
    head = [
        ("ssh", 120.0), ("uname", 70.0), ("hostname", 70.0), ("mail", 60.0),
        ("sh", 60.0), ("ls", 50.0), ("sed", 40.0), ("awk", 40.0),
        ("grep", 35.0), ("cat", 30.0), ("ps", 30.0), ("csh", 25.0),
        ("bash", 25.0), ("find", 20.0), ("sendmail", 20.0), ("pine", 15.0),
        ("procmail", 15.0), ("cp", 15.0), ("mv", 10.0), ("id", 10.0),
    ]
    return UserProfile(
        name="internet",
        command_vocabulary=_with_tail(head, 154, 2.0),
        commands_per_user=((0.55, 1.0), (0.45, 40.0)),
        time_bucket_weights={
            "stime": (0.14, 0.08, 0.10, 0.36, 0.14, 0.06, 0.03, 0.01, 0.08),
            "utime": (0.35, 0.25, 0.18, 0.12, 0.06, 0.04),
            "etime": (0.18, 0.18, 0.17, 0.04, 0.06, 0.04, 0.04, 0.08, 0.05, 0.16),
        },
        mem_weights=(
            (0.0, 100.0, 0.10),
            (100.0, 500.0, 0.53),
            (500.0, 1000.0, 0.05),
            (1000.0, 3000.0, 0.32),
        ),
        superuser_fraction=0.05,
        period_days=31.0,
        default_users=80,
    )


def _hpc_profile() -> UserProfile:
    head = [
        ("pbs", 150.0), ("rsync", 90.0), ("sleep", 85.0), ("libtool", 80.0),
        ("xauth", 70.0), ("sh", 60.0), ("bash", 50.0), ("qsub", 45.0),
        ("qstat", 40.0), ("mpirun", 35.0), ("gcc", 30.0), ("ld", 25.0),
        ("as", 25.0), ("collect2", 20.0), ("grep", 20.0), ("sed", 15.0),
        ("awk", 15.0), ("uname", 10.0), ("hostname", 10.0), ("cp", 10.0),
    ]
    return UserProfile(
        name="hpc",
        command_vocabulary=_with_tail(head, 721, 0.5),
        commands_per_user=((0.22, 1.0), (0.78, 880.0)),
        time_bucket_weights={
            "stime": (0.09, 0.06, 0.08, 0.19, 0.14, 0.12, 0.10, 0.09, 0.13),
            "utime": (0.21, 0.21, 0.22, 0.16, 0.07, 0.13),
            "etime": (0.10, 0.12, 0.13, 0.08, 0.20, 0.09, 0.08, 0.06, 0.06, 0.08),
        },
        mem_weights=(
            (0.0, 500.0, 0.01),
            (500.0, 1000.0, 0.01),
            (1000.0, 2000.0, 0.01),
            (2000.0, 7000.0, 0.94),
            (7000.0, 12000.0, 0.03),
        ),
        superuser_fraction=0.02,
        period_days=28.0,
        default_users=90,
    )


def _masquerader_profile() -> UserProfile:
    vocab = (
        ("irc", 30.0), ("ftp", 25.0), ("gcc", 20.0), ("wget", 15.0),
        ("tar", 10.0), ("uname", 10.0), ("whoami", 8.0), ("id", 8.0),
        ("curl", 6.0), ("nc", 5.0), ("chmod", 5.0), ("make", 5.0),
    )
    return UserProfile(
        name="masquerader",
        command_vocabulary=vocab,
        commands_per_user=((1.0, 1.0),),
        time_bucket_weights={
            "stime": (0.20, 0.15, 0.15, 0.15, 0.10, 0.10, 0.05, 0.05, 0.05),
            "utime": (0.30, 0.25, 0.20, 0.15, 0.05, 0.05),
            "etime": (0.20, 0.15, 0.15, 0.10, 0.10, 0.10, 0.05, 0.05, 0.05, 0.05),
        },
        mem_weights=((100.0, 2000.0, 1.0),),
        superuser_fraction=0.0,
        period_days=2.0,
        default_users=4,
    )


def builtin_profiles() -> list[UserProfile]:
    """The three named workload profiles."""
    return [_internet_profile(), _hpc_profile(), _masquerader_profile()]


PROFILE_NAMES = ("internet", "hpc", "masquerader")


def get_profile(name: str) -> UserProfile:
    for profile in builtin_profiles():
        if profile.name == name:
            return profile
    raise KeyError(f"unknown profile {name!r} (expected one of {PROFILE_NAMES})")
