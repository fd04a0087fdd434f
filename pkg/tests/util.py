"""Shared record builders for the test suite."""
from __future__ import annotations

import random

from pacctkit import FlagSet, ProcessRecord

VOCAB = (
    "sh", "ls", "cp", "mv", "ssh", "gcc", "make", "rsync", "xauth",
    "sleep", "grep", "awk", "sed", "tar", "gzip", "find", "cat", "ps",
)


def rec(
    comm: str = "ls",
    uid: int = 1000,
    btime: int = 1_700_000_000,
    utime: float = 0.1,
    stime: float = 0.05,
    etime: float = 1.0,
    mem: float = 200.0,
    flags: int = 0,
    **kw,
) -> ProcessRecord:
    return ProcessRecord(
        uid=uid, gid=100, comm=comm, btime=btime,
        utime_s=utime, stime_s=stime, etime_s=etime,
        mem_pages=mem, io_blocks=0.0, rw_blocks=0.0,
        flags=FlagSet.from_byte(flags), **kw,
    )


def random_records(n: int, seed: int, n_users: int = 12) -> list[ProcessRecord]:
    """Messy but valid records: plausible times, varied users/commands."""
    rng = random.Random(seed)
    out = []
    t = 1_690_000_000
    for _ in range(n):
        t += rng.randrange(0, 120)
        stime = round(rng.expovariate(1 / 0.4), 2)
        utime = round(rng.expovariate(1 / 2.0), 2)
        etime = round(stime + utime + rng.expovariate(1 / 10.0), 2)
        out.append(
            rec(
                comm=rng.choice(VOCAB),
                uid=1000 + rng.randrange(n_users),
                btime=t,
                utime=utime,
                stime=stime,
                etime=etime,
                mem=rng.choice((60.0, 300.0, 800.0, 2500.0, 9000.0)),
                flags=0x02 if rng.random() < 0.1 else 0,
            )
        )
    return out
