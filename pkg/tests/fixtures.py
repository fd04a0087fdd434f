"""Fixed fixtures behind the golden-file tests.

The five-record log is small enough to check by hand and exercises every
output shape: three distinct commands, three users, one superuser flag,
values spread across histogram buckets including an empty one.

Run this file directly to (re)write tests/golden/. Goldens are reviewed
by eye once and then frozen; regenerate only when a renderer changes on
purpose, and re-review the diff.
"""
from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from util import rec  # noqa: E402

from pacctkit import ReportEngine, standard_reports, user_features  # noqa: E402
from pacctkit.compare import compare_reports  # noqa: E402
from pacctkit.engine import ReportError, RunMetadata, RunResult  # noqa: E402

GOLDEN_DIR = Path(__file__).parent / "golden"


def five_records():
    return [
        rec(comm="ls", uid=1000, btime=1672531200, utime=0.5, stime=0.05,
            etime=1.0, mem=80.0),
        rec(comm="ls", uid=1001, btime=1672534800, utime=1.5, stime=0.2,
            etime=3.0, mem=250.0),
        rec(comm="cp", uid=1000, btime=1672538400, utime=2.5, stime=0.7,
            etime=12.0, mem=600.0, flags=0x02),
        rec(comm="gcc", uid=1002, btime=1672542000, utime=9.0, stime=1.5,
            etime=30.0, mem=1500.0),
        rec(comm="ls", uid=1000, btime=1672545600, utime=17.0, stime=11.0,
            etime=450.0, mem=9000.0),
    ]


def five_more_records():
    """Second log for comparisons: the five plus five of a new command."""
    extra = [
        rec(comm="sed", uid=1003, btime=1672531200 + i * 600, utime=0.2,
            stime=0.1, etime=0.5, mem=120.0)
        for i in range(5)
    ]
    return five_records() + extra


def run_five(records=None) -> RunResult:
    engine = ReportEngine()
    engine.register_all(standard_reports())
    return engine.run_single_pass(iter(records or five_records()))


def run_five_fixed_meta() -> RunResult:
    """The five-record run with pinned metadata, for byte-stable HTML."""
    result = run_five()
    meta = RunMetadata(
        records_read=result.metadata.records_read,
        warnings=(),
        wall_time_ms=0.0,
        source_format="linux64/little",
    )
    return RunResult(outputs=result.outputs, metadata=meta)


def features_five():
    engine = ReportEngine()
    engine.register_all([user_features(user_names={1000: "alice"})])
    return engine.run_single_pass(iter(five_records())).outputs["features"]


def error_output() -> ReportError:
    return ReportError(report="mem", stage="observe",
                       error_type="ValueError", message="boom")


def comparison_five():
    return compare_reports(run_five(), run_five(five_more_records()),
                           label_a="five.pacct", label_b="ten.pacct")


def write_goldens() -> list[str]:
    from pacctkit.render import render, render_html

    GOLDEN_DIR.mkdir(exist_ok=True)
    outputs = run_five().outputs
    jobs: dict[str, bytes] = {}

    for fmt in ("text", "json", "csv"):
        ext = "txt" if fmt == "text" else fmt
        jobs[f"general.{ext}"] = render(outputs["general"], fmt, "general")
        jobs[f"utime.{ext}"] = render(outputs["utime"], fmt, "utime")
        jobs[f"top20-total.{ext}"] = render(outputs["top20-total"], fmt, "top20-total")
        jobs[f"features.{ext}"] = render(features_five(), fmt, "features")
        jobs[f"error.{ext}"] = render(error_output(), fmt, "mem")
    jobs["utime.svg"] = render(outputs["utime"], "svg", "utime")
    jobs["top20-total.svg"] = render(outputs["top20-total"], "svg", "top20-total")
    jobs["run.html"] = render_html(run_five_fixed_meta(), title="five-record fixture")
    jobs["comparison.txt"] = render(comparison_five(), "text")
    jobs["comparison.json"] = render(comparison_five(), "json")

    for name, data in sorted(jobs.items()):
        (GOLDEN_DIR / name).write_bytes(data)
    return sorted(jobs)


if __name__ == "__main__":
    for name in write_goldens():
        print(f"wrote golden/{name}")
