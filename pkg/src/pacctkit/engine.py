"""Single-pass report engine.

Reports register an observer (called once per record) and a finalizer
(called once after the last record). One traversal of the record source
feeds every registered report; the engine itself never buffers records,
so memory stays flat no matter how long the log is.

A report that raises is dropped from the rest of the run and its output
slot is replaced by a ReportError; the other reports are unaffected.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .acct_format import ProcessRecord
from .errors import DuplicateName, NoReportsRegistered

Observer = Callable[[ProcessRecord], None]
Finalizer = Callable[[], Any]

# stime + utime <= etime should hold for every record; allow for float
# representation noise when the three values came through tick division.
_TIME_RELATION_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class ReportRegistration:
    name: str
    observer: Observer
    finalizer: Finalizer


@dataclass(frozen=True, slots=True)
class ReportError:
    """Output slot for a report whose observer or finalizer raised."""

    report: str
    stage: str  # "observe" or "finalize"
    error_type: str
    message: str


@dataclass(slots=True)
class RunMetadata:
    records_read: int
    warnings: list[str] = field(default_factory=list)
    wall_time_ms: float = 0.0
    source_format: str | None = None


@dataclass(slots=True)
class RunResult:
    """Outputs keyed by report name, in registration order."""

    outputs: dict[str, Any]
    metadata: RunMetadata


class ReportEngine:
    """Holds registrations and drives one traversal over a record source."""

    def __init__(self) -> None:
        self._registrations: list[ReportRegistration] = []

    def register_report(
        self,
        name: str,
        observer: Observer,
        finalizer: Finalizer,
    ) -> ReportRegistration:
        if any(r.name == name for r in self._registrations):
            raise DuplicateName(f"report {name!r} already registered")
        reg = ReportRegistration(name, observer, finalizer)
        self._registrations.append(reg)
        return reg

    def register_all(self, registrations: Iterable[ReportRegistration]) -> None:
        for reg in registrations:
            self.register_report(reg.name, reg.observer, reg.finalizer)

    @property
    def report_names(self) -> list[str]:
        return [r.name for r in self._registrations]

    def run_single_pass(
        self,
        records: Iterable[ProcessRecord],
        source_format: str | None = None,
    ) -> RunResult:
        """Feed every record to every live observer, then finalize.

        records may be any iterable; a RecordStream contributes its
        format label and accumulated warnings to the run metadata.
        """
        if not self._registrations:
            raise NoReportsRegistered("register at least one report before running")
        if source_format is None:
            source_format = getattr(records, "format_label", None)

        started = time.perf_counter()
        failures: dict[str, ReportError] = {}
        active = [(reg.name, reg.observer) for reg in self._registrations]
        n = 0
        time_violations = 0
        for rec in records:
            n += 1
            if rec.stime_s + rec.utime_s > rec.etime_s + _TIME_RELATION_EPS:
                time_violations += 1
            dirty = False
            for name, observe in active:
                try:
                    observe(rec)
                except Exception as exc:
                    failures[name] = ReportError(
                        name, "observe", type(exc).__name__, str(exc)
                    )
                    dirty = True
            if dirty:
                active = [(nm, ob) for nm, ob in active if nm not in failures]

        outputs: dict[str, Any] = {}
        for reg in self._registrations:
            if reg.name in failures:
                outputs[reg.name] = failures[reg.name]
                continue
            try:
                outputs[reg.name] = reg.finalizer()
            except Exception as exc:
                outputs[reg.name] = ReportError(
                    reg.name, "finalize", type(exc).__name__, str(exc)
                )

        warnings = list(getattr(records, "warnings", ()))
        if time_violations:
            warnings.append(
                f"{time_violations} record(s) report stime + utime > etime"
            )
        for out in outputs.values():
            if isinstance(out, ReportError):
                warnings.append(
                    f"report {out.report!r} failed during {out.stage}: "
                    f"{out.error_type}: {out.message}"
                )
        meta = RunMetadata(
            records_read=n,
            warnings=warnings,
            wall_time_ms=(time.perf_counter() - started) * 1000.0,
            source_format=source_format,
        )
        return RunResult(outputs, meta)


def run_single_pass(
    records: Iterable[ProcessRecord],
    registrations: Iterable[ReportRegistration],
    source_format: str | None = None,
) -> RunResult:
    """One-shot convenience: build an engine, register, run."""
    engine = ReportEngine()
    engine.register_all(registrations)
    return engine.run_single_pass(records, source_format)
