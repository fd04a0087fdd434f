"""Deterministic renderers for report outputs.

Every renderer is a pure function from finalized values to bytes: text
tables, versioned JSON, CSV with a header row, self-contained SVG bar
charts (histograms and ranked lists only) and a single HTML page
bundling a whole run. Identical inputs always produce identical bytes;
golden files in the test suite hold each format to that.
"""
from __future__ import annotations

import csv
import html
import io
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any
from xml.sax.saxutils import escape as xml_escape

from .compare import ComparisonResult
from .engine import ReportError, RunResult
from .errors import IncompatibleRender
from .reports import FeatureTable, GeneralSummary, Histogram, RankedList

SCHEMA_VERSION = 1

FORMATS = ("text", "json", "csv", "svg")


@dataclass(frozen=True)
class RenderTarget:
    """Where and how to render: one of FORMATS, path or standard output."""

    format: str
    destination: Path | None = None


def _iso_utc(ts: float | None) -> str | None:
    if ts is None:
        return None
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def _num(v: float) -> str:
    return f"{v:.6g}"


# ---------------------------------------------------------------- payloads


def payload_general(g: GeneralSummary) -> dict:
    return {
        "type": "general_summary",
        "total_commands": g.total_commands,
        "distinct_commands": g.distinct_commands,
        "first_event": g.first_event,
        "first_event_iso": _iso_utc(g.first_event),
        "last_event": g.last_event,
        "last_event_iso": _iso_utc(g.last_event),
        "period_days": g.period_days,
        "period_days_ceil": g.period_days_ceil,
        "distinct_ratio": g.distinct_ratio,
    }


def payload_histogram(h: Histogram) -> dict:
    edges = h.spec.edges
    buckets = []
    for i, label in enumerate(h.spec.labels()):
        buckets.append(
            {
                "label": label,
                "lo": edges[i],
                "hi": edges[i + 1] if i + 1 < len(edges) else None,
                "count": h.counts[i],
                "percent": h.percents[i],
                "percent_display": h.display_percents[i],
            }
        )
    return {
        "type": "histogram",
        "report": h.spec.name,
        "unit": h.spec.unit,
        "total": h.total,
        "sample_of": h.sample_of,
        "buckets": buckets,
    }


def payload_ranked(r: RankedList, report: str | None = None) -> dict:
    return {
        "type": "ranked_list",
        "report": report,
        "metric": r.metric,
        "total_instances": r.total_instances,
        "entries": [
            {"rank": i + 1, "command": comm, "count": count}
            for i, (comm, count) in enumerate(r.entries)
        ],
    }


def payload_features(t: FeatureTable) -> dict:
    return {
        "type": "feature_table",
        "columns": list(t.columns),
        "rows": [list(row) for row in t.rows],
    }


def payload_error(e: ReportError) -> dict:
    return {
        "type": "error",
        "report": e.report,
        "stage": e.stage,
        "error_type": e.error_type,
        "message": e.message,
    }


def payload_comparison(c: ComparisonResult) -> dict:
    return {
        "type": "comparison",
        "label_a": c.label_a,
        "label_b": c.label_b,
        "total_commands_ratio": c.total_commands_ratio,
        "distinct_ratio_ratio": c.distinct_ratio_ratio,
        "order_of_magnitude_gap": c.order_of_magnitude_gap,
        "reports": [
            {
                "report": p.name,
                "a": to_payload(p.a, report=p.name, versioned=False),
                "b": to_payload(p.b, report=p.name, versioned=False),
                "bucket_percent_deltas": (
                    list(p.bucket_percent_deltas)
                    if p.bucket_percent_deltas is not None
                    else None
                ),
            }
            for p in c.paired
        ],
        "only_in_a": list(c.only_in_a),
        "only_in_b": list(c.only_in_b),
    }


def to_payload(output: Any, report: str | None = None, versioned: bool = True) -> dict:
    if isinstance(output, GeneralSummary):
        data = payload_general(output)
    elif isinstance(output, Histogram):
        data = payload_histogram(output)
    elif isinstance(output, RankedList):
        data = payload_ranked(output, report)
    elif isinstance(output, FeatureTable):
        data = payload_features(output)
    elif isinstance(output, ReportError):
        data = payload_error(output)
    elif isinstance(output, ComparisonResult):
        data = payload_comparison(output)
    else:
        raise IncompatibleRender(f"no renderer for {type(output).__name__}")
    if report and data.get("report") is None and "report" in data:
        data["report"] = report
    elif report and "report" not in data:
        data = {"report": report, **data}
    if versioned:
        data["schema_version"] = SCHEMA_VERSION
    return data


def payload_run(result: RunResult) -> dict:
    meta = result.metadata
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "run",
        "metadata": {
            "records_read": meta.records_read,
            "source_format": meta.source_format,
            "wall_time_ms": meta.wall_time_ms,
            "warnings": list(meta.warnings),
        },
        "reports": [
            to_payload(out, report=name, versioned=False)
            for name, out in result.outputs.items()
        ],
    }


def _json_bytes(data: dict) -> bytes:
    return (json.dumps(data, sort_keys=True, indent=2) + "\n").encode()


def render_json(output: Any, report: str | None = None) -> bytes:
    return _json_bytes(to_payload(output, report))


def render_run_json(result: RunResult) -> bytes:
    return _json_bytes(payload_run(result))


# -------------------------------------------------------------------- text


def _text_general(g: GeneralSummary) -> str:
    first = f"{_iso_utc(g.first_event)} ({g.first_event})" if g.first_event is not None else "-"
    last = f"{_iso_utc(g.last_event)} ({g.last_event:.12g})" if g.last_event is not None else "-"
    rows = [
        ("total commands", str(g.total_commands)),
        ("distinct commands", str(g.distinct_commands)),
        ("first event", first),
        ("last event", last),
        ("period (days)", f"{_num(g.period_days)} (ceil {g.period_days_ceil})"),
        ("distinct ratio", _num(g.distinct_ratio)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def _text_histogram(h: Histogram) -> str:
    unit = f" ({h.spec.unit})" if h.spec.unit else ""
    head = f"{h.spec.name}{unit}  total {h.total}"
    if h.sample_of is not None and len(h.counts) and h.total > 0:
        head += "  [bucketed from a bounded sample]"
    labels = h.spec.labels()
    lw = max(len("bucket"), max(len(x) for x in labels))
    cw = max(len("count"), max(len(str(c)) for c in h.counts))
    lines = [head, f"{'bucket':<{lw}}  {'count':>{cw}}  percent"]
    for label, count, pct in zip(labels, h.counts, h.display_percents):
        lines.append(f"{label:<{lw}}  {count:>{cw}}  {pct}%")
    return "\n".join(lines) + "\n"


def _text_ranked(r: RankedList, report: str | None) -> str:
    title = report or "top commands"
    lines = [f"{title} by {r.metric}  ({r.total_instances} instances read)"]
    if not r.entries:
        lines.append("(no commands)")
        return "\n".join(lines) + "\n"
    cw = max(len(c) for c, _ in r.entries)
    for i, (comm, count) in enumerate(r.entries, 1):
        lines.append(f"{i:>2}. {comm:<{cw}}  {count}")
    return "\n".join(lines) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return _num(v)
    return str(v)


def _text_features(t: FeatureTable) -> str:
    lines = ["\t".join(t.columns)]
    for row in t.rows:
        lines.append("\t".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _text_error(e: ReportError) -> str:
    return f"report {e.report!r} failed during {e.stage}: {e.error_type}: {e.message}\n"


def _text_comparison(c: ComparisonResult) -> str:
    lines = [f"comparison: A={c.label_a}  B={c.label_b}"]
    if c.total_commands_ratio is not None:
        lines.append(f"total commands ratio (B/A): {c.total_commands_ratio:.2f}")
    if c.distinct_ratio_ratio is not None:
        lines.append(f"distinct ratio ratio (B/A): {c.distinct_ratio_ratio:.4f}")
        if c.order_of_magnitude_gap:
            lines.append("distinct ratios differ by roughly an order of magnitude")
    for p in c.paired:
        if p.bucket_percent_deltas is None:
            continue
        lines.append("")
        lines.append(f"{p.name}: percent deltas (B - A) per bucket")
        labels = p.a.spec.labels()
        lw = max(len(x) for x in labels)
        for label, delta in zip(labels, p.bucket_percent_deltas):
            lines.append(f"  {label:<{lw}}  {delta:+.2f}")
    if c.only_in_a:
        lines.append(f"only in A: {', '.join(c.only_in_a)}")
    if c.only_in_b:
        lines.append(f"only in B: {', '.join(c.only_in_b)}")
    return "\n".join(lines) + "\n"


def render_text(output: Any, report: str | None = None) -> bytes:
    if isinstance(output, GeneralSummary):
        text = _text_general(output)
    elif isinstance(output, Histogram):
        text = _text_histogram(output)
    elif isinstance(output, RankedList):
        text = _text_ranked(output, report)
    elif isinstance(output, FeatureTable):
        text = _text_features(output)
    elif isinstance(output, ReportError):
        text = _text_error(output)
    elif isinstance(output, ComparisonResult):
        text = _text_comparison(output)
    else:
        raise IncompatibleRender(f"no renderer for {type(output).__name__}")
    return text.encode()


# --------------------------------------------------------------------- csv


def _csv_bytes(rows: list[list]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue().encode()


def render_csv(output: Any, report: str | None = None) -> bytes:
    if isinstance(output, GeneralSummary):
        p = payload_general(output)
        cols = [
            "total_commands", "distinct_commands", "first_event",
            "first_event_iso", "last_event", "last_event_iso",
            "period_days", "period_days_ceil", "distinct_ratio",
        ]
        return _csv_bytes([cols, [p[c] if p[c] is not None else "" for c in cols]])
    if isinstance(output, Histogram):
        rows = [["label", "lo", "hi", "count", "percent", "percent_display"]]
        for b in payload_histogram(output)["buckets"]:
            rows.append(
                [b["label"], b["lo"], "" if b["hi"] is None else b["hi"],
                 b["count"], b["percent"], b["percent_display"]]
            )
        return _csv_bytes(rows)
    if isinstance(output, RankedList):
        rows = [["rank", "command", "count"]]
        for i, (comm, count) in enumerate(output.entries, 1):
            rows.append([i, comm, count])
        return _csv_bytes(rows)
    if isinstance(output, FeatureTable):
        return _csv_bytes([list(output.columns)] + [list(r) for r in output.rows])
    if isinstance(output, ReportError):
        return _csv_bytes(
            [["report", "stage", "error_type", "message"],
             [output.report, output.stage, output.error_type, output.message]]
        )
    raise IncompatibleRender(f"cannot render {type(output).__name__} as CSV")


# --------------------------------------------------------------------- svg

_SVG_FONT = "font-family=\"monospace\""
_BAR_FILL = "#4878a8"


def _svg_bar_chart(title: str, labels: list[str], counts: list[int],
                   annotations: list[str]) -> bytes:
    n = max(len(labels), 1)
    step = 56
    margin_l, margin_r, margin_t, margin_b = 44, 16, 34, 58
    plot_h = 200
    width = margin_l + margin_r + step * n
    height = margin_t + plot_h + margin_b
    base_y = margin_t + plot_h
    peak = max(counts) if counts and max(counts) > 0 else 1
    rotate = max((len(x) for x in labels), default=0) > 6

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{margin_l}" y="18" {_SVG_FONT} font-size="12" fill="#222222">'
        f"{xml_escape(title)}</text>",
        f'<line x1="{margin_l}" y1="{base_y}" x2="{width - margin_r}" y2="{base_y}" '
        f'stroke="#333333" stroke-width="1"/>',
    ]
    for i, (label, count) in enumerate(zip(labels, counts)):
        x = margin_l + i * step + 11
        bar_h = plot_h * count / peak
        y = base_y - bar_h
        cx = x + 17
        parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="34" height="{bar_h:.1f}" '
            f'fill="{_BAR_FILL}"/>'
        )
        parts.append(
            f'<text x="{cx:.1f}" y="{y - 4:.1f}" {_SVG_FONT} font-size="9" '
            f'fill="#222222" text-anchor="middle">{xml_escape(annotations[i])}</text>'
        )
        if rotate:
            parts.append(
                f'<text x="{cx:.1f}" y="{base_y + 12}" {_SVG_FONT} font-size="9" '
                f'fill="#222222" text-anchor="end" '
                f'transform="rotate(-35 {cx:.1f} {base_y + 12})">'
                f"{xml_escape(label)}</text>"
            )
        else:
            parts.append(
                f'<text x="{cx:.1f}" y="{base_y + 14}" {_SVG_FONT} font-size="9" '
                f'fill="#222222" text-anchor="middle">{xml_escape(label)}</text>'
            )
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode()


def render_svg(output: Any, report: str | None = None) -> bytes:
    if isinstance(output, Histogram):
        unit = f" ({output.spec.unit})" if output.spec.unit else ""
        title = f"{output.spec.name}{unit}, total {output.total}"
        annotations = [
            f"{c} ({p}%)" for c, p in zip(output.counts, output.display_percents)
        ]
        return _svg_bar_chart(title, output.spec.labels(), list(output.counts), annotations)
    if isinstance(output, RankedList):
        title = f"{report or 'top commands'} by {output.metric}"
        labels = [comm for comm, _ in output.entries]
        counts = [count for _, count in output.entries]
        return _svg_bar_chart(title, labels, counts, [str(c) for c in counts])
    raise IncompatibleRender(
        f"SVG can only render histograms and ranked lists, not {type(output).__name__}"
    )


# -------------------------------------------------------------------- html

_HTML_STYLE = """
body { font-family: sans-serif; margin: 2em auto; max-width: 60em; color: #222; }
h1 { font-size: 1.4em; } h2 { font-size: 1.1em; margin-top: 2em; }
table { border-collapse: collapse; margin: 0.6em 0; }
th, td { border: 1px solid #bbb; padding: 2px 8px; text-align: right; }
th { background: #eee; } td:first-child, th:first-child { text-align: left; }
.error { color: #a00; }
.meta, footer { color: #666; font-size: 0.85em; }
""".strip()


def _html_table(headers: list[str], rows: list[list]) -> str:
    out = ["<table><tr>"]
    out += [f"<th>{html.escape(str(h))}</th>" for h in headers]
    out.append("</tr>")
    for row in rows:
        out.append("<tr>")
        out += [f"<td>{html.escape(_cell(v))}</td>" for v in row]
        out.append("</tr>")
    out.append("</table>")
    return "".join(out)


def _html_section(name: str, output: Any) -> str:
    body = [f'<section id="{html.escape(name)}"><h2>{html.escape(name)}</h2>']
    if isinstance(output, GeneralSummary):
        p = payload_general(output)
        rows = [
            ["total commands", p["total_commands"]],
            ["distinct commands", p["distinct_commands"]],
            ["first event", p["first_event_iso"] or "-"],
            ["last event", p["last_event_iso"] or "-"],
            ["period (days)", _num(p["period_days"])],
            ["period (whole days)", p["period_days_ceil"]],
            ["distinct ratio", _num(p["distinct_ratio"])],
        ]
        body.append(_html_table(["field", "value"], rows))
    elif isinstance(output, Histogram):
        body.append(render_svg(output, name).decode())
        rows = [
            [label, count, f"{pct}%"]
            for label, count, pct in zip(
                output.spec.labels(), output.counts, output.display_percents
            )
        ]
        body.append(_html_table(["bucket", "count", "percent"], rows))
    elif isinstance(output, RankedList):
        body.append(render_svg(output, name).decode())
        rows = [[i + 1, comm, count] for i, (comm, count) in enumerate(output.entries)]
        body.append(_html_table(["rank", "command", "count"], rows))
    elif isinstance(output, FeatureTable):
        body.append(_html_table(list(output.columns), [list(r) for r in output.rows]))
    elif isinstance(output, ReportError):
        body.append(f'<p class="error">{html.escape(_text_error(output).strip())}</p>')
    else:
        body.append(f"<p>{html.escape(repr(output))}</p>")
    body.append("</section>")
    return "\n".join(body)


def render_html(result: RunResult, title: str = "process accounting report") -> bytes:
    meta = result.metadata
    head = (
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n"
        f"<title>{html.escape(title)}</title>\n<style>\n{_HTML_STYLE}\n</style>\n"
        "</head>\n<body>\n"
        f"<h1>{html.escape(title)}</h1>\n"
        f'<p class="meta">{meta.records_read} records read'
        + (f", source format {html.escape(meta.source_format)}" if meta.source_format else "")
        + f", {meta.wall_time_ms:.0f} ms</p>"
    )
    parts = [head]
    if meta.warnings:
        items = "".join(f"<li>{html.escape(w)}</li>" for w in meta.warnings)
        parts.append(f'<div class="meta"><p>warnings:</p><ul>{items}</ul></div>')
    for name, output in result.outputs.items():
        parts.append(_html_section(name, output))
    parts.append("</body>\n</html>\n")
    return "\n".join(parts).encode()


# ---------------------------------------------------------------- dispatch


def render(output: Any, fmt: str, report: str | None = None) -> bytes:
    """Render one finalized output as text, json, csv or svg bytes."""
    if fmt == "text":
        return render_text(output, report)
    if fmt == "json":
        return render_json(output, report)
    if fmt == "csv":
        return render_csv(output, report)
    if fmt == "svg":
        return render_svg(output, report)
    raise IncompatibleRender(f"unknown render format {fmt!r}")


def render_to(output: Any, target: RenderTarget, report: str | None = None) -> None:
    data = render(output, target.format, report)
    if target.destination is None:
        sys.stdout.buffer.write(data)
    else:
        Path(target.destination).write_bytes(data)


# ------------------------------------------------------------ record dumps

DUMP_COLUMNS = (
    "uid", "gid", "comm", "btime", "utime_s", "stime_s", "etime_s",
    "mem_pages", "io_blocks", "rw_blocks", "flags", "tty",
)


def dump_records_csv(records, out) -> int:
    """Stream normalized records as CSV to a text file object."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DUMP_COLUMNS)
    n = 0
    for r in records:
        writer.writerow(
            [r.uid, r.gid, r.comm, r.btime, r.utime_s, r.stime_s, r.etime_s,
             r.mem_pages, r.io_blocks, r.rw_blocks, r.flags.letters(), r.tty]
        )
        n += 1
    return n


def dump_records_json(records, out) -> int:
    """Stream normalized records as a JSON array to a text file object."""
    out.write("[")
    n = 0
    for r in records:
        prefix = "\n " if n == 0 else ",\n "
        obj = {
            "uid": r.uid, "gid": r.gid, "comm": r.comm, "btime": r.btime,
            "utime_s": r.utime_s, "stime_s": r.stime_s, "etime_s": r.etime_s,
            "mem_pages": r.mem_pages, "io_blocks": r.io_blocks,
            "rw_blocks": r.rw_blocks, "flags": r.flags.letters(), "tty": r.tty,
        }
        out.write(prefix + json.dumps(obj, sort_keys=True))
        n += 1
    out.write("\n]\n" if n else "]\n")
    return n
