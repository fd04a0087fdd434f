"""Command line interface.

Subcommands:
    summarize <file>              general report as text
    report <file> --name N        one of the nine standard reports
    all <file>                    all nine reports as one HTML page or JSON
    compare <fileA> <fileB>       side by side deltas between two logs
    features <file>               per-user feature vectors as CSV
    gen                           write a synthetic log plus truth sidecar
    dump <file>                   normalized records as CSV or JSON

Exit codes: 0 success, 1 usage or configuration problem, 2 unreadable or
truncated log format, 3 input/output failure. Diagnostics go to standard
error only; report bytes go to --out or standard output.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from .acct_format import (
    DEFAULT_AHZ,
    Endianness,
    FormatKind,
    detect_format,
    open_record_stream,
)
from .compare import compare_reports
from .config import AnalysisConfig, load_config, load_passwd
from .engine import ReportEngine, RunResult
from .errors import (
    ConfigError,
    IncompatibleRender,
    PacctError,
    TruncatedFile,
    UnknownFormat,
)
from .render import (
    FORMATS,
    RenderTarget,
    dump_records_csv,
    dump_records_json,
    render,
    render_html,
    render_run_json,
    render_to,
)
from .reports import STANDARD_REPORT_NAMES, standard_reports, user_features
from .synthgen import PROFILE_NAMES, GeneratorConfig, generate_log, get_profile

_KIND_NAMES = {
    "linux": FormatKind.LINUX64,
    "linux64": FormatKind.LINUX64,
    "sysv": FormatKind.SYSV32,
    "sysv32": FormatKind.SYSV32,
}


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--ahz", type=int, default=None,
                     help=f"clock ticks per second (default {DEFAULT_AHZ})")
    sub.add_argument("--format-kind", choices=sorted(_KIND_NAMES),
                     default=None, help="skip detection and force a record layout")
    sub.add_argument("--endian", choices=["little", "big"], default=None,
                     help="byte order when forcing a layout")
    sub.add_argument("--passwd", default=None,
                     help="passwd-style file mapping uids to names")
    sub.add_argument("--config", default=None, help="JSON analysis config")
    sub.add_argument("--quiet", action="store_true",
                     help="suppress warnings on standard error")


def build_parser() -> _Parser:
    parser = _Parser(prog="pacctkit",
                     description="process accounting log analytics")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("summarize", help="general report as text")
    p.add_argument("file")
    _common_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = subs.add_parser("report", help="render one standard report")
    p.add_argument("file")
    p.add_argument("--name", required=True, choices=STANDARD_REPORT_NAMES)
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--out", default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_report)

    p = subs.add_parser("all", help="all nine reports as one page")
    p.add_argument("file")
    p.add_argument("--format", choices=["html", "json"], default="html")
    p.add_argument("--out", default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_all)

    p = subs.add_parser("compare", help="compare two logs report by report")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_compare)

    p = subs.add_parser("features", help="per-user feature vectors")
    p.add_argument("file")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_features)

    p = subs.add_parser("gen", help="generate a synthetic log")
    p.add_argument("--profile", required=True, choices=PROFILE_NAMES)
    p.add_argument("--records", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--users", type=int, default=None,
                   help="user count (default: profile default)")
    p.add_argument("--format-kind", choices=sorted(_KIND_NAMES), default="linux")
    p.add_argument("--endian", choices=["little", "big"], default="little")
    p.add_argument("--ahz", type=int, default=DEFAULT_AHZ)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None,
                   help="truth sidecar path (default: OUT.truth.json)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("dump", help="normalized records as CSV or JSON")
    p.add_argument("file")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_dump)

    return parser


# --------------------------------------------------------------- plumbing


def _load_settings(args) -> AnalysisConfig:
    cfg = load_config(args.config) if args.config else AnalysisConfig()
    if args.ahz is not None:
        if args.ahz <= 0:
            raise ConfigError("--ahz must be positive")
        cfg.ahz = args.ahz
    if args.passwd is not None:
        cfg.passwd_path = Path(args.passwd)
    return cfg


def _open_stream(args, cfg: AnalysisConfig, path: str):
    if args.endian is not None and args.format_kind is None:
        raise ConfigError("--endian requires --format-kind")
    if args.format_kind is not None:
        kind = _KIND_NAMES[args.format_kind]
        order = Endianness.BIG if args.endian == "big" else Endianness.LITTLE
        return open_record_stream(path, kind, order, ahz=cfg.ahz)
    kind, order = detect_format(path)
    return open_record_stream(path, kind, order, ahz=cfg.ahz)


def _run_standard(args, cfg: AnalysisConfig, path: str) -> RunResult:
    engine = ReportEngine()
    engine.register_all(standard_reports(cfg.edges or None, cfg.mem_adaptive))
    stream = _open_stream(args, cfg, path)
    result = engine.run_single_pass(stream)
    for warning in result.metadata.warnings:
        _say(args, f"warning: {warning}")
    return result


def _emit(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(out).write_bytes(data)


# ------------------------------------------------------------- subcommands


def cmd_summarize(args) -> int:
    cfg = _load_settings(args)
    result = _run_standard(args, cfg, args.file)
    _emit(render(result.outputs["general"], "text", "general"), None)
    return 0


def cmd_report(args) -> int:
    cfg = _load_settings(args)
    result = _run_standard(args, cfg, args.file)
    output = result.outputs[args.name]
    render_to(output, RenderTarget(args.format, Path(args.out) if args.out else None),
              report=args.name)
    return 0


def cmd_all(args) -> int:
    cfg = _load_settings(args)
    result = _run_standard(args, cfg, args.file)
    if args.format == "html":
        data = render_html(result, title=f"process accounting report: {args.file}")
    else:
        data = render_run_json(result)
    _emit(data, args.out)
    return 0


def cmd_compare(args) -> int:
    cfg = _load_settings(args)
    result_a = _run_standard(args, cfg, args.file_a)
    result_b = _run_standard(args, cfg, args.file_b)
    comparison = compare_reports(result_a, result_b,
                                 label_a=args.file_a, label_b=args.file_b)
    _emit(render(comparison, args.format), args.out)
    return 0


def cmd_features(args) -> int:
    cfg = _load_settings(args)
    names = cfg.user_names()
    time_edges = {k: v for k, v in cfg.edges.items()
                  if k in ("stime", "utime", "etime")}
    engine = ReportEngine()
    engine.register_all([user_features(time_edges or None, names or None)])
    stream = _open_stream(args, cfg, args.file)
    result = engine.run_single_pass(stream)
    for warning in result.metadata.warnings:
        _say(args, f"warning: {warning}")
    _emit(render(result.outputs["features"], args.format, "features"), args.out)
    return 0


def cmd_gen(args) -> int:
    profile = get_profile(args.profile)
    try:
        cfg = GeneratorConfig(
            profile=profile,
            n_users=args.users if args.users is not None else profile.default_users,
            n_records=args.records,
            seed=args.seed,
            format=_KIND_NAMES[args.format_kind],
            order=Endianness.BIG if args.endian == "big" else Endianness.LITTLE,
            ahz=args.ahz,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    summary = generate_log(cfg, args.out)
    truth_path = Path(args.truth) if args.truth else Path(args.out + ".truth.json")
    truth_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _say(args, f"wrote {summary['records_written']} records to {args.out} "
               f"(truth: {truth_path})")
    return 0


def cmd_dump(args) -> int:
    cfg = _load_settings(args)
    stream = _open_stream(args, cfg, args.file)
    writer = dump_records_csv if args.format == "csv" \
        else dump_records_json
    if args.out is None:
        out = io.TextIOWrapper(sys.stdout.buffer, newline="", write_through=True)
        writer(stream, out)
        out.detach()
    else:
        with open(args.out, "w", newline="") as out:
            writer(stream, out)
    for warning in stream.warnings:
        _say(args, f"warning: {warning}")
    return 0


# ------------------------------------------------------------------- main


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"pacctkit: config error: {exc}", file=sys.stderr)
        return 1
    except (UnknownFormat, TruncatedFile) as exc:
        print(f"pacctkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except IncompatibleRender as exc:
        print(f"pacctkit: {exc}", file=sys.stderr)
        return 1
    except PacctError as exc:
        print(f"pacctkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); die quietly like cat does
        try:
            sys.stdout.close()
        except OSError:
            pass
        return 3
    except OSError as exc:
        print(f"pacctkit: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
