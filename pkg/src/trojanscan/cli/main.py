"""Command line entry point: ``trojanscan scan|sanitize|preview|forge|rules``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .. import __version__
from ..detection import Policy, PolicyError, scan_unit, decode
from ..forge import ForgeError, forge_corpus
from ..lexing import PLAIN_TEXT, ProfileError, default_registry, load_profiles
from ..rendering import RenderStyle, render_preview, sanitize, visualize
from ..tables import TableLoadError, load_tables
from .report import emit_report, rules_reference, write_baseline
from .scan import FORMATS, ConfigError, ScanConfig, iter_files, walk_and_scan

EXIT_OPERATIONAL = 2


def _codepoint(s: str) -> int:
    s = s.strip().upper()
    for prefix in ("U+", "0X", "\\U"):
        if s.startswith(prefix):
            s = s[len(prefix):]
    try:
        cp = int(s, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a code point: {s!r}") from None
    if not 0 <= cp <= 0x10FFFF:
        raise argparse.ArgumentTypeError(f"code point out of range: {s!r}")
    return cp


def _pair(s: str) -> tuple[str, str]:
    parts = s.split(",")
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected IDENT,IDENT: {s!r}")
    return parts[0], parts[1]


def _positive(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _add_walk_options(p: argparse.ArgumentParser):
    p.add_argument("paths", nargs="+", help="files or directories")
    p.add_argument("--lang", help="force a language profile for every file")
    p.add_argument("--profiles", metavar="FILE", help="language profile JSON to use")
    p.add_argument("--include", action="append", default=[], metavar="GLOB")
    p.add_argument("--exclude", action="append", default=[], metavar="GLOB")
    p.add_argument("--all", dest="all_files", action="store_true",
                   help="also walk hidden and vendored directories")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trojanscan",
        description="Find bidi reordering, homoglyph identifiers and invisible characters "
                    "in source code.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--tables", metavar="DIR", help="Unicode data directory")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan files and report findings")
    _add_walk_options(scan)
    scan.add_argument("--mode", choices=("strict", "default", "permissive"), default="default")
    scan.add_argument("--format", choices=FORMATS, default="human")
    scan.add_argument("--output", "-o", metavar="FILE", help="write the report here")
    scan.add_argument("--baseline", metavar="FILE", help="suppress findings listed here")
    scan.add_argument("--write-baseline", metavar="FILE",
                      help="write fingerprints of all current findings")
    scan.add_argument("--jobs", "-j", type=_positive, default=1)
    scan.add_argument("--no-prefilter", dest="prefilter", action="store_false",
                      help="scan ASCII-only files too")
    scan.add_argument("--bidi-only", action="store_true",
                      help="only bidi rules, with a byte-level second-stage filter")
    scan.add_argument("--allow-codepoint", action="append", default=[], type=_codepoint,
                      metavar="U+XXXX")
    scan.add_argument("--allow-pair", action="append", default=[], type=_pair,
                      metavar="IDENT,IDENT", help="identifier pair not to report")
    scan.add_argument("--no-mixed-script", dest="mixed_script", action="store_false")
    scan.add_argument("--color", choices=("auto", "always", "never"), default="auto")

    san = sub.add_parser("sanitize", help="write copies with hidden characters neutralized")
    _add_walk_options(san)
    san.add_argument("--out", metavar="DIR")
    san.add_argument("--strip", action="store_true",
                     help="delete flagged characters everywhere instead of escaping")
    san.add_argument("--in-place", action="store_true", help="rewrite the input files")
    san.add_argument("--allow-codepoint", action="append", default=[], type=_codepoint,
                     metavar="U+XXXX")

    prev = sub.add_parser("preview", help="show a file as a bidi-aware viewer renders it")
    prev.add_argument("file")
    prev.add_argument("--escape", action="store_true",
                      help="show flagged characters as escapes instead")
    prev.add_argument("--lang")
    prev.add_argument("--profiles", metavar="FILE")

    fg = sub.add_parser("forge", help="write the self-test corpus of attack samples")
    fg.add_argument("--out", required=True, metavar="DIR")
    fg.add_argument("--profile", action="append", metavar="NAME",
                    help="limit to these profiles (default: all)")
    fg.add_argument("--profiles", metavar="FILE")

    rl = sub.add_parser("rules", help="print the rule reference")
    rl.add_argument("--markdown", action="store_true")
    return parser


def _registry(args):
    return load_profiles(args.profiles) if getattr(args, "profiles", None) else default_registry()


def _use_color(choice: str, stream) -> bool:
    if choice == "always":
        return True
    if choice == "never" or os.environ.get("NO_COLOR"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _write_stdout(data: bytes):
    sys.stdout.flush()
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def cmd_scan(args) -> int:
    config = ScanConfig(
        paths=tuple(args.paths), mode=args.mode, format=args.format, baseline=args.baseline,
        write_baseline=args.write_baseline, lang=args.lang, include=tuple(args.include),
        exclude=tuple(args.exclude), jobs=args.jobs, use_prefilter=args.prefilter,
        bidi_only=args.bidi_only, all_files=args.all_files, profiles_file=args.profiles,
        tables_dir=args.tables, allow_codepoints=frozenset(args.allow_codepoint),
        allow_identifier_pairs=frozenset(args.allow_pair), mixed_script_check=args.mixed_script)
    config.policy()  # validate before walking
    summary = walk_and_scan(config)
    if config.write_baseline:
        n = write_baseline(summary, config.write_baseline)
        print(f"wrote {n} fingerprints to {config.write_baseline}", file=sys.stderr)
    if args.output:
        data = emit_report(summary, config.format, color=False)
        try:
            Path(args.output).write_bytes(data)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.output}: {exc.strerror or exc}") from None
    else:
        color = config.format == "human" and _use_color(args.color, sys.stdout)
        _write_stdout(emit_report(summary, config.format, color=color))
    if config.format != "human":
        for d in summary.diagnostics:
            print(f"{d.path}: {d.severity}: {d.message}", file=sys.stderr)
    return summary.exit_code


def cmd_sanitize(args) -> int:
    if not args.out and not args.in_place:
        raise ConfigError("sanitize needs --out DIR (or --in-place)")
    tables = load_tables(args.tables)
    registry = _registry(args)
    if args.lang and args.lang not in registry.names():
        raise ConfigError(f"unknown language profile {args.lang!r}")
    policy = Policy(allow_codepoints=frozenset(args.allow_codepoint))
    style = RenderStyle(strip=args.strip)
    out_root = Path(args.out) if args.out else None
    changed = total = 0
    failed = False
    for root in args.paths:
        diags: list = []
        config = ScanConfig(paths=(root,), include=tuple(args.include),
                            exclude=tuple(args.exclude), all_files=args.all_files)
        root_path = Path(root)
        for path in iter_files(config, diags):
            total += 1
            rel = (Path(path).name if root_path.is_file()
                   else Path(path).relative_to(root_path).as_posix())
            try:
                data = Path(path).read_bytes()
            except OSError as exc:
                print(f"{path}: error: cannot read: {exc.strerror or exc}", file=sys.stderr)
                failed = True
                continue
            text = data.decode("utf-8", errors="surrogateescape")
            profile = (registry[args.lang] if args.lang else registry.for_path(path)) or PLAIN_TEXT
            clean = sanitize(text, policy, style, tables=tables, profile=profile)
            out = clean.encode("utf-8", errors="surrogateescape")
            if clean != text:
                changed += 1
            dest = Path(path) if args.in_place else out_root / rel
            if args.in_place and clean == text:
                continue
            try:
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_bytes(out)
            except OSError as exc:
                print(f"{dest}: error: cannot write: {exc.strerror or exc}", file=sys.stderr)
                failed = True
        for d in diags:
            print(f"{d.path}: {d.severity}: {d.message}", file=sys.stderr)
            failed = True
    where = "in place" if args.in_place else f"to {out_root}"
    print(f"sanitized {changed} of {total} files {where}")
    return EXIT_OPERATIONAL if failed else 0


def cmd_preview(args) -> int:
    tables = load_tables(args.tables)
    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.file}: {exc.strerror or exc}") from None
    text, _ = decode(data, args.file)
    if args.escape:
        registry = _registry(args)
        profile = (registry[args.lang] if args.lang else registry.for_path(args.file)) or PLAIN_TEXT
        report = scan_unit(text, profile, tables, path=args.file)
        out = visualize(text, report.findings, tables=tables)
    else:
        out = render_preview(text, tables)
    _write_stdout(out.encode("utf-8", errors="replace"))
    return 0


def cmd_forge(args) -> int:
    tables = load_tables(args.tables)
    registry = _registry(args)
    names = args.profile or registry.names()
    unknown = [n for n in names if n not in registry.names()]
    if unknown:
        raise ConfigError(f"unknown profile(s): {', '.join(unknown)}")
    entries = forge_corpus(args.out, names, tables, registry)
    samples = sum(e.kind == "sample" for e in entries)
    controls = sum(e.kind == "control" for e in entries)
    skipped = [e for e in entries if e.kind == "skipped"]
    print(f"wrote {samples} samples and {controls} controls to {args.out}")
    for e in skipped:
        print(f"skipped {e.variant} for {e.profile}: {e.reason}")
    return 0


def cmd_rules(args) -> int:
    sys.stdout.write(rules_reference(markdown=args.markdown))
    return 0


COMMANDS = {"scan": cmd_scan, "sanitize": cmd_sanitize, "preview": cmd_preview,
            "forge": cmd_forge, "rules": cmd_rules}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PolicyError, ProfileError, TableLoadError, ForgeError) as exc:
        print(f"trojanscan: error: {exc}", file=sys.stderr)
        return EXIT_OPERATIONAL
    except KeyboardInterrupt:
        return 130

