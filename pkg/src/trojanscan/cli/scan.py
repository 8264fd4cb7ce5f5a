"""File walking, prefiltering, concurrent scanning and session aggregation."""

from __future__ import annotations

import fnmatch
import functools
import os
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from ..detection import (BIDI_RULES, Diagnostic, Finding, Policy, Severity, decode,
                         flagged_spellings, homoglyph_findings_for, identifier_counts,
                         is_mixed_script, occurrences_of, scan_unit)
from ..lexing import (PLAIN_TEXT, ProfileRegistry, classify_spans, code_slices,
                      default_registry, load_profiles)
from ..tables import UnicodeTables, load_tables
from .._text import TextIndex

FORMATS = ("human", "lines", "sarif")
DEFAULT_EXCLUDES = ("node_modules", "vendor", "third_party")
_BIDI_BYTES = re.compile(rb"\xe2(?:\x80[\xaa-\xae]|\x81[\xa6-\xa9])")


class ConfigError(ValueError):
    pass


def prefilter(data: bytes) -> bool:
    """False only if ``data`` cannot produce a finding: every rule needs a non-ASCII char."""
    return not data.isascii()


def bidi_prefilter(data: bytes) -> bool:
    """Second stage for bidi-only scans: UTF-8 of U+202A..U+202E or U+2066..U+2069."""
    return _BIDI_BYTES.search(data) is not None


@dataclass(frozen=True)
class ScanConfig:
    paths: tuple
    mode: str = "default"
    format: str = "human"
    baseline: str | None = None
    write_baseline: str | None = None
    lang: str | None = None
    include: tuple = ()
    exclude: tuple = ()
    jobs: int = 1
    use_prefilter: bool = True
    bidi_only: bool = False
    all_files: bool = False
    profiles_file: str | None = None
    tables_dir: str | None = None
    allow_codepoints: frozenset = frozenset()
    allow_identifier_pairs: frozenset = frozenset()
    mixed_script_check: bool = True
    sanitize_out: str | None = None

    def __post_init__(self):
        if not self.paths:
            raise ConfigError("at least one path is required")
        object.__setattr__(self, "paths", tuple(str(p) for p in self.paths))
        if self.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r} (expected one of "
                              f"{', '.join(FORMATS)})")

    def policy(self) -> Policy:
        return Policy(mode=self.mode, allow_codepoints=self.allow_codepoints,
                      allow_identifier_pairs=self.allow_identifier_pairs,
                      mixed_script_check=self.mixed_script_check)


# -- walking ---------------------------------------------------------------

def _matches(rel: str, patterns) -> bool:
    name = rel.rsplit("/", 1)[-1]
    return any(fnmatch.fnmatchcase(rel, p) or fnmatch.fnmatchcase(name, p) for p in patterns)


def iter_files(config: ScanConfig, diagnostics: list) -> Iterator[str]:
    """Files to scan, in a deterministic order. Missing paths become diagnostics."""
    for root in config.paths:
        p = Path(root)
        if p.is_symlink() and not p.exists():
            diagnostics.append(Diagnostic(Severity.ERROR, root, "broken symlink"))
            continue
        if p.is_file():
            if not _matches(p.name, config.exclude):
                yield root
            continue
        if not p.is_dir():
            diagnostics.append(Diagnostic(Severity.ERROR, root, "no such file or directory"))
            continue
        for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
            rel_dir = os.path.relpath(dirpath, root).replace(os.sep, "/")
            rel_dir = "" if rel_dir == "." else rel_dir + "/"
            keep = []
            for d in sorted(dirnames):
                if not config.all_files and (d.startswith(".") or d in DEFAULT_EXCLUDES):
                    continue
                if _matches(rel_dir + d, config.exclude):
                    continue
                keep.append(d)
            dirnames[:] = keep
            for name in sorted(filenames):
                rel = rel_dir + name
                full = os.path.join(dirpath, name)
                if os.path.islink(full):
                    continue
                if not config.all_files and name.startswith("."):
                    continue
                if config.include and not _matches(rel, config.include):
                    continue
                if _matches(rel, config.exclude):
                    continue
                yield Path(full).as_posix()


# -- per-file work -------------------------------------------------------------

@dataclass
class FileResult:
    path: str
    size: int = 0
    passed: bool = False  # went through the full scan
    ascii: bool = True
    findings: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    error: bool = False
    identifiers: Counter = field(default_factory=Counter)
    occurrences: list = field(default_factory=list)  # (IdentifierOccurrence, line text)


@dataclass(frozen=True)
class _WorkerSetup:
    policy: Policy
    lang: str | None
    profiles_file: str | None
    tables_dir: str | None
    use_prefilter: bool
    bidi_only: bool


_STATE: dict = {}


def _init_worker(setup: _WorkerSetup):
    _STATE["setup"] = setup
    _STATE["tables"] = load_tables(setup.tables_dir)
    _STATE["registry"] = (load_profiles(setup.profiles_file) if setup.profiles_file
                          else default_registry())


def _profile_for(registry: ProfileRegistry, setup: _WorkerSetup, path: str):
    if setup.lang:
        return registry[setup.lang]
    return registry.for_path(path) or PLAIN_TEXT


def scan_file(path: str) -> FileResult:
    setup: _WorkerSetup = _STATE["setup"]
    tables: UnicodeTables = _STATE["tables"]
    res = FileResult(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        res.error = True
        res.diagnostics.append(Diagnostic(Severity.ERROR, path,
                                          f"cannot read: {exc.strerror or exc}"))
        return res
    res.size = len(data)
    res.ascii = data.isascii()
    if setup.use_prefilter and not prefilter(data):
        return res
    if setup.bidi_only and not bidi_prefilter(data):
        return res
    res.passed = True
    text, diags = decode(data, path)
    res.diagnostics.extend(diags)
    profile = _profile_for(_STATE["registry"], setup, path)
    if text.isascii():
        # No identifiers worth collecting; the ASCII spellings are counted later on demand.
        res.findings = scan_unit(text, profile, tables, setup.policy, path,
                                 homoglyphs=False).findings
        return res
    index = TextIndex(text)
    spans = classify_spans(text, profile, index)
    report = scan_unit(text, profile, tables, setup.policy, path, homoglyphs=False, spans=spans)
    res.findings = report.findings
    if setup.bidi_only:
        res.findings = [f for f in res.findings if f.rule in BIDI_RULES]
        return res
    # Identifier data for the session-wide homoglyph pass.
    res.identifiers = identifier_counts(text, profile, spans)
    wanted = {s for s in res.identifiers if not s.isascii()}
    for o in occurrences_of(text, profile, wanted, path, index, spans):
        lo, hi = index.line_bounds(o.line)
        res.occurrences.append((o, text[lo:hi]))
    return res


@functools.lru_cache(maxsize=8)
def _word_re(keys: tuple) -> re.Pattern:
    return re.compile(rb"\b(?:" + b"|".join(re.escape(k.encode()) for k in keys) + rb")\b")


def _count_ascii_candidates(path: str, keys: tuple) -> Counter:
    """Code-span occurrences of candidate ASCII spellings in an ASCII-only file."""
    setup: _WorkerSetup = _STATE["setup"]
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError:
        return Counter()
    # Substring tests are much cheaper than the word regex and rule out most files.
    if not any(k.encode() in data for k in keys) or not _word_re(keys).search(data):
        return Counter()
    text = data.decode("ascii")
    profile = _profile_for(_STATE["registry"], setup, path)
    wanted = set(keys)
    counts: Counter = Counter()
    code = "\n".join(text[a:b] for a, b in code_slices(text, profile))
    counts.update(s for s in profile.identifier_re.findall(code) if s in wanted)
    return counts


# -- session -------------------------------------------------------------------

@dataclass
class SessionSummary:
    findings: list = field(default_factory=list)  # active, sorted
    suppressed: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    files_total: int = 0
    files_scanned: int = 0
    bytes_total: int = 0
    bytes_scanned: int = 0
    scanned_paths: list = field(default_factory=list)
    tables_version: str = ""
    confusables_version: str = ""
    operational_error: bool = False

    @property
    def selectivity(self) -> float:
        return self.files_scanned / self.files_total if self.files_total else 0.0

    @property
    def exit_code(self) -> int:
        if self.operational_error:
            return 2
        return 1 if self.findings else 0

    def counts(self) -> dict:
        return dict(sorted(Counter(str(f.rule) for f in self.findings).items()))


def _session_homoglyphs(results: list[FileResult], policy: Policy, tables: UnicodeTables,
                        pool) -> list[Finding]:
    counts: Counter = Counter()
    for r in results:
        counts.update(r.identifiers)
    non_ascii = [s for s in counts if not s.isascii()]
    if not non_ascii:
        return []
    # ASCII spellings in files the prefilter skipped can still complete a group.
    keys = {tables.skeleton(s, policy.casefold) for s in non_ascii}
    ascii_keys = sorted(k for k in keys if k.isascii() and k)
    skipped = [r.path for r in results if r.ascii and not r.error]
    if ascii_keys and skipped and not policy.casefold:
        extra = pool(_count_ascii_candidates, skipped, tuple(ascii_keys))
        for c in extra:
            counts.update(c)
    flagged = flagged_spellings(counts, tables, policy)
    mixed = set()
    if policy.mixed_script_check:
        mixed = {s for s in non_ascii if is_mixed_script(tables, s)}
    if not flagged and not mixed:
        return []
    out = []
    for r in results:
        for occ, line_text in r.occurrences:
            if occ.text in flagged or occ.text in mixed:
                out.extend(homoglyph_findings_for(occ, flagged, mixed, tables, policy, line_text))
    return out


def walk_and_scan(config: ScanConfig, tables: UnicodeTables | None = None,
                  registry: ProfileRegistry | None = None) -> SessionSummary:
    from .report import fingerprints, load_baseline

    setup = _WorkerSetup(config.policy(), config.lang, config.profiles_file, config.tables_dir,
                         config.use_prefilter, config.bidi_only)
    tables = tables or load_tables(config.tables_dir)
    registry = registry or (load_profiles(config.profiles_file) if config.profiles_file
                            else default_registry())
    if config.lang and config.lang not in registry.names():
        raise ConfigError(f"unknown language profile {config.lang!r} (known: "
                          f"{', '.join(registry.names())})")
    baseline = load_baseline(config.baseline) if config.baseline else set()
    summary = SessionSummary(tables_version=tables.version,
                             confusables_version=tables.confusables_version)
    files = list(iter_files(config, summary.diagnostics))
    if summary.diagnostics:
        summary.operational_error = True

    executor = None
    if config.jobs > 1 and len(files) > 1:
        executor = ProcessPoolExecutor(max_workers=config.jobs, initializer=_init_worker,
                                       initargs=(setup,))

    def pool(fn, items, *args):
        if executor is None:
            return [fn(x, *args) for x in items]
        chunk = max(1, len(items) // (config.jobs * 8))
        return list(executor.map(fn, items, *([a] * len(items) for a in args), chunksize=chunk))

    saved = dict(_STATE)
    _STATE.update(setup=setup, tables=tables, registry=registry)
    try:
        results = pool(scan_file, files)
        findings = [f for r in results for f in r.findings]
        if not config.bidi_only:
            findings += _session_homoglyphs(results, setup.policy, tables, pool)
    finally:
        _STATE.clear()
        _STATE.update(saved)
        if executor is not None:
            executor.shutdown()

    for r in results:
        summary.files_total += 1
        summary.bytes_total += r.size
        if r.passed:
            summary.files_scanned += 1
            summary.bytes_scanned += r.size
            summary.scanned_paths.append(r.path)
        summary.diagnostics.extend(r.diagnostics)
        summary.operational_error |= r.error
    findings.sort(key=Finding.sort_key)
    if baseline:
        fps = fingerprints(findings)
        summary.findings = [f for f, fp in zip(findings, fps) if fp not in baseline]
        summary.suppressed = [f for f, fp in zip(findings, fps) if fp in baseline]
    else:
        summary.findings = findings
    return summary
