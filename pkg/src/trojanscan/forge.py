"""Known-bad samples for self-testing the scanner.

Every sample is deterministic and starts with an ASCII header comment naming
its variant, so corpora can be audited by eye. A clean control with the same
shape accompanies each sample.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable

from .lexing import LanguageProfile, ProfileRegistry, default_registry
from .tables import UnicodeTables, load_tables

VARIANTS = ("stretched_string", "homoglyph_function", "comment_spoof")
EXPECTED_RULE = {
    "stretched_string": "BIDI_UNTERMINATED",
    "homoglyph_function": "CONFUSABLE_IDENTIFIERS",
    "comment_spoof": "TERMINATOR_SPOOF",
}
HEADER_TAG = "trojanscan-forge"
MANIFEST_NAME = "manifest.jsonl"

RLO, LRI, PDI, ZWSP = "‮", "⁦", "⁩", "​"

# Latin letter -> Cyrillic lookalike, used to spell the trojan identifier.
_LOOKALIKES = {"a": "а", "c": "с", "e": "е", "o": "о", "p": "р",
               "x": "х", "y": "у", "i": "і", "s": "ѕ"}


class ForgeError(ValueError):
    pass


@dataclass(frozen=True)
class ForgeSpec:
    variant: str
    profile: str
    payload: str = "user"
    comment: str = "Check if admin"
    identifier: str = "print"


# Templates use {lc} line comment, {bo}/{bc} block comment, {q} string quote.
_FAMILY = {"c": "c", "cpp": "c", "python": "python", "javascript": "javascript",
           "rust": "rust", "go": "go"}

_STRETCHED = {
    "c": ('#include <stdio.h>\n#include <string.h>\n\nint main() {{\n'
          '    char* access_level = {q}{payload}{q};\n'
          '    if (strcmp(access_level, {q}{trigger}{q})) {{\n'
          '        printf({q}You are an admin.\\n{q});\n    }}\n    return 0;\n}}\n'),
    "python": ('access_level = {q}{payload}{q}\n'
               'if access_level != {q}{trigger}{q}:\n'
               '    print({q}You are an admin.{q})\n'),
    "javascript": ('const accessLevel = {q}{payload}{q};\n'
                   'if (accessLevel != {q}{trigger}{q}) {{\n'
                   '    console.log({q}You are an admin.{q});\n}}\n'),
    "rust": ('fn main() {{\n    let access_level = {q}{payload}{q};\n'
             '    if access_level != {q}{trigger}{q} {{\n'
             '        println!({q}You are an admin.{q});\n    }}\n}}\n'),
    "go": ('package main\n\nimport {q}fmt{q}\n\nfunc main() {{\n'
           '\taccessLevel := {q}{payload}{q}\n'
           '\tif accessLevel != {q}{trigger}{q} {{\n'
           '\t\tfmt.Println({q}You are an admin.{q})\n\t}}\n}}\n'),
}

_HOMOGLYPH = {
    "c": ('#include <stdio.h>\n\nvoid {ident}(const char *msg) {{ puts(msg); }}\n'
          'void {trojan}(const char *msg) {{ {bo} differs from the original {bc} }}\n\n'
          'int main() {{\n    {ident}({q}{payload}{q});\n    {ident}({q}checked{q});\n'
          '    {ident}({q}ready{q});\n    {trojan}({q}You are an admin.{q});\n    return 0;\n}}\n'),
    "python": ('def {trojan}(msg):\n    pass  {lc} differs from the original\n\n\n'
               '{ident}({q}{payload}{q})\n{ident}({q}checked{q})\n{ident}({q}ready{q})\n'
               '{trojan}({q}You are an admin.{q})\n'),
    "javascript": ('function {trojan}(msg) {{ {lc} differs from the original\n}}\n\n'
                   'const {ident} = console.log;\n{ident}({q}{payload}{q});\n'
                   '{ident}({q}checked{q});\n{trojan}({q}You are an admin.{q});\n'),
    "rust": ('fn {ident}(msg: &str) {{ println!({q}{{}}{q}, msg); }}\n'
             'fn {trojan}(_msg: &str) {{ {lc} differs from the original\n}}\n\n'
             'fn main() {{\n    {ident}({q}{payload}{q});\n    {ident}({q}checked{q});\n'
             '    {trojan}({q}You are an admin.{q});\n}}\n'),
    "go": ('package main\n\nimport {q}fmt{q}\n\nfunc {ident}(msg string) {{ fmt.Println(msg) }}\n'
           'func {trojan}(msg string) {{ {lc} differs from the original\n}}\n\n'
           'func main() {{\n\t{ident}({q}{payload}{q})\n\t{ident}({q}checked{q})\n'
           '\t{trojan}({q}You are an admin.{q})\n}}\n'),
}

_SPOOF = {
    "c": ('int check(int authorized) {{\n'
          '    {bo} Return early unless the caller is authorized {close}'
          ' if (!authorized) return 0; {tail}\n    return 1;\n}}\n'),
    "javascript": ('function check(authorized) {{\n'
                   '    {bo} Return early unless the caller is authorized {close}'
                   ' if (!authorized) return false; {tail}\n    return true;\n}}\n'),
    "rust": ('fn check(authorized: bool) -> bool {{\n'
             '    {bo} Return early unless the caller is authorized {close}'
             ' if !authorized {{ return false; }} {tail}\n    true\n}}\n'),
    "go": ('func check(authorized bool) bool {{\n'
           '\t{bo} Return early unless the caller is authorized {close}'
           ' if !authorized {{ return false }} {tail}\n\treturn true\n}}\n'),
}


def _family(profile: LanguageProfile) -> str:
    return _FAMILY.get(profile.name, "c")


def _tokens(profile: LanguageProfile) -> dict:
    lc = profile.line_comments[0] if profile.line_comments else None
    bc = profile.block_comments[0] if profile.block_comments else None
    q = next((s.open for s in profile.strings if s.open == s.close and len(s.open) == 1),
             profile.strings[0].open if profile.strings else '"')
    return {"lc": lc, "bo": bc.open if bc else None, "bc": bc.close if bc else None, "q": q,
            "block": bc}


def header(spec: ForgeSpec, profile: LanguageProfile, control: bool = False) -> str:
    tok = _tokens(profile)
    kind = "control" if control else "sample"
    body = f"{HEADER_TAG}: variant={spec.variant} profile={profile.name} kind={kind}"
    if tok["lc"]:
        return f"{tok['lc']} {body}\n"
    if tok["bo"]:
        return f"{tok['bo']} {body} {tok['bc']}\n"
    raise ForgeError(f"profile {profile.name!r} has no comment syntax for the sample header")


def trojan_spelling(identifier: str, tables: UnicodeTables | None = None) -> str:
    """``identifier`` with its first lookalike-able letter swapped for a Cyrillic twin."""
    for i, ch in enumerate(identifier):
        if ch in _LOOKALIKES:
            out = identifier[:i] + _LOOKALIKES[ch] + identifier[i + 1:]
            if tables is None or tables.skeleton(out) == tables.skeleton(identifier):
                return out
    raise ForgeError(f"no confusable spelling available for identifier {identifier!r}")


def check_expressible(spec: ForgeSpec, profile: LanguageProfile) -> None:
    if spec.variant not in VARIANTS:
        raise ForgeError(f"unknown variant {spec.variant!r} (expected one of {', '.join(VARIANTS)})")
    tok = _tokens(profile)
    if not tok["lc"] and not tok["bo"]:
        raise ForgeError(f"{spec.variant} needs comment syntax; profile {profile.name!r} has none")
    if spec.variant == "stretched_string":
        if not profile.strings:
            raise ForgeError(f"stretched_string needs a string literal; profile {profile.name!r} "
                             f"has none")
        if not tok["lc"]:
            raise ForgeError(f"stretched_string needs a line comment; profile {profile.name!r} "
                             f"has none")
    elif spec.variant == "comment_spoof":
        if tok["block"] is None:
            raise ForgeError(f"comment_spoof needs a block comment pair; profile "
                             f"{profile.name!r} has none")
        if len(tok["bc"]) < 2:
            raise ForgeError(f"comment_spoof needs a multi-character comment terminator; "
                             f"profile {profile.name!r} uses {tok['bc']!r}")
        if tok["block"].nestable and not tok["lc"]:
            raise ForgeError(f"comment_spoof on nestable comments needs a line comment; "
                             f"profile {profile.name!r} has none")
    elif spec.variant == "homoglyph_function":
        if profile.identifiers != "unicode":
            raise ForgeError(f"homoglyph_function needs Unicode identifiers; profile "
                             f"{profile.name!r} is ASCII-only")
        need = "bo" if _family(profile) == "c" else "lc"
        if not tok[need]:
            kind = "block" if need == "bo" else "line"
            raise ForgeError(f"homoglyph_function template needs a {kind} comment; profile "
                             f"{profile.name!r} has none")


def _body(spec: ForgeSpec, profile: LanguageProfile, tables: UnicodeTables | None,
          control: bool) -> str:
    tok = _tokens(profile)
    fam = _family(profile)
    if spec.variant == "stretched_string":
        if control:
            # Same logic written honestly: the comment sits outside the string.
            text = _STRETCHED[fam].format(trigger="\0", payload=spec.payload, **tok)
            a = text.index("\0")
            eol = text.index("\n", a)
            return (text[:a] + spec.payload + text[a + 1:eol] + f" {tok['lc']} {spec.comment}"
                    + text[eol:])
        trigger = f"{spec.payload}{RLO} {LRI}{tok['lc']} {spec.comment}{PDI} {LRI}"
        return _STRETCHED[fam].format(trigger=trigger, payload=spec.payload, **tok)
    if spec.variant == "homoglyph_function":
        trojan = spec.identifier + "_v2" if control else trojan_spelling(spec.identifier, tables)
        return _HOMOGLYPH[fam].format(ident=spec.identifier, trojan=trojan,
                                      payload=spec.payload, **tok)
    # comment_spoof
    block = tok["block"]
    close = tok["bc"]
    if control:
        spoofed = close
        tail = ""
    else:
        spoofed = close[0] + ZWSP + close[1:]
        tail = f"{tok['lc']} {close}" if tok["lc"] else f"{block.open} {close}"
    return _SPOOF[fam].format(close=spoofed, tail=tail, **tok).replace(" \n", "\n")


def forge(spec: ForgeSpec, tables: UnicodeTables | None = None,
          registry: ProfileRegistry | None = None, *, control: bool = False) -> str:
    """Source text for ``spec``; ``control=True`` gives the clean twin."""
    registry = registry or default_registry()
    try:
        profile = registry[spec.profile]
    except KeyError:
        raise ForgeError(f"unknown profile {spec.profile!r}") from None
    check_expressible(spec, profile)
    return header(spec, profile, control) + _body(spec, profile, tables, control)


@dataclass(frozen=True)
class ManifestEntry:
    path: str | None
    variant: str
    profile: str
    expected_rule: str | None
    kind: str  # sample | control | skipped
    reason: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    with open(path, encoding="utf-8") as fh:
        return [ManifestEntry(**json.loads(line)) for line in fh if line.strip()]


def _ext(profile: LanguageProfile) -> str:
    return profile.extensions[0] if profile.extensions else ".txt"


def forge_corpus(out_dir: str | Path, profiles: Iterable[str] | None = None,
                 tables: UnicodeTables | None = None,
                 registry: ProfileRegistry | None = None) -> list[ManifestEntry]:
    """Write every expressible variant x profile sample plus controls and a manifest."""
    registry = registry or default_registry()
    tables = tables or load_tables()
    out = Path(out_dir)
    names = registry.names() if profiles is None else list(profiles)
    entries = []
    files = []
    for name in names:
        profile = registry[name]
        for variant in VARIANTS:
            spec = ForgeSpec(variant, name)
            try:
                check_expressible(spec, profile)
            except ForgeError as exc:
                entries.append(ManifestEntry(None, variant, name, None, "skipped", str(exc)))
                continue
            stem = f"{name}/{variant}"
            sample = f"{stem}{_ext(profile)}"
            control = f"{stem}.control{_ext(profile)}"
            files.append((sample, forge(spec, tables, registry)))
            files.append((control, forge(spec, tables, registry, control=True)))
            entries.append(ManifestEntry(sample, variant, name, EXPECTED_RULE[variant], "sample"))
            entries.append(ManifestEntry(control, variant, name, None, "control"))
    try:
        out.mkdir(parents=True, exist_ok=True)
        for rel, text in files:
            dest = out / rel
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_text(text, encoding="utf-8", newline="")
        (out / MANIFEST_NAME).write_text("".join(e.to_json() + "\n" for e in entries),
                                         encoding="utf-8")
    except OSError as exc:
        raise ForgeError(f"cannot write corpus under {out}: {exc}") from None
    return entries


# -- seeded benign corpus with planted samples ---------------------------------

_WORDS = ("value count index buffer result total offset length cursor node entry token "
          "parser record handle state config limit width height name label item queue "
          "stack cache key flag mode level score").split()
_BENIGN_UNICODE = [
    ("comment", "café naïve résumé"),
    ("comment", "שלום עולם"),
    ("comment", "© 2021 contributors"),
    ("string", "¿Qué tal?"),
    ("string", "日本語のテキスト"),
    ("string", "Δ = 0.5 ± 0.1"),
    ("string", "\U0001f600 done"),
]
_CORPUS_PROFILES = ("c", "python", "javascript", "go", "rust", "cpp")


def _filler(rng: random.Random, profile: LanguageProfile, target: int, unicode: bool) -> str:
    tok = _tokens(profile)
    lc, q = tok["lc"], tok["q"]
    py = _family(profile) == "python"
    parts = []
    size = 0
    n = 0
    while size < target:
        fn = f"{rng.choice(_WORDS)}_{rng.choice(_WORDS)}_{n}"
        a, b = rng.sample(_WORDS, 2)
        lines = [f"{lc} {fn}: combine {a} and {b}"]
        if py:
            lines += [f"def {fn}({a}, {b}):", f"    {a} = {a} + {rng.randint(1, 99)}",
                      f"    msg = {q}{a} {b}{q}", f"    return {a} * {b}", ""]
        else:
            lines += [f"int {fn}(int {a}, int {b}) {{", f"    {a} = {a} + {rng.randint(1, 99)};",
                      f"    const char *msg = {q}{a} {b}{q};", f"    return {a} * {b};", "}", ""]
        if unicode and rng.random() < 0.3:
            kind, s = rng.choice(_BENIGN_UNICODE)
            if kind == "comment":
                lines.insert(1, f"{lc} {s}")
            else:
                lines.insert(-2, f"    {'' if py else 'const char *'}note = {q}{s}{q}"
                                 f"{'' if py else ';'}")
        chunk = "\n".join(lines) + "\n"
        parts.append(chunk)
        size += len(chunk)
        n += 1
    return "".join(parts)


@dataclass(frozen=True)
class SeededCorpus:
    root: Path
    files: list
    planted: dict  # relative path -> expected rule
    unicode_files: frozenset  # relative paths containing non-ASCII text


def seeded_corpus(out_dir: str | Path, n_files: int = 1000, n_attacks: int = 10, seed: int = 0,
                  unicode_fraction: float = 0.05, mean_size: int = 6000,
                  tables: UnicodeTables | None = None,
                  registry: ProfileRegistry | None = None) -> SeededCorpus:
    """Generate ``n_files`` benign files (a few with legitimate non-ASCII text) and
    plant ``n_attacks`` forged samples among them, reproducibly from ``seed``."""
    registry = registry or default_registry()
    tables = tables or load_tables()
    rng = random.Random(seed)
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    attack_idx = set(rng.sample(range(n_files), n_attacks))
    combos = [(v, p) for p in _CORPUS_PROFILES for v in VARIANTS
              if not (v == "comment_spoof" and not registry[p].block_comments)]
    files, planted, uni = [], {}, set()
    for i in range(n_files):
        name = _CORPUS_PROFILES[i % len(_CORPUS_PROFILES)]
        profile = registry[name]
        rel = f"pkg{i // 100:02d}/file{i:04d}{_ext(profile)}"
        target = max(200, int(rng.expovariate(1 / mean_size)))
        if i in attack_idx:
            variant, name = combos[rng.randrange(len(combos))]
            profile = registry[name]
            rel = f"pkg{i // 100:02d}/file{i:04d}{_ext(profile)}"
            text = forge(ForgeSpec(variant, name), tables, registry)
            text += "\n" + _filler(rng, profile, target, unicode=False)
            planted[rel] = EXPECTED_RULE[variant]
        else:
            unicode = rng.random() < unicode_fraction
            text = _filler(rng, profile, target, unicode)
        if not text.isascii():
            uni.add(rel)
        dest = root / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text, encoding="utf-8", newline="")
        files.append(rel)
    return SeededCorpus(root, files, planted, frozenset(uni))
