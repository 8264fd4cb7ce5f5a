#!/usr/bin/env python3
"""Regenerate the shipped Unicode tables from official UCD / UTS #39 releases.

Usage::

    python scripts/regen_tables.py --ucd UCD_DIR --confusables confusables.txt \
        --out src/trojanscan/data --version 14.0.0

UCD_DIR must contain ``extracted/DerivedBidiClass.txt``, ``Scripts.txt``,
``DerivedCoreProperties.txt``, ``BidiBrackets.txt`` and ``NameAliases.txt``
in the official semicolon-separated format.
"""

import argparse
import sys
from pathlib import Path

BIDI_CONTROLS = {0x202A, 0x202B, 0x202C, 0x202D, 0x202E, 0x2066, 0x2067, 0x2068, 0x2069}
MAX_CP = 0x10FFFF


def records(path):
    with open(path, encoding="utf-8-sig") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                yield [field.strip() for field in line.split(";")]


def parse_range(field):
    lo, _, hi = field.partition("..")
    return int(lo, 16), int(hi or lo, 16)


def merge(rows):
    """Coalesce sorted (lo, hi, value) rows with equal adjacent values."""
    out = []
    for lo, hi, val in sorted(rows):
        if out and out[-1][2] == val and out[-1][1] + 1 == lo:
            out[-1] = (out[-1][0], hi, val)
        else:
            out.append((lo, hi, val))
    return out


def fmt_range(lo, hi):
    return f"{lo:04X}" if lo == hi else f"{lo:04X}..{hi:04X}"


def build_bidi(ucd):
    rows = [(*parse_range(r[0]), r[1]) for r in records(ucd / "extracted" / "DerivedBidiClass.txt")]
    rows = merge(rows)
    # Unlisted code points default to L; emit them so the file is a total map.
    filled, cursor = [], 0
    for lo, hi, val in rows:
        if lo > cursor:
            filled.append((cursor, lo - 1, "L"))
        filled.append((lo, hi, val))
        cursor = hi + 1
    if cursor <= MAX_CP:
        filled.append((cursor, MAX_CP, "L"))
    return merge(filled)


def build_scripts(ucd):
    return merge((*parse_range(r[0]), r[1]) for r in records(ucd / "Scripts.txt"))


def build_invisibles(ucd):
    cps = set()
    for r in records(ucd / "DerivedCoreProperties.txt"):
        if r[1] == "Default_Ignorable_Code_Point":
            lo, hi = parse_range(r[0])
            cps.update(range(lo, hi + 1))
    cps -= BIDI_CONTROLS
    cps.add(0x200B)
    return sorted(cps)


def build_confusables(path):
    out = []
    for r in records(path):
        src = int(r[0], 16)
        if src < 0x80:
            # ASCII is the skeleton fixed point; see README "Unicode data".
            continue
        out.append((src, [int(t, 16) for t in r[1].split()]))
    return sorted(out)


def build_brackets(ucd):
    return [(int(r[0], 16), int(r[1], 16), r[2]) for r in records(ucd / "BidiBrackets.txt")]


def build_aliases(ucd):
    seen = {}
    for r in records(ucd / "NameAliases.txt"):
        cp = int(r[0], 16)
        if r[2] == "abbreviation" and cp not in seen:
            seen[cp] = r[1]
    return sorted(seen.items())


def write(path, header, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h in header:
            fh.write(f"# {h}\n")
        for line in lines:
            fh.write(line + "\n")
    print(f"wrote {path} ({len(lines)} rows)", file=sys.stderr)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ucd", type=Path, required=True)
    ap.add_argument("--confusables", type=Path, required=True)
    ap.add_argument("--confusables-version", default="13.0.0")
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--version", default="14.0.0")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    ver = f"version: {args.version}"

    write(args.out / "bidi_classes.txt", [ver, "range;bidi class (total over 0000..10FFFF)"],
          [f"{fmt_range(lo, hi)};{v}" for lo, hi, v in build_bidi(args.ucd)])
    write(args.out / "scripts.txt", [ver, "range;script (unlisted code points are Unknown)"],
          [f"{fmt_range(lo, hi)};{v}" for lo, hi, v in build_scripts(args.ucd)])
    write(args.out / "invisibles.txt",
          [ver, "code point (Default_Ignorable_Code_Point minus bidi controls, plus 200B)"],
          [f"{cp:04X}" for cp in build_invisibles(args.ucd)])
    write(args.out / "confusables.txt",
          [ver, f"confusables-version: {args.confusables_version}",
           "code point;prototype sequence (non-ASCII sources only)"],
          [f"{src:04X};{' '.join(f'{t:04X}' for t in tgt)}"
           for src, tgt in build_confusables(args.confusables)])
    write(args.out / "brackets.txt", [ver, "code point;paired bracket;o|c"],
          [f"{a:04X};{b:04X};{t}" for a, b, t in build_brackets(args.ucd)])
    write(args.out / "aliases.txt", [ver, "code point;abbreviation"],
          [f"{cp:04X};{name}" for cp, name in build_aliases(args.ucd)])


if __name__ == "__main__":
    main()
