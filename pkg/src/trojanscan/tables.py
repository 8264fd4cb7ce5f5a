"""Unicode character properties used by the scanner.

All data comes from the plain-text tables in ``trojanscan/data`` (regenerated
by ``scripts/regen_tables.py``). Lookups are dense per-code-point arrays, so
vectorized access over a line of text is a single fancy-index.
"""

from __future__ import annotations

import enum
import functools
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

MAX_CODE_POINT = 0x10FFFF
DEFAULT_DATA_DIR = Path(__file__).with_name("data")

TABLE_FILES = ("bidi_classes", "invisibles", "scripts", "confusables", "brackets")
OPTIONAL_FILES = ("aliases",)

BIDI_CONTROLS = frozenset(
    {0x202A, 0x202B, 0x202C, 0x202D, 0x202E, 0x2066, 0x2067, 0x2068, 0x2069}
)


class BidiClass(enum.IntEnum):
    """Bidi_Class values. The integer codes are what the level kernel sees."""

    L = 0
    R = 1
    AL = 2
    EN = 3
    ES = 4
    ET = 5
    AN = 6
    CS = 7
    NSM = 8
    BN = 9
    B = 10
    S = 11
    WS = 12
    ON = 13
    LRE = 14
    RLE = 15
    LRO = 16
    RLO = 17
    PDF = 18
    LRI = 19
    RLI = 20
    FSI = 21
    PDI = 22


EXPLICIT_CLASSES = frozenset(
    {BidiClass.LRE, BidiClass.RLE, BidiClass.LRO, BidiClass.RLO, BidiClass.PDF,
     BidiClass.LRI, BidiClass.RLI, BidiClass.FSI, BidiClass.PDI}
)


class TableLoadError(Exception):
    """A table file is missing or contains a malformed row."""

    def __init__(self, path, message, line=None):
        self.path = Path(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else str(self.path)
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True, eq=False)
class UnicodeTables:
    """Immutable property database.

    ``bidi_class_map`` and ``script_map`` are read-only arrays indexed by code
    point; ``script_map`` holds indices into ``script_names``.
    """

    bidi_class_map: np.ndarray
    bidi_control_set: frozenset
    invisible_set: frozenset
    script_map: np.ndarray
    script_names: tuple
    confusable_map: Mapping[int, tuple]
    bracket_pairs: Mapping[int, tuple]
    version: str
    confusables_version: str = ""
    aliases: Mapping[int, str] = MappingProxyType({})
    invisible_mask: np.ndarray = None  # type: ignore[assignment]

    # -- point queries -------------------------------------------------
    def bidi_class(self, cp: int) -> BidiClass:
        return BidiClass(int(self.bidi_class_map[cp]))

    def is_bidi_control(self, cp: int) -> bool:
        return cp in self.bidi_control_set

    def is_invisible(self, cp: int) -> bool:
        return cp in self.invisible_set

    def script_of(self, cp: int) -> str:
        return self.script_names[self.script_map[cp]]

    def alias(self, cp: int) -> str | None:
        return self.aliases.get(cp)

    def skeleton(self, text: str, casefold: bool = False) -> str:
        return skeleton(self, text, casefold=casefold)

    # -- derived helpers -----------------------------------------------
    @functools.cached_property
    def invisible_class(self) -> str:
        """Regex character class (without brackets) matching ``invisible_set``."""
        return _char_class(self.invisible_set)

    @functools.cached_property
    def bracket_keys(self) -> tuple[dict, dict]:
        """Per-code-point bracket pairing key and type (0 none, 1 open, 2 close).

        The key of an opener is its canonical code point; a closer's key is
        the canonical code point of the opener it pairs with, so U+2329 and
        U+3008 match each other's closers.
        """
        keys = {}
        types = {}
        for cp, (pair, kind) in self.bracket_pairs.items():
            opener = cp if kind == "o" else pair
            keys[cp] = _canonical(opener)
            types[cp] = 1 if kind == "o" else 2
        return keys, types

    def __reduce__(self):
        return (_reload, (self._source,))


def _reload(source):
    return load_tables(source)


def _canonical(cp: int) -> int:
    nfd = unicodedata.normalize("NFD", chr(cp))
    return ord(nfd) if len(nfd) == 1 else cp


def _char_class(cps) -> str:
    parts = []
    for lo, hi in _ranges(sorted(cps)):
        parts.append(re.escape(chr(lo)) if lo == hi else f"{re.escape(chr(lo))}-{re.escape(chr(hi))}")
    return "".join(parts)


def _ranges(sorted_cps):
    start = prev = None
    for cp in sorted_cps:
        if prev is not None and cp == prev + 1:
            prev = cp
            continue
        if start is not None:
            yield start, prev
        start = prev = cp
    if start is not None:
        yield start, prev


# -- loading -----------------------------------------------------------

def _rows(path: Path, nfields: tuple):
    """Yield (lineno, fields) for data rows; ``#`` comments are ignored."""
    if not path.is_file():
        raise TableLoadError(path, "table file not found")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(";")]
            if len(fields) not in nfields or not all(fields):
                raise TableLoadError(path, f"malformed row {raw.rstrip()!r}", lineno)
            yield lineno, fields


def _version(path: Path, key: str = "version") -> str:
    prefix = f"# {key}:"
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith(prefix):
                return line[len(prefix):].strip()
            if not line.startswith("#"):
                break
    return ""


def _hex(path, lineno, field) -> int:
    try:
        cp = int(field, 16)
    except ValueError:
        raise TableLoadError(path, f"bad code point {field!r}", lineno) from None
    if not 0 <= cp <= MAX_CODE_POINT:
        raise TableLoadError(path, f"code point out of range {field!r}", lineno)
    return cp


def _range(path, lineno, field) -> tuple[int, int]:
    lo, sep, hi = field.partition("..")
    a = _hex(path, lineno, lo)
    b = _hex(path, lineno, hi) if sep else a
    if b < a:
        raise TableLoadError(path, f"inverted range {field!r}", lineno)
    return a, b


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@functools.lru_cache(maxsize=4)
def _load_cached(data_dir: Path) -> UnicodeTables:
    return _load(data_dir)


def load_tables(data_dir: str | Path | None = None) -> UnicodeTables:
    """Load the five table files (plus optional aliases) from ``data_dir``.

    Loads of the same directory are memoized; the result is immutable.
    """
    path = Path(data_dir) if data_dir is not None else DEFAULT_DATA_DIR
    if not path.is_dir():
        raise TableLoadError(path, "data directory not found")
    return _load_cached(path.resolve())


def _load(data_dir: Path) -> UnicodeTables:
    files = {name: data_dir / f"{name}.txt" for name in TABLE_FILES + OPTIONAL_FILES}

    path = files["bidi_classes"]
    bidi = np.full(MAX_CODE_POINT + 1, BidiClass.L, dtype=np.int8)
    for lineno, (rng, cls) in _rows(path, (2,)):
        lo, hi = _range(path, lineno, rng)
        try:
            bidi[lo:hi + 1] = BidiClass[cls]
        except KeyError:
            raise TableLoadError(path, f"unknown bidi class {cls!r}", lineno) from None

    path = files["invisibles"]
    invisible = set()
    for lineno, (rng,) in _rows(path, (1,)):
        lo, hi = _range(path, lineno, rng)
        invisible.update(range(lo, hi + 1))

    path = files["scripts"]
    names = ["Unknown"]
    index = {"Unknown": 0}
    scripts = np.zeros(MAX_CODE_POINT + 1, dtype=np.uint8)
    for lineno, (rng, name) in _rows(path, (2,)):
        lo, hi = _range(path, lineno, rng)
        if name not in index:
            index[name] = len(names)
            names.append(name)
        scripts[lo:hi + 1] = index[name]

    path = files["confusables"]
    confusables = {}
    for lineno, (src, tgt) in _rows(path, (2,)):
        confusables[_hex(path, lineno, src)] = tuple(_hex(path, lineno, t) for t in tgt.split())
    _check_acyclic(confusables, path)

    path = files["brackets"]
    brackets = {}
    for lineno, (cp, pair, kind) in _rows(path, (3,)):
        if kind not in ("o", "c"):
            raise TableLoadError(path, f"bracket type must be o or c, got {kind!r}", lineno)
        brackets[_hex(path, lineno, cp)] = (_hex(path, lineno, pair), kind)

    aliases = {}
    if files["aliases"].is_file():
        for lineno, (cp, name) in _rows(files["aliases"], (2,)):
            aliases.setdefault(_hex(files["aliases"], lineno, cp), name)

    controls = frozenset(cp for cp in BIDI_CONTROLS if bidi[cp] in EXPLICIT_CLASSES)
    inv_mask = np.zeros(MAX_CODE_POINT + 1, dtype=bool)
    inv_mask[list(invisible)] = True

    tables = UnicodeTables(
        bidi_class_map=_frozen(bidi),
        bidi_control_set=controls,
        invisible_set=frozenset(invisible),
        script_map=_frozen(scripts),
        script_names=tuple(names),
        confusable_map=MappingProxyType(confusables),
        bracket_pairs=MappingProxyType(brackets),
        version=_version(files["bidi_classes"]),
        confusables_version=_version(files["confusables"], "confusables-version"),
        aliases=MappingProxyType(aliases),
        invisible_mask=_frozen(inv_mask),
    )
    object.__setattr__(tables, "_source", str(data_dir))
    return tables


def _check_acyclic(mapping, path):
    state = {}  # 1 = on stack, 2 = done
    for root in mapping:
        if state.get(root) == 2:
            continue
        stack = [(root, iter(mapping.get(root, ())))]
        state[root] = 1
        while stack:
            node, children = stack[-1]
            for child in children:
                if child not in mapping or state.get(child) == 2:
                    continue
                if state.get(child) == 1:
                    raise TableLoadError(path, f"confusable cycle through U+{child:04X}")
                state[child] = 1
                stack.append((child, iter(mapping[child])))
                break
            else:
                state[node] = 2
                stack.pop()


# -- module-level API mirroring the methods ------------------------------

def bidi_class(tables: UnicodeTables, cp: int) -> BidiClass:
    return tables.bidi_class(cp)


def is_bidi_control(tables: UnicodeTables, cp: int) -> bool:
    return cp in tables.bidi_control_set


def is_invisible(tables: UnicodeTables, cp: int) -> bool:
    return cp in tables.invisible_set


def script_of(tables: UnicodeTables, cp: int) -> str:
    return tables.script_of(cp)


def _map_cp(tables: UnicodeTables, cp: int, out: list) -> None:
    target = tables.confusable_map.get(cp)
    if target is None:
        out.append(cp)
        return
    for t in target:
        _map_cp(tables, t, out)


def skeleton(tables: UnicodeTables, text: str, casefold: bool = False) -> str:
    """Confusable skeleton: NFD, map every code point to its prototype, NFD.

    Repeated until stable, so the result is idempotent. ASCII is never
    remapped, hence ASCII strings are their own skeleton.
    """
    if text.isascii():
        return text.casefold() if casefold else text
    cur = unicodedata.normalize("NFD", text.casefold() if casefold else text)
    for _ in range(8):
        out: list[int] = []
        for ch in cur:
            _map_cp(tables, ord(ch), out)
        nxt = unicodedata.normalize("NFD", "".join(map(chr, out)))
        if casefold:
            nxt = unicodedata.normalize("NFD", nxt.casefold())
        if nxt == cur:
            break
        cur = nxt
    return cur
