"""Run the UCD bidi conformance files against the level kernel.

Both official formats are supported (optionally gzip-compressed):

* ``BidiCharacterTest.txt``: ``code points;para dir;para level;levels;order``
* ``BidiTest.txt``: ``@Levels:``/``@Reorder:`` headers followed by
  ``class sequence; bitset`` rows (bit 1 auto, 2 LTR, 4 RTL).
"""

from __future__ import annotations

import gzip
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from ..tables import BidiClass, UnicodeTables
from . import _kernels
from .engine import _REMOVED, prepare


@dataclass
class ConformanceResult:
    total: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)

    @property
    def failed(self) -> int:
        return self.total - self.passed

    def record(self, ok: bool, detail, keep: int = 20):
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < keep:
            self.failures.append(detail)


def _open(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def _levels_str(levels, cls):
    return ["x" if _REMOVED[c] else str(int(v)) for v, c in zip(levels, cls)]


def iter_character_tests(path) -> Iterator[tuple[int, list, int, int, list, list]]:
    """Yield (lineno, code points, para dir, para level, levels, order)."""
    with _open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            f = line.split(";")
            yield (lineno, [int(x, 16) for x in f[0].split()], int(f[1]), int(f[2]),
                   f[3].split(), [int(x) for x in f[4].split()])


def run_character_tests(tables: UnicodeTables, path, limit: int | None = None) -> ConformanceResult:
    res = ConformanceResult()
    for lineno, cps, pdir, plevel, exp_levels, exp_order in iter_character_tests(path):
        arr = np.asarray(cps, dtype=np.int64)
        cls, bkey, btype = prepare(tables, arr)
        levels = np.zeros(arr.shape[0], dtype=np.int8)
        para = _kernels.resolve(cls, bkey, btype, pdir, levels)
        got_levels = _levels_str(levels, cls)
        got_order = _kernels.visual_order(cls, levels, 0, arr.shape[0]).tolist()
        ok = para == plevel and got_levels == exp_levels and got_order == exp_order
        res.record(ok, (lineno, got_levels, exp_levels, got_order, exp_order))
        if limit is not None and res.total >= limit:
            break
    return res


def iter_class_tests(path) -> Iterator[tuple[int, list, int, list, list]]:
    """Yield (lineno, classes, bitset, levels, order) from BidiTest.txt."""
    levels: list = []
    order: list = []
    with _open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("@Levels:"):
                levels = line[len("@Levels:"):].split()
            elif line.startswith("@Reorder:"):
                order = [int(x) for x in line[len("@Reorder:"):].split()]
            elif not line.startswith("@"):
                seq, bits = line.split(";")
                yield lineno, [BidiClass[c] for c in seq.split()], int(bits), levels, order


def run_class_tests(path, limit: int | None = None) -> ConformanceResult:
    res = ConformanceResult()
    for lineno, classes, bits, exp_levels, exp_order in iter_class_tests(path):
        cls = np.asarray(classes, dtype=np.int8)
        n = cls.shape[0]
        bkey = np.full(n, -1, dtype=np.int32)
        btype = np.zeros(n, dtype=np.int8)
        for pdir, bit in ((2, 1), (0, 2), (1, 4)):
            if not bits & bit:
                continue
            levels = np.zeros(n, dtype=np.int8)
            _kernels.resolve(cls, bkey, btype, pdir, levels)
            got_levels = _levels_str(levels, cls)
            got_order = _kernels.visual_order(cls, levels, 0, n).tolist()
            ok = got_levels == exp_levels and got_order == exp_order
            res.record(ok, (lineno, pdir, [c.name for c in classes], got_levels, exp_levels,
                            got_order, exp_order))
        if limit is not None and res.total >= limit:
            break
    return res
