"""Per-line bidi resolution: embedding levels and visual order.

Thin wrappers that turn code point sequences into class arrays for the
kernels in :mod:`._kernels` and package the result as a :class:`BidiLine`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..tables import BidiClass, UnicodeTables
from . import _kernels

MAX_DEPTH = _kernels.MAX_DEPTH


class Direction(enum.IntEnum):
    LTR = 0
    RTL = 1
    AUTO = 2


_REMOVED = np.zeros(len(BidiClass), dtype=bool)
_REMOVED[[BidiClass.LRE, BidiClass.RLE, BidiClass.LRO, BidiClass.RLO, BidiClass.PDF,
          BidiClass.BN]] = True


@dataclass(frozen=True)
class BidiLine:
    codepoints: tuple
    para_direction: Direction
    para_level: int
    levels: np.ndarray
    removed: np.ndarray

    def __len__(self):
        return len(self.codepoints)


def _as_array(codepoints) -> np.ndarray:
    if isinstance(codepoints, str):
        return np.fromiter(map(ord, codepoints), dtype=np.int64, count=len(codepoints))
    return np.asarray(codepoints, dtype=np.int64).reshape(-1)


def prepare(tables: UnicodeTables, cps: np.ndarray):
    """Class codes plus bracket key/type arrays for ``cps``."""
    cls = tables.bidi_class_map[cps]
    n = cps.shape[0]
    bkey = np.full(n, -1, dtype=np.int32)
    btype = np.zeros(n, dtype=np.int8)
    keys, types = tables.bracket_keys
    for i in np.flatnonzero(cls == BidiClass.ON):
        cp = int(cps[i])
        kind = types.get(cp)
        if kind:
            bkey[i] = keys[cp]
            btype[i] = kind
    return cls, bkey, btype


def _resolve(tables, codepoints, para_direction):
    cps = _as_array(codepoints)
    cls, bkey, btype = prepare(tables, cps)
    levels = np.zeros(cps.shape[0], dtype=np.int8)
    para = _kernels.resolve(cls, bkey, btype, int(para_direction), levels)
    return cps, cls, levels, para


def resolve_levels(tables: UnicodeTables, codepoints: Sequence[int] | str,
                   para_direction: Direction | int = Direction.LTR) -> BidiLine:
    """Resolve embedding levels for one line of text.

    A paragraph separator inside ``codepoints`` starts a new paragraph with
    the same direction setting; callers normally split lines first.
    """
    cps, cls, levels, para = _resolve(tables, codepoints, para_direction)
    levels.flags.writeable = False
    removed = _REMOVED[cls]
    removed.flags.writeable = False
    return BidiLine(tuple(int(c) for c in cps), Direction(para_direction), int(para),
                    levels, removed)


def display_order(tables: UnicodeTables, codepoints: Sequence[int] | str,
                  para_direction: Direction | int = Direction.LTR) -> list[int]:
    """Logical indices of the retained characters, in visual (L2) order."""
    cps, cls, levels, _ = _resolve(tables, codepoints, para_direction)
    return _kernels.visual_order(cls, levels, 0, cls.shape[0]).tolist()


def line_reorders(tables: UnicodeTables, codepoints: Sequence[int] | str) -> bool:
    """True if an LTR viewer shows this line in a different order than encoded.

    Any character dropped by X9 counts, since invisible characters then
    influenced layout even if the retained order happens to be unchanged.
    """
    cps = _as_array(codepoints)
    if not cps.size:
        return False
    cls = tables.bidi_class_map[cps]
    if _REMOVED[cls].any():
        return True
    order = display_order(tables, cps, Direction.LTR)
    return order != list(range(len(order)))
