import json
import os
import subprocess
import sys

import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import DATA
from trojanscan import load_tables
from trojanscan.bidi import Direction, display_order, line_reorders, resolve_levels
from trojanscan.bidi.conformance import run_character_tests, run_class_tests

CHAR_TESTS = DATA / "BidiCharacterTest-14.0.0.txt.gz"
CLASS_TESTS = DATA / "BidiTest-14.0.0.txt.gz"

# A pool covering every bidi class, including controls and brackets.
POOL = [0x41, 0x62, 0x5D0, 0x5D1, 0x627, 0x31, 0x32, 0x660, 0x2B, 0x24, 0x2C, 0x300, 0x200B,
        0x9, 0x20, 0x21, 0x28, 0x29, 0x5B, 0x5D, 0x2329, 0x232A, 0x3008, 0x3009,
        0x202A, 0x202B, 0x202C, 0x202D, 0x202E, 0x2066, 0x2067, 0x2068, 0x2069]
codepoint_lists = st.lists(st.sampled_from(POOL), max_size=40)


def test_override_example(tables):
    line = resolve_levels(tables, "a‮bc")
    assert list(line.levels) == [0, 0, 1, 1]
    assert list(line.removed) == [False, True, False, False]
    assert display_order(tables, "a‮bc") == [0, 3, 2]


def test_hebrew_auto_direction(tables):
    line = resolve_levels(tables, "אב", Direction.AUTO)
    assert line.para_level == 1
    assert list(line.levels) == [1, 1]
    assert display_order(tables, "אב", Direction.AUTO) == [1, 0]


def test_isolate_nesting(tables):
    # LRI inside RLO: the isolate restarts at an even level.
    order = display_order(tables, "x‮ab⁦cd⁩ef")
    text = "x‮ab⁦cd⁩ef"
    assert "".join(text[i] for i in order) == "xfe⁩cd⁦ba"


def test_line_reorders(tables):
    assert line_reorders(tables, "a‮bc")
    assert line_reorders(tables, "abc אבג")
    assert not line_reorders(tables, "plain ascii")
    assert line_reorders(tables, "a​b")  # ZWSP is removed from display


def test_empty(tables):
    assert display_order(tables, "") == []
    assert resolve_levels(tables, []).levels.shape == (0,)


@settings(max_examples=400, deadline=None)
@given(codepoint_lists, st.sampled_from(list(Direction)))
def test_display_order_is_permutation_of_retained(cps, direction):
    t = load_tables()
    line = resolve_levels(t, cps, direction)
    order = display_order(t, cps, direction)
    kept = [i for i, r in enumerate(line.removed) if not r]
    assert sorted(order) == kept
    assert all(0 <= v <= 126 for v in line.levels)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([0x41, 0x20, 0x31, 0x28, 0x29, 0x2C]), max_size=40))
def test_ltr_only_is_identity(cps):
    t = load_tables()
    assert display_order(t, cps) == list(range(len(cps)))


def test_character_conformance_sample(tables):
    res = run_character_tests(tables, CHAR_TESTS, limit=3000)
    assert res.total == 3000 and res.failed == 0, res.failures[:3]


def test_class_conformance_sample():
    res = run_class_tests(CLASS_TESTS, limit=20000)
    assert res.total >= 20000 and res.failed == 0, res.failures[:3]


_CHILD = """
import json, sys
import numpy as np
from trojanscan import load_tables, _accel
from trojanscan.bidi import resolve_levels, display_order
t = load_tables()
cases = json.loads(sys.stdin.read())
out = []
for cps, d in cases:
    line = resolve_levels(t, cps, d)
    out.append([line.para_level, [int(x) for x in line.levels], display_order(t, cps, d)])
print(json.dumps({"backend": _accel.backend(), "out": out}))
"""


def _run_child(cases, disable):
    env = dict(os.environ)
    env.pop("TROJANSCAN_DISABLE_JIT", None)
    if disable:
        env["TROJANSCAN_DISABLE_JIT"] = "1"
    proc = subprocess.run([sys.executable, "-c", _CHILD], input=json.dumps(cases), env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def test_jit_and_fallback_agree():
    rng = np.random.default_rng(7)
    cases = [([int(x) for x in rng.choice(POOL, size=rng.integers(0, 30))], int(rng.integers(0, 3)))
             for _ in range(300)]
    jit = _run_child(cases, disable=False)
    pure = _run_child(cases, disable=True)
    assert pure["backend"] == "python"
    assert jit["backend"].startswith("numba")
    assert jit["out"] == pure["out"]
