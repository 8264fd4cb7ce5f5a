#!/usr/bin/env python3
"""Benchmark the bidi kernels (numba vs pure Python) and the byte prefilter variants.

The pure-Python numbers come from a child process started with
TROJANSCAN_DISABLE_JIT=1, so nested kernel calls are interpreted too.
Prints one JSON object.
"""

import argparse
import gzip
import json
import os
import re
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
CASES = ROOT / "tests" / "data" / "BidiCharacterTest-14.0.0.txt.gz"


def load_lines(limit):
    out = []
    with gzip.open(CASES, "rt", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            f = line.split(";")
            out.append((np.array([int(x, 16) for x in f[0].split()], dtype=np.int64), int(f[1])))
            if len(out) >= limit:
                break
    return out


def bench_bidi(limit, runs):
    from trojanscan import _accel, load_tables
    from trojanscan.bidi import _kernels
    from trojanscan.bidi.engine import prepare

    tables = load_tables()
    cases = []
    for cps, pdir in load_lines(limit):
        cls, bkey, btype = prepare(tables, cps)
        cases.append((cls, bkey, btype, pdir))

    def run():
        for cls, bkey, btype, pdir in cases:
            levels = np.zeros(cls.shape[0], dtype=np.int8)
            _kernels.resolve(cls, bkey, btype, pdir, levels)
            _kernels.visual_order(cls, levels, 0, cls.shape[0])

    t0 = time.perf_counter()
    run()  # includes compilation or cache load
    first = time.perf_counter() - t0
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    best = min(times)
    return {"backend": _accel.backend(), "lines": len(cases), "first_run_s": first,
            "best_s": best, "lines_per_s": len(cases) / best}


def bench_prefilter(size_mb, runs):
    rng = np.random.default_rng(0)
    data = rng.integers(0x20, 0x7F, size=size_mb << 20, dtype=np.uint8).tobytes()
    nonascii = re.compile(rb"[\x80-\xff]")
    variants = {
        "bytes.isascii": lambda b: not b.isascii(),
        "regex": lambda b: nonascii.search(b) is not None,
        "numpy": lambda b: bool((np.frombuffer(b, dtype=np.uint8) >= 0x80).any()),
    }
    out = {}
    for name, fn in variants.items():
        times = []
        for _ in range(runs):
            t0 = time.perf_counter()
            assert fn(data) is False
            times.append(time.perf_counter() - t0)
        out[name] = {"MB_per_s": size_mb / min(times)}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lines", type=int, default=5000)
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--prefilter-mb", type=int, default=64)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        print(json.dumps(bench_bidi(args.lines, args.runs)))
        return

    results = {}
    for label, env_flag in (("jit", None), ("python", "1")):
        env = dict(os.environ)
        env.pop("TROJANSCAN_DISABLE_JIT", None)
        if env_flag:
            env["TROJANSCAN_DISABLE_JIT"] = env_flag
        proc = subprocess.run([sys.executable, __file__, "--child", "--lines", str(args.lines),
                               "--runs", str(args.runs)], env=env, capture_output=True,
                              text=True, check=True)
        results[label] = json.loads(proc.stdout)
    results["speedup"] = results["jit"]["lines_per_s"] / results["python"]["lines_per_s"]
    results["prefilter"] = bench_prefilter(args.prefilter_mb, args.runs)
    print(json.dumps(results, indent=2))


if __name__ == "__main__":
    main()
