#!/usr/bin/env python3
"""Benchmark the two kernel backends (pure Python vs compiled) on the hot paths.

Usage:
    python benchmarks/bench_kernels.py            # kernel table + end-to-end
    python benchmarks/bench_kernels.py --quick    # smaller sizes

The kernel micro-benchmarks import both backends side by side; the end-to-end
run (predefined query 1 over a bulk dataset) is executed once per backend in a
subprocess because the backend binds at import time.
"""

import argparse
import os
import random
import subprocess
import sys
import time
from array import array
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from plantpulse.kernels import OP_BETWEEN, build_interval_index, pure  # noqa: E402

try:
    from plantpulse.kernels import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best * 1000.0


def make_inputs(n_rows, n_intervals):
    rng = random.Random(7)
    horizon = 50_000_000
    dates = array("q", (rng.randrange(0, horizon) for _ in range(n_rows)))
    keys = array("q", ((i % 4) + 1 for i in range(n_rows)))
    values = array("d", (rng.uniform(0, 100) for _ in range(n_rows)))
    validity = bytearray((n_rows + 7) >> 3)
    for i in range(n_rows):
        if rng.random() < 0.5:
            validity[i >> 3] |= 1 << (i & 7)
    group_keys = array("q", (rng.randrange(1, n_intervals // 2 + 2) for _ in range(n_rows)))

    window = horizon // n_intervals
    part_keys = array("q", ((j % 4) + 1 for j in range(n_intervals)))
    enters = array("q", (j * window for j in range(n_intervals)))
    leaves = array("q", (j * window + window - 1 for j in range(n_intervals)))
    part = build_interval_index(part_keys, enters, leaves, None)

    build_keys = array("q", range(1, n_intervals + 1))
    probe_keys = array("q", (rng.randrange(1, n_intervals + 1) for _ in range(n_rows)))
    return {
        "dates": dates,
        "keys": keys,
        "values": values,
        "validity": bytes(validity),
        "group_keys": group_keys,
        "part": part,
        "build_keys": build_keys,
        "probe_keys": probe_keys,
    }


def kernel_benchmarks(data, n_rows):
    lo, hi = 10_000_000, 30_000_000
    subset = None
    return [
        (
            f"filter_i64 between ({n_rows:,} rows)",
            lambda b: b.filter_i64(data["dates"], None, OP_BETWEEN, lo, hi, subset),
        ),
        (
            f"hash_join ({len(data['build_keys']):,} build x {n_rows:,} probe)",
            lambda b: b.hash_join(data["build_keys"], None, data["probe_keys"], None),
        ),
        (
            f"interval_probe ({n_rows:,} probes x {len(data['part'][5]):,} intervals)",
            lambda b: b.interval_probe(*data["part"], data["keys"], None, data["dates"], None),
        ),
        (
            f"group_stats_f64 ({n_rows:,} rows)",
            lambda b: b.group_stats_f64(data["group_keys"], data["values"], data["validity"]),
        ),
        (
            f"gather_i64 ({n_rows:,} rows)",
            lambda b: b.gather_i64(data["dates"], data["probe_keys"]),
        ),
    ]


def run_kernel_table(n_rows, n_intervals):
    data = make_inputs(n_rows, n_intervals)
    rows = []
    for name, op in kernel_benchmarks(data, n_rows):
        pure_ms = timeit(lambda: op(pure))
        if _ckernels is not None:
            compiled_ms = timeit(lambda: op(_ckernels))
            rows.append((name, pure_ms, compiled_ms, pure_ms / compiled_ms))
        else:
            rows.append((name, pure_ms, None, None))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}")
    print("-" * (width + 36))
    for name, pure_ms, compiled_ms, speedup in rows:
        if compiled_ms is None:
            print(f"{name.ljust(width)}  {pure_ms:>8.1f}ms  {'n/a':>10}  {'n/a':>8}")
        else:
            print(
                f"{name.ljust(width)}  {pure_ms:>8.1f}ms  {compiled_ms:>8.1f}ms"
                f"  {speedup:>7.1f}x"
            )


END_TO_END_SNIPPET = """
import sys, time
sys.path.insert(0, {src!r})
from plantpulse.kernels import BACKEND
sys.path.insert(0, {tests!r})
from fixtures import master_rows
from plantpulse.store import ColumnStore
from plantpulse.query import run_sql
from plantpulse.query.predefined import predefined
import random

n = {n_rows}
store = ColumnStore.with_catalog()
master_rows(store)
store.append("PURCHASE_ORDER_HEAD", [(1, 1, 0)])
store.append("PURCHASE_ORDER_ITEM", [(1, 1, 1, 10)])
n_heads = max(1, n // 100)
horizon = 50_000_000
window = horizon // n_heads
heads, positions = [], []
for k in range(n_heads):
    start = k * window
    mid, end = start + window // 2, start + window - 1
    heads.append((k + 1, 1, 1, None, start, end))
    positions.append((2 * k + 1, k + 1, 1, 1, start, mid))
    positions.append((2 * k + 2, k + 1, 2, 2, mid, end))
store.append("PRODUCTION_ORDER_HEAD", heads)
store.append("PRODUCTION_ORDER_POSITION", positions)
rng = random.Random(99)
rows = []
step = horizon // n
for i in range(n):
    date = i * step + rng.randrange(0, step)
    wp = (i % 4) + 1
    if wp == 1 and i % 2 == 0:
        rows.append((i + 1, 1, 1, date, rng.uniform(20, 60), "C", None, None, None, None))
    elif wp == 1:
        rows.append((i + 1, 1, 2, date, None, None, rng.uniform(50, 90), "dB", None, None))
    else:
        rows.append((i + 1, wp, 3, date, None, None, None, None, rng.uniform(0, 8), "mm/s"))
started = time.perf_counter()
for lo in range(0, n, 50_000):
    store.append("SENSOR_DATA", rows[lo:lo + 50_000])
append_s = time.perf_counter() - started
snap = store.snapshot()
started = time.perf_counter()
result = run_sql(predefined()[0].sql, snap)
query_s = time.perf_counter() - started
print(f"{{BACKEND:>8}}: append {{n / append_s:>11,.0f}} rows/s   query 1 {{query_s * 1000:>8.1f}} ms")
"""


def run_end_to_end(n_rows):
    here = Path(__file__).parent.parent
    snippet = END_TO_END_SNIPPET.format(
        src=str(here / "src"), tests=str(here / "tests"), n_rows=n_rows
    )
    print(f"\nend-to-end: bulk append + predefined query 1 over {n_rows:,} readings")
    sys.stdout.flush()
    for env_extra in ({}, {"PLANTPULSE_PURE": "1"}):
        if env_extra and _ckernels is None:
            continue  # already on the pure backend
        env = dict(os.environ, **env_extra)
        subprocess.run([sys.executable, "-c", snippet], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller dataset sizes")
    args = parser.parse_args()
    n_rows = 200_000 if args.quick else 1_000_000
    n_intervals = 2_000 if args.quick else 10_000
    if _ckernels is None:
        print("note: compiled backend not built; run `python setup.py build_ext --inplace`")
    print(f"kernel micro-benchmarks ({n_rows:,} rows, {n_intervals:,} intervals)\n")
    run_kernel_table(n_rows, n_intervals)
    run_end_to_end(n_rows if not args.quick else 200_000)


if __name__ == "__main__":
    main()
