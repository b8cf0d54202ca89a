"""Hot-loop kernels behind the columnar store and the query executor.

Two interchangeable backends implement the same contract:

- ``plantpulse.kernels._ckernels``: Cython extension, built via
  ``python setup.py build_ext --inplace`` (or any install that compiles it).
- ``plantpulse.kernels.pure``: pure-Python fallback, always available.

The compiled backend is selected at import when present; set
``PLANTPULSE_PURE=1`` to force the fallback. ``benchmarks/bench_kernels.py``
compares the two.

Data conventions shared by both backends:

- int64/timestamp columns are ``array('q')``, decimal64 columns ``array('d')``
- validity bitmaps are ``bytearray``; bit ``i`` lives at ``buf[i >> 3]``,
  mask ``1 << (i & 7)``; ``None`` means all rows valid
- index vectors are ``array('q')`` of row positions
"""

import os
from array import array
from bisect import bisect_right, insort_right

OP_EQ = 0
OP_NE = 1
OP_LT = 2
OP_LE = 3
OP_GT = 4
OP_GE = 5
OP_BETWEEN = 6
OP_ISNULL = 7
OP_NOTNULL = 8

OP_CODES = {
    "=": OP_EQ,
    "<>": OP_NE,
    "<": OP_LT,
    "<=": OP_LE,
    ">": OP_GT,
    ">=": OP_GE,
    "between": OP_BETWEEN,
    "is_null": OP_ISNULL,
    "not_null": OP_NOTNULL,
}

from . import pure as _pure

if os.environ.get("PLANTPULSE_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

filter_i64 = _impl.filter_i64
filter_f64 = _impl.filter_f64
hash_join = _impl.hash_join
interval_probe = _impl.interval_probe
gather_i64 = _impl.gather_i64
gather_f64 = _impl.gather_f64
gather_bits = _impl.gather_bits
group_stats_i64 = _impl.group_stats_i64
group_stats_f64 = _impl.group_stats_f64


def build_interval_index(keys, enters, leaves, leave_validity, rows=None):
    """Partition intervals by key into a flat, enter-sorted layout.

    Intervals with a null end are dropped: an open interval matches nothing.
    Returns (part_map, starts, enters_flat, leaves_flat, pmax_flat, rows_flat)
    where ``part_map`` maps key -> partition index and ``starts`` delimits each
    partition's slice of the flat arrays. ``pmax_flat`` carries the running
    maximum of interval ends within a partition, which lets probes stop early.
    """
    n = len(keys)
    per_key: dict = {}
    for i in range(n):
        if leave_validity is not None and not (leave_validity[i >> 3] >> (i & 7)) & 1:
            continue
        per_key.setdefault(keys[i], []).append(i)

    part_map = {}
    starts = array("q", [0])
    enters_flat = array("q")
    leaves_flat = array("q")
    pmax_flat = array("q")
    rows_flat = array("q")
    for key, members in per_key.items():
        members.sort(key=lambda i: (enters[i], i))
        part_map[key] = len(part_map)
        running = None
        for i in members:
            enters_flat.append(enters[i])
            leaves_flat.append(leaves[i])
            running = leaves[i] if running is None else max(running, leaves[i])
            pmax_flat.append(running)
            rows_flat.append(i if rows is None else rows[i])
        starts.append(len(enters_flat))
    return part_map, starts, enters_flat, leaves_flat, pmax_flat, rows_flat
