"""Backend parity: every kernel must behave identically in pure Python and
compiled form, across dense and sparse key ranges."""

import random
from array import array

import pytest

from plantpulse.kernels import (
    OP_BETWEEN,
    OP_EQ,
    OP_GE,
    OP_GT,
    OP_ISNULL,
    OP_LE,
    OP_LT,
    OP_NE,
    OP_NOTNULL,
    build_interval_index,
    pure,
)

BACKENDS = [pytest.param(pure, id="pure")]
try:
    from plantpulse.kernels import _ckernels

    BACKENDS.append(pytest.param(_ckernels, id="compiled"))
except ImportError:
    pass


def bits(flags):
    out = bytearray((len(flags) + 7) >> 3)
    for i, f in enumerate(flags):
        if f:
            out[i >> 3] |= 1 << (i & 7)
    return bytes(out)


def rand_column(rng, n, lo=0, hi=1000, null_rate=0.2, float_values=False):
    values = array("d" if float_values else "q")
    flags = []
    for _ in range(n):
        if rng.random() < null_rate:
            values.append(0)
            flags.append(False)
        else:
            values.append(rng.uniform(lo, hi) if float_values else rng.randrange(lo, hi))
            flags.append(True)
    return values, bits(flags), flags


@pytest.mark.parametrize("backend", BACKENDS)
class TestFilters:
    OPS = [
        (OP_EQ, lambda v, lo, hi: v == lo),
        (OP_NE, lambda v, lo, hi: v != lo),
        (OP_LT, lambda v, lo, hi: v < lo),
        (OP_LE, lambda v, lo, hi: v <= lo),
        (OP_GT, lambda v, lo, hi: v > lo),
        (OP_GE, lambda v, lo, hi: v >= lo),
        (OP_BETWEEN, lambda v, lo, hi: lo <= v <= hi),
    ]

    def test_i64_ops_match_reference(self, backend):
        rng = random.Random(1)
        values, validity, flags = rand_column(rng, 500)
        for op, ref in self.OPS:
            got = list(backend.filter_i64(values, validity, op, 300, 700))
            expected = [
                i for i in range(500) if flags[i] and ref(values[i], 300, 700)
            ]
            assert got == expected, f"op {op}"

    def test_f64_ops_match_reference(self, backend):
        rng = random.Random(2)
        values, validity, flags = rand_column(rng, 500, float_values=True)
        for op, ref in self.OPS:
            got = list(backend.filter_f64(values, validity, op, 300.5, 700.25))
            expected = [
                i for i in range(500) if flags[i] and ref(values[i], 300.5, 700.25)
            ]
            assert got == expected

    def test_null_ops(self, backend):
        rng = random.Random(3)
        values, validity, flags = rand_column(rng, 200)
        nulls = list(backend.filter_i64(values, validity, OP_ISNULL, 0, 0))
        non_nulls = list(backend.filter_i64(values, validity, OP_NOTNULL, 0, 0))
        assert nulls == [i for i in range(200) if not flags[i]]
        assert non_nulls == [i for i in range(200) if flags[i]]

    def test_no_validity_means_all_valid(self, backend):
        values = array("q", [5, 10, 15])
        assert list(backend.filter_i64(values, None, OP_GT, 7, 0)) == [1, 2]
        assert list(backend.filter_i64(values, None, OP_ISNULL, 0, 0)) == []

    def test_subset_chaining(self, backend):
        values = array("q", [1, 2, 3, 4, 5, 6])
        subset = array("q", [0, 2, 4])
        got = list(backend.filter_i64(values, None, OP_GE, 3, 0, subset))
        assert got == [2, 4]


@pytest.mark.parametrize("backend", BACKENDS)
class TestGather:
    def test_gathers(self, backend):
        values = array("q", [10, 20, 30, 40])
        fvalues = array("d", [1.5, 2.5, 3.5, 4.5])
        idx = array("q", [3, 0, 0, 2])
        assert list(backend.gather_i64(values, idx)) == [40, 10, 10, 30]
        assert list(backend.gather_f64(fvalues, idx)) == [4.5, 1.5, 1.5, 3.5]

    def test_gather_bits(self, backend):
        validity = bits([True, False, True, False])
        idx = array("q", [1, 0, 3, 2])
        out = backend.gather_bits(validity, idx)
        assert [(out[i >> 3] >> (i & 7)) & 1 for i in range(4)] == [0, 1, 0, 1]
        assert backend.gather_bits(None, idx) is None


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("key_base", [1, 10_000_000_000], ids=["dense", "sparse"])
class TestHashJoin:
    def test_matches_nested_loop(self, backend, key_base):
        rng = random.Random(4)
        nb, np_ = 80, 300
        build = array("q", [key_base + rng.randrange(0, 40) for _ in range(nb)])
        probe = array("q", [key_base + rng.randrange(0, 40) for _ in range(np_)])
        bflags = [rng.random() > 0.1 for _ in range(nb)]
        pflags = [rng.random() > 0.1 for _ in range(np_)]
        got_p, got_b = backend.hash_join(build, bits(bflags), probe, bits(pflags))
        expected = [
            (i, j)
            for i in range(np_)
            if pflags[i]
            for j in range(nb)
            if bflags[j] and build[j] == probe[i]
        ]
        assert list(zip(got_p, got_b)) == expected


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("key_base", [1, 10_000_000_000], ids=["dense", "sparse"])
class TestIntervalProbe:
    def test_matches_nested_loop(self, backend, key_base):
        rng = random.Random(5)
        n_intervals, n_probes = 60, 400
        keys = array("q", [key_base + rng.randrange(0, 4) for _ in range(n_intervals)])
        enters = array("q")
        leaves = array("q")
        leave_flags = []
        for _ in range(n_intervals):
            start = rng.randrange(0, 1000)
            enters.append(start)
            leaves.append(start + rng.randrange(0, 200))
            leave_flags.append(rng.random() > 0.2)
        part = build_interval_index(keys, enters, leaves, bits(leave_flags))

        probe_keys = array("q", [key_base + rng.randrange(0, 4) for _ in range(n_probes)])
        probe_times = array("q", [rng.randrange(0, 1200) for _ in range(n_probes)])
        got_p, got_b = backend.interval_probe(
            *part, probe_keys, None, probe_times, None
        )
        expected = sorted(
            (i, j)
            for i in range(n_probes)
            for j in range(n_intervals)
            if leave_flags[j]
            and keys[j] == probe_keys[i]
            and enters[j] <= probe_times[i] <= leaves[j]
        )
        assert sorted(zip(got_p, got_b)) == expected


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("key_base", [1, 10_000_000_000], ids=["dense", "sparse"])
class TestGroupStats:
    def test_int_values_match_reference(self, backend, key_base):
        rng = random.Random(6)
        n = 1000
        keys = array("q", [key_base + rng.randrange(0, 20) for _ in range(n)])
        values, validity, flags = rand_column(rng, n, lo=-50, hi=50)
        got = backend.group_stats_i64(keys, values, validity)
        expected: dict = {}
        for i in range(n):
            s = expected.setdefault(keys[i], [0, 0, 0, None, None])
            s[0] += 1
            if flags[i]:
                v = values[i]
                s[1] += 1
                s[2] += v
                s[3] = v if s[3] is None else min(s[3], v)
                s[4] = v if s[4] is None else max(s[4], v)
        assert list(got) == list(expected)  # first-encounter order
        for key in expected:
            assert list(got[key]) == expected[key]

    def test_float_values(self, backend, key_base):
        rng = random.Random(7)
        n = 500
        keys = array("q", [key_base + rng.randrange(0, 5) for _ in range(n)])
        values, validity, flags = rand_column(rng, n, float_values=True)
        got = backend.group_stats_f64(keys, values, validity)
        for key, stats in got.items():
            group_values = [
                values[i] for i in range(n) if keys[i] == key and flags[i]
            ]
            assert stats[0] == sum(1 for i in range(n) if keys[i] == key)
            assert stats[1] == len(group_values)
            if group_values:
                assert abs(stats[2] - sum(group_values)) < 1e-9
                assert stats[3] == min(group_values)
                assert stats[4] == max(group_values)
            else:
                assert stats[3] is None and stats[4] is None

    def test_counts_only(self, backend, key_base):
        keys = array("q", [key_base, key_base + 1, key_base, key_base])
        got = backend.group_stats_i64(keys, None, None)
        assert got[key_base][0] == 3
        assert got[key_base + 1][0] == 1


def test_backend_selection():
    import os

    from plantpulse import kernels

    if os.environ.get("PLANTPULSE_PURE"):
        assert kernels.BACKEND == "pure"
    elif len(BACKENDS) == 2:
        assert kernels.BACKEND == "compiled"
