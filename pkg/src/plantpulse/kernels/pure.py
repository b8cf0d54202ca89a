"""Pure-Python kernel backend. Same contract as the compiled extension."""

from array import array
from bisect import bisect_right

OP_EQ = 0
OP_NE = 1
OP_LT = 2
OP_LE = 3
OP_GT = 4
OP_GE = 5
OP_BETWEEN = 6
OP_ISNULL = 7
OP_NOTNULL = 8

_CMP = {
    OP_EQ: lambda v, lo, hi: v == lo,
    OP_NE: lambda v, lo, hi: v != lo,
    OP_LT: lambda v, lo, hi: v < lo,
    OP_LE: lambda v, lo, hi: v <= lo,
    OP_GT: lambda v, lo, hi: v > lo,
    OP_GE: lambda v, lo, hi: v >= lo,
    OP_BETWEEN: lambda v, lo, hi: lo <= v <= hi,
}


def _valid(validity, i):
    return validity is None or (validity[i >> 3] >> (i & 7)) & 1


def _filter(values, validity, op, lo, hi, indices):
    it = range(len(values)) if indices is None else indices
    out = array("q")
    append = out.append
    if op == OP_ISNULL:
        if validity is None:
            return out
        for i in it:
            if not (validity[i >> 3] >> (i & 7)) & 1:
                append(i)
        return out
    if op == OP_NOTNULL:
        if validity is None:
            out.extend(it)
            return out
        for i in it:
            if (validity[i >> 3] >> (i & 7)) & 1:
                append(i)
        return out
    cmp = _CMP[op]
    if validity is None:
        for i in it:
            if cmp(values[i], lo, hi):
                append(i)
    else:
        for i in it:
            if (validity[i >> 3] >> (i & 7)) & 1 and cmp(values[i], lo, hi):
                append(i)
    return out


def filter_i64(values, validity, op, lo, hi, indices=None):
    """Row positions (within ``indices`` or the whole column) passing the op.

    ``lo``/``hi`` are numeric bounds; comparisons against null rows fail.
    """
    return _filter(values, validity, op, lo, hi, indices)


def filter_f64(values, validity, op, lo, hi, indices=None):
    return _filter(values, validity, op, lo, hi, indices)


def hash_join(build_keys, build_valid, probe_keys, probe_valid):
    """Inner equality join; returns (probe_positions, build_positions).

    Output is probe-major in probe order; ties keep build insertion order.
    Null keys on either side match nothing.
    """
    table: dict = {}
    for j in range(len(build_keys)):
        if _valid(build_valid, j):
            table.setdefault(build_keys[j], []).append(j)
    probe_out = array("q")
    build_out = array("q")
    get = table.get
    for i in range(len(probe_keys)):
        if not _valid(probe_valid, i):
            continue
        matches = get(probe_keys[i])
        if matches:
            for j in matches:
                probe_out.append(i)
                build_out.append(j)
    return probe_out, build_out


def interval_probe(
    part_map,
    starts,
    enters_flat,
    leaves_flat,
    pmax_flat,
    rows_flat,
    probe_keys,
    probe_keys_valid,
    probe_times,
    probe_times_valid,
):
    """Match probe rows into key-partitioned [enter, leave] intervals.

    A probe row (key, t) matches build interval rows with the same key and
    enter <= t <= leave, bounds inclusive. Partitions come from
    ``build_interval_index``. Returns (probe_positions, build_row_ids).
    """
    probe_out = array("q")
    build_out = array("q")
    get = part_map.get
    for i in range(len(probe_keys)):
        if not _valid(probe_keys_valid, i) or not _valid(probe_times_valid, i):
            continue
        p = get(probe_keys[i])
        if p is None:
            continue
        t = probe_times[i]
        lo = starts[p]
        j = bisect_right(enters_flat, t, lo, starts[p + 1])
        while j > lo:
            j -= 1
            if pmax_flat[j] < t:
                break
            if leaves_flat[j] >= t:
                probe_out.append(i)
                build_out.append(rows_flat[j])
    return probe_out, build_out


def gather_i64(values, indices):
    return array("q", (values[i] for i in indices))


def gather_f64(values, indices):
    return array("d", (values[i] for i in indices))


def gather_bits(validity, indices):
    """Re-pack validity bits for the gathered row positions."""
    if validity is None:
        return None
    out = bytearray((len(indices) + 7) >> 3)
    for k, i in enumerate(indices):
        if (validity[i >> 3] >> (i & 7)) & 1:
            out[k >> 3] |= 1 << (k & 7)
    return out


def _group_stats(keys, values, validity):
    stats: dict = {}
    get = stats.get
    if values is None:
        for i in range(len(keys)):
            k = keys[i]
            s = get(k)
            if s is None:
                stats[k] = [1, 0, 0.0, None, None]
            else:
                s[0] += 1
        return stats
    for i in range(len(keys)):
        k = keys[i]
        s = get(k)
        if s is None:
            s = stats[k] = [1, 0, 0.0, None, None]
        else:
            s[0] += 1
        if _valid(validity, i):
            v = values[i]
            s[1] += 1
            s[2] += v
            if s[3] is None or v < s[3]:
                s[3] = v
            if s[4] is None or v > s[4]:
                s[4] = v
    return stats


def group_stats_i64(keys, values, validity):
    """Aggregate int64 values per int64 key.

    Returns {key: [row_count, nonnull_count, sum, min, max]} preserving
    first-encounter key order. ``values=None`` computes row counts only.
    """
    return _group_stats(keys, values, validity)


def group_stats_f64(keys, values, validity):
    return _group_stats(keys, values, validity)
