# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend; contract documented in plantpulse.kernels.

Same observable behavior as the pure backend, with C inner loops. Joins and
grouping take a dense-key fast path (chained buckets / direct accumulation
arrays) when key ranges are compact, which is the common case for this
schema's monotonically allocated IDs; sparse or huge key ranges fall back to
dict-based paths. Integer sums accumulate in int64, float sums in double.
"""

from cpython cimport array
import array as _array

ctypedef long long i64

cdef enum:
    C_EQ = 0
    C_NE = 1
    C_LT = 2
    C_LE = 3
    C_GT = 4
    C_GE = 5
    C_BETWEEN = 6
    C_ISNULL = 7
    C_NOTNULL = 8

OP_EQ = C_EQ
OP_NE = C_NE
OP_LT = C_LT
OP_LE = C_LE
OP_GT = C_GT
OP_GE = C_GE
OP_BETWEEN = C_BETWEEN
OP_ISNULL = C_ISNULL
OP_NOTNULL = C_NOTNULL

cdef array.array _I64_TEMPLATE = _array.array('q')
cdef array.array _F64_TEMPLATE = _array.array('d')

# dense fast paths allocate up to this many slots per unit of input
DEF DENSE_SLACK = 4
DEF DENSE_FLOOR = 65536


cdef inline bint _bit(const unsigned char[:] bits, Py_ssize_t i) nogil:
    return (bits[i >> 3] >> (i & 7)) & 1


cdef inline bint _cmp_ok(double v, int op, double lo, double hi) nogil:
    if op == C_EQ:
        return v == lo
    if op == C_NE:
        return v != lo
    if op == C_LT:
        return v < lo
    if op == C_LE:
        return v <= lo
    if op == C_GT:
        return v > lo
    if op == C_GE:
        return v >= lo
    return lo <= v <= hi  # C_BETWEEN


cdef array.array _new_i64(Py_ssize_t n):
    return array.clone(_I64_TEMPLATE, n, zero=False)


def filter_i64(values, validity, int op, lo, hi, indices=None):
    cdef const i64[:] vals = values
    cdef double dlo = 0.0, dhi = 0.0
    if op != C_ISNULL and op != C_NOTNULL:
        dlo = lo
        dhi = hi if hi is not None else 0.0
    return _filter(vals, None, validity, op, dlo, dhi, indices)


def filter_f64(values, validity, int op, lo, hi, indices=None):
    cdef const double[:] vals = values
    cdef double dlo = 0.0, dhi = 0.0
    if op != C_ISNULL and op != C_NOTNULL:
        dlo = lo
        dhi = hi if hi is not None else 0.0
    return _filter(None, vals, validity, op, dlo, dhi, indices)


cdef _filter(const i64[:] ivals, const double[:] fvals, validity,
             int op, double lo, double hi, indices):
    cdef Py_ssize_t n = ivals.shape[0] if ivals is not None else fvals.shape[0]
    cdef const unsigned char[:] bits = None
    if validity is not None:
        bits = validity
    cdef const i64[:] idx = None
    cdef Py_ssize_t m = n
    if indices is not None:
        idx = indices
        m = idx.shape[0]
    cdef array.array out = _new_i64(m)
    cdef i64* op_ptr = out.data.as_longlongs
    cdef Py_ssize_t k = 0, pos, j
    cdef bint valid, keep
    cdef double v
    for j in range(m):
        pos = idx[j] if idx is not None else j
        valid = bits is None or _bit(bits, pos)
        if op == C_ISNULL:
            keep = not valid
        elif op == C_NOTNULL:
            keep = valid
        elif not valid:
            keep = False
        else:
            v = <double>ivals[pos] if ivals is not None else fvals[pos]
            keep = _cmp_ok(v, op, lo, hi)
        if keep:
            op_ptr[k] = pos
            k += 1
    array.resize(out, k)
    return out


def gather_i64(values, indices):
    cdef const i64[:] vals = values
    cdef const i64[:] idx = indices
    cdef Py_ssize_t m = idx.shape[0]
    cdef array.array out = _new_i64(m)
    cdef i64* op_ptr = out.data.as_longlongs
    cdef Py_ssize_t j
    for j in range(m):
        op_ptr[j] = vals[idx[j]]
    return out


def gather_f64(values, indices):
    cdef const double[:] vals = values
    cdef const i64[:] idx = indices
    cdef Py_ssize_t m = idx.shape[0]
    cdef array.array out = array.clone(_F64_TEMPLATE, m, zero=False)
    cdef double* op_ptr = out.data.as_doubles
    cdef Py_ssize_t j
    for j in range(m):
        op_ptr[j] = vals[idx[j]]
    return out


def gather_bits(validity, indices):
    if validity is None:
        return None
    cdef const unsigned char[:] bits = validity
    cdef const i64[:] idx = indices
    cdef Py_ssize_t m = idx.shape[0]
    out = bytearray((m + 7) >> 3)
    cdef unsigned char[:] ov = out
    cdef Py_ssize_t j
    for j in range(m):
        if _bit(bits, idx[j]):
            ov[j >> 3] |= 1 << (j & 7)
    return out


cdef bint _key_range(const i64[:] keys, const unsigned char[:] bits,
                     i64* lo_out, i64* hi_out):
    """Min/max over valid keys; False when no valid key exists."""
    cdef Py_ssize_t n = keys.shape[0]
    cdef i64 lo = 0, hi = 0
    cdef bint seen = False
    cdef Py_ssize_t i
    for i in range(n):
        if bits is not None and not _bit(bits, i):
            continue
        if not seen:
            lo = hi = keys[i]
            seen = True
        elif keys[i] < lo:
            lo = keys[i]
        elif keys[i] > hi:
            hi = keys[i]
    lo_out[0] = lo
    hi_out[0] = hi
    return seen


def hash_join(build_keys, build_valid, probe_keys, probe_valid):
    """Inner equality join; see the pure backend for output order semantics."""
    cdef const i64[:] bk = build_keys
    cdef const i64[:] pk = probe_keys
    cdef const unsigned char[:] bbits = None
    cdef const unsigned char[:] pbits = None
    if build_valid is not None:
        bbits = build_valid
    if probe_valid is not None:
        pbits = probe_valid
    cdef Py_ssize_t nb = bk.shape[0], np = pk.shape[0]
    cdef i64 lo = 0, hi = 0
    if not _key_range(bk, bbits, &lo, &hi):
        return _new_i64(0)[:0], _new_i64(0)[:0]

    cdef i64 span = hi - lo + 1
    if lo >= 0 and span <= max(DENSE_FLOOR, DENSE_SLACK * nb):
        return _hash_join_dense(bk, bbits, pk, pbits, lo, span)
    return _hash_join_dict(bk, bbits, pk, pbits)


cdef _hash_join_dense(const i64[:] bk, const unsigned char[:] bbits,
                      const i64[:] pk, const unsigned char[:] pbits,
                      i64 lo, i64 span):
    cdef Py_ssize_t nb = bk.shape[0], np = pk.shape[0]
    # chained buckets: head[key] -> first build position, nxt -> later ones
    cdef array.array head_arr = _new_i64(span)
    cdef array.array next_arr = _new_i64(nb)
    cdef i64* head = head_arr.data.as_longlongs
    cdef i64* nxt = next_arr.data.as_longlongs
    cdef Py_ssize_t i, j
    for i in range(span):
        head[i] = -1
    # iterate build side backwards so chains pop in insertion order
    for j in range(nb - 1, -1, -1):
        if bbits is not None and not _bit(bbits, j):
            continue
        nxt[j] = head[bk[j] - lo]
        head[bk[j] - lo] = j
    cdef Py_ssize_t cap = np if np > 16 else 16
    cdef array.array probe_out = _new_i64(cap)
    cdef array.array build_out = _new_i64(cap)
    cdef Py_ssize_t k = 0
    cdef i64 key, chain
    for i in range(np):
        if pbits is not None and not _bit(pbits, i):
            continue
        key = pk[i] - lo
        if key < 0 or key >= span:
            continue
        chain = head[key]
        while chain != -1:
            if k == cap:
                cap += cap >> 1 if cap > 64 else cap
                array.resize(probe_out, cap)
                array.resize(build_out, cap)
            probe_out.data.as_longlongs[k] = i
            build_out.data.as_longlongs[k] = chain
            k += 1
            chain = nxt[chain]
    array.resize(probe_out, k)
    array.resize(build_out, k)
    return probe_out, build_out


cdef _hash_join_dict(const i64[:] bk, const unsigned char[:] bbits,
                     const i64[:] pk, const unsigned char[:] pbits):
    cdef Py_ssize_t nb = bk.shape[0], np = pk.shape[0]
    table = {}
    cdef Py_ssize_t j, i
    for j in range(nb):
        if bbits is not None and not _bit(bbits, j):
            continue
        table.setdefault(bk[j], []).append(j)
    cdef array.array probe_out = _new_i64(0)
    cdef array.array build_out = _new_i64(0)
    cdef list matches
    for i in range(np):
        if pbits is not None and not _bit(pbits, i):
            continue
        matches = <list> table.get(pk[i])
        if matches is not None:
            for j in matches:
                probe_out.append(i)
                build_out.append(j)
    return probe_out, build_out


def interval_probe(part_map, starts, enters_flat, leaves_flat, pmax_flat,
                   rows_flat, probe_keys, probe_keys_valid, probe_times,
                   probe_times_valid):
    """Match probe (key, t) rows into key-partitioned [enter, leave] intervals."""
    cdef const i64[:] st = starts
    cdef const i64[:] en = enters_flat
    cdef const i64[:] lv = leaves_flat
    cdef const i64[:] pm = pmax_flat
    cdef const i64[:] rw = rows_flat
    cdef const i64[:] pk = probe_keys
    cdef const i64[:] pt = probe_times
    cdef const unsigned char[:] kbits = None
    cdef const unsigned char[:] tbits = None
    if probe_keys_valid is not None:
        kbits = probe_keys_valid
    if probe_times_valid is not None:
        tbits = probe_times_valid
    cdef Py_ssize_t np = pk.shape[0]

    # key -> partition index, densified when the key range is compact
    cdef i64 kmin = 0, kmax = 0
    cdef bint dense = len(part_map) > 0
    cdef i64 key
    for key in part_map:
        if key < kmin:
            kmin = key
        if key > kmax:
            kmax = key
    cdef i64 span = kmax - kmin + 1 if dense else 0
    cdef array.array pid_arr = None
    cdef i64* pid = NULL
    cdef Py_ssize_t i
    if dense and kmin >= 0 and span <= max(DENSE_FLOOR, DENSE_SLACK * len(part_map)):
        pid_arr = _new_i64(span)
        pid = pid_arr.data.as_longlongs
        for i in range(span):
            pid[i] = -1
        for key, value in part_map.items():
            pid[key - kmin] = value
    else:
        dense = False

    cdef Py_ssize_t cap = np if np > 16 else 16
    cdef array.array probe_out = _new_i64(cap)
    cdef array.array build_out = _new_i64(cap)
    cdef Py_ssize_t k = 0
    cdef i64 t, p
    cdef Py_ssize_t lo_idx, hi_idx, j, mid
    part_get = part_map.get
    for i in range(np):
        if kbits is not None and not _bit(kbits, i):
            continue
        if tbits is not None and not _bit(tbits, i):
            continue
        key = pk[i]
        if dense:
            if key < kmin or key - kmin >= span:
                continue
            p = pid[key - kmin]
            if p < 0:
                continue
        else:
            hit = part_get(key)
            if hit is None:
                continue
            p = hit
        t = pt[i]
        lo_idx = st[p]
        hi_idx = st[p + 1]
        # bisect right over enters within the partition
        while lo_idx < hi_idx:
            mid = (lo_idx + hi_idx) >> 1
            if en[mid] <= t:
                lo_idx = mid + 1
            else:
                hi_idx = mid
        j = lo_idx
        while j > st[p]:
            j -= 1
            if pm[j] < t:
                break
            if lv[j] >= t:
                if k == cap:
                    cap += cap >> 1 if cap > 64 else cap
                    array.resize(probe_out, cap)
                    array.resize(build_out, cap)
                probe_out.data.as_longlongs[k] = i
                build_out.data.as_longlongs[k] = rw[j]
                k += 1
    array.resize(probe_out, k)
    array.resize(build_out, k)
    return probe_out, build_out


def group_stats_i64(keys, values, validity):
    return _group_stats(keys, values, None, validity, True)


def group_stats_f64(keys, values, validity):
    return _group_stats(keys, None, values, validity, False)


cdef _group_stats(keys, ivalues, fvalues, validity, bint as_int):
    cdef const i64[:] ks = keys
    cdef const i64[:] iv = None
    cdef const double[:] fv = None
    cdef bint has_values = False
    if ivalues is not None:
        iv = ivalues
        has_values = True
    if fvalues is not None:
        fv = fvalues
        has_values = True
    cdef const unsigned char[:] bits = None
    if validity is not None:
        bits = validity
    cdef Py_ssize_t n = ks.shape[0]
    if n == 0:
        return {}

    cdef i64 lo = 0, hi = 0
    _key_range(ks, None, &lo, &hi)
    cdef i64 span = hi - lo + 1
    if lo >= 0 and span <= max(DENSE_FLOOR, DENSE_SLACK * n):
        return _group_dense(ks, iv, fv, bits, has_values, as_int, lo, span)
    return _group_dict(ks, iv, fv, bits, has_values, as_int)


cdef _group_dense(const i64[:] ks, const i64[:] iv, const double[:] fv,
                  const unsigned char[:] bits, bint has_values, bint as_int,
                  i64 lo, i64 span):
    cdef Py_ssize_t n = ks.shape[0]
    cdef array.array nrows_a = _new_i64(span)
    cdef array.array nnull_a = _new_i64(span)
    cdef array.array isum_a = _new_i64(span)
    cdef array.array fsum_a = array.clone(_F64_TEMPLATE, span, zero=False)
    cdef array.array imin_a = _new_i64(span)
    cdef array.array imax_a = _new_i64(span)
    cdef array.array fmin_a = array.clone(_F64_TEMPLATE, span, zero=False)
    cdef array.array fmax_a = array.clone(_F64_TEMPLATE, span, zero=False)
    cdef i64* nrows = nrows_a.data.as_longlongs
    cdef i64* nnull = nnull_a.data.as_longlongs
    cdef i64* isum = isum_a.data.as_longlongs
    cdef double* fsum = fsum_a.data.as_doubles
    cdef i64* imin = imin_a.data.as_longlongs
    cdef i64* imax = imax_a.data.as_longlongs
    cdef double* fmin = fmin_a.data.as_doubles
    cdef double* fmax = fmax_a.data.as_doubles
    cdef Py_ssize_t i
    for i in range(span):
        nrows[i] = 0
    order = []
    cdef i64 slot
    cdef i64 ival
    cdef double fval
    for i in range(n):
        slot = ks[i] - lo
        if nrows[slot] == 0:
            order.append(ks[i])
            nnull[slot] = 0
            isum[slot] = 0
            fsum[slot] = 0.0
        nrows[slot] += 1
        if not has_values:
            continue
        if bits is not None and not _bit(bits, i):
            continue
        if iv is not None:
            ival = iv[i]
            if nnull[slot] == 0:
                imin[slot] = ival
                imax[slot] = ival
            else:
                if ival < imin[slot]:
                    imin[slot] = ival
                if ival > imax[slot]:
                    imax[slot] = ival
            isum[slot] += ival
        else:
            fval = fv[i]
            if nnull[slot] == 0:
                fmin[slot] = fval
                fmax[slot] = fval
            else:
                if fval < fmin[slot]:
                    fmin[slot] = fval
                if fval > fmax[slot]:
                    fmax[slot] = fval
            fsum[slot] += fval
        nnull[slot] += 1
    out = {}
    cdef i64 key
    for key in order:
        slot = key - lo
        if not has_values or nnull[slot] == 0:
            out[key] = [nrows[slot], nnull[slot],
                        isum[slot] if as_int else fsum[slot], None, None]
        elif as_int:
            out[key] = [nrows[slot], nnull[slot], isum[slot], imin[slot], imax[slot]]
        else:
            out[key] = [nrows[slot], nnull[slot], fsum[slot], fmin[slot], fmax[slot]]
    return out


cdef _group_dict(const i64[:] ks, const i64[:] iv, const double[:] fv,
                 const unsigned char[:] bits, bint has_values, bint as_int):
    cdef Py_ssize_t n = ks.shape[0]
    stats = {}
    cdef Py_ssize_t i
    cdef list s
    for i in range(n):
        s = <list> stats.get(ks[i])
        if s is None:
            s = [0, 0, 0 if as_int else 0.0, None, None]
            stats[ks[i]] = s
        s[0] += 1
        if not has_values:
            continue
        if bits is not None and not _bit(bits, i):
            continue
        value = iv[i] if iv is not None else fv[i]
        s[1] += 1
        s[2] += value
        if s[3] is None or value < s[3]:
            s[3] = value
        if s[4] is None or value > s[4]:
            s[4] = value
    return stats
