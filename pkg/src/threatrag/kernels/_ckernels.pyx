# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Must stay semantically identical to _pykernels: sequential float64
accumulation in index order so scores are bit-for-bit equal across backends.
"""

from array import array

from libc.math cimport sqrt

BACKEND_NAME = "c"


cdef double _dot(const double[::1] a, const double[::1] b, Py_ssize_t dim) noexcept:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(dim):
        acc += a[i] * b[i]
    return acc


cdef double _norm_at(const double[::1] a, Py_ssize_t offset, Py_ssize_t dim) noexcept:
    cdef double acc = 0.0
    cdef double x
    cdef Py_ssize_t i
    for i in range(dim):
        x = a[offset + i]
        acc += x * x
    return sqrt(acc)


def dot(a, b, dim):
    cdef double[::1] av = array("d", a) if not isinstance(a, array) else a
    cdef double[::1] bv = array("d", b) if not isinstance(b, array) else b
    return _dot(av, bv, dim)


def norm(a, dim, offset=0):
    cdef double[::1] av = array("d", a) if not isinstance(a, array) else a
    return _norm_at(av, offset, dim)


def cosine(a, b):
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    cdef double[::1] av = array("d", a) if not isinstance(a, array) else a
    cdef double[::1] bv = array("d", b) if not isinstance(b, array) else b
    cdef Py_ssize_t dim = len(a)
    cdef double na = _norm_at(av, 0, dim)
    cdef double nb = _norm_at(bv, 0, dim)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return _dot(av, bv, dim) / (na * nb)


def cosine_scores(flat, n, dim, query):
    """Cosine of `query` against n row vectors stored flat (row-major)."""
    cdef double[::1] fv = flat if isinstance(flat, array) else array("d", flat)
    cdef double[::1] qv = array("d", query) if not isinstance(query, array) else query
    cdef Py_ssize_t cn = n
    cdef Py_ssize_t cd = dim
    cdef double qn = _norm_at(qv, 0, cd)
    if qn == 0.0:
        raise ValueError("cosine undefined for zero-norm query")
    out = array("d", bytes(8 * cn))
    cdef double[::1] ov = out
    cdef Py_ssize_t r, i, base
    cdef double acc, sq, v, rn
    for r in range(cn):
        base = r * cd
        acc = 0.0
        sq = 0.0
        for i in range(cd):
            v = fv[base + i]
            acc += v * qv[i]
            sq += v * v
        rn = sqrt(sq)
        if rn == 0.0:
            raise ValueError(f"zero-norm vector at row {r}")
        ov[r] = acc / (rn * qn)
    return out


def bertscore_pr(cand_flat, nc, ref_flat, nr, dim):
    """Greedy-match precision/recall over token vectors (cosines clamped to [0,1])."""
    cdef double[::1] cv = cand_flat if isinstance(cand_flat, array) else array("d", cand_flat)
    cdef double[::1] rv = ref_flat if isinstance(ref_flat, array) else array("d", ref_flat)
    cdef Py_ssize_t cnc = nc
    cdef Py_ssize_t cnr = nr
    cdef Py_ssize_t cd = dim

    cnorms = array("d", bytes(8 * cnc))
    rnorms = array("d", bytes(8 * cnr))
    cdef double[::1] cnv = cnorms
    cdef double[::1] rnv = rnorms
    cdef Py_ssize_t i, j, k
    for j in range(cnc):
        cnv[j] = _norm_at(cv, j * cd, cd)
        if cnv[j] == 0.0:
            raise ValueError(f"zero-norm candidate token vector at index {j}")
    for i in range(cnr):
        rnv[i] = _norm_at(rv, i * cd, cd)
        if rnv[i] == 0.0:
            raise ValueError(f"zero-norm reference token vector at index {i}")

    col_max = array("d", bytes(8 * cnc))
    cdef double[::1] cmv = col_max
    cdef double row_sum = 0.0
    cdef double row_max, acc, c
    cdef Py_ssize_t rbase, cbase
    for i in range(cnr):
        rbase = i * cd
        row_max = 0.0
        for j in range(cnc):
            cbase = j * cd
            acc = 0.0
            for k in range(cd):
                acc += rv[rbase + k] * cv[cbase + k]
            c = acc / (rnv[i] * cnv[j])
            if c < 0.0:
                c = 0.0
            elif c > 1.0:
                c = 1.0
            if c > row_max:
                row_max = c
            if c > cmv[j]:
                cmv[j] = c
        row_sum += row_max

    cdef double p_sum = 0.0
    for j in range(cnc):
        p_sum += cmv[j]
    return p_sum / cnc, row_sum / cnr
