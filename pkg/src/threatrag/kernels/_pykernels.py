"""Pure-Python kernel fallback.

Semantics mirror the compiled backend operation-for-operation: sequential
float64 accumulation in index order, so both backends produce bit-identical
scores. Keep the loops dumb; any reordering (fsum, numpy dot) would change
the last bits and break cross-backend equality.
"""

import math
from array import array

BACKEND_NAME = "python"


def dot(a, b, dim):
    acc = 0.0
    for i in range(dim):
        acc += a[i] * b[i]
    return acc


def norm(a, dim, offset=0):
    acc = 0.0
    for i in range(dim):
        x = a[offset + i]
        acc += x * x
    return math.sqrt(acc)


def cosine(a, b):
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    dim = len(a)
    na = norm(a, dim)
    nb = norm(b, dim)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return dot(a, b, dim) / (na * nb)


def cosine_scores(flat, n, dim, query):
    """Cosine of `query` against n row vectors stored flat (row-major)."""
    qn = norm(query, dim)
    if qn == 0.0:
        raise ValueError("cosine undefined for zero-norm query")
    out = array("d", bytes(8 * n))
    for r in range(n):
        base = r * dim
        acc = 0.0
        sq = 0.0
        for i in range(dim):
            v = flat[base + i]
            acc += v * query[i]
            sq += v * v
        rn = math.sqrt(sq)
        if rn == 0.0:
            raise ValueError(f"zero-norm vector at row {r}")
        out[r] = acc / (rn * qn)
    return out


def bertscore_pr(cand_flat, nc, ref_flat, nr, dim):
    """Greedy-match precision/recall over token vectors.

    P = mean over candidate tokens of max cosine to any reference token,
    R = mean over reference tokens of max cosine to any candidate token,
    each pairwise cosine clamped to [0, 1] before the max/mean.
    """
    cnorms = [norm(cand_flat, dim, offset=j * dim) for j in range(nc)]
    rnorms = [norm(ref_flat, dim, offset=i * dim) for i in range(nr)]
    for j, x in enumerate(cnorms):
        if x == 0.0:
            raise ValueError(f"zero-norm candidate token vector at index {j}")
    for i, x in enumerate(rnorms):
        if x == 0.0:
            raise ValueError(f"zero-norm reference token vector at index {i}")

    col_max = [0.0] * nc
    row_sum = 0.0
    for i in range(nr):
        rbase = i * dim
        row_max = 0.0
        for j in range(nc):
            cbase = j * dim
            acc = 0.0
            for k in range(dim):
                acc += ref_flat[rbase + k] * cand_flat[cbase + k]
            c = acc / (rnorms[i] * cnorms[j])
            if c < 0.0:
                c = 0.0
            elif c > 1.0:
                c = 1.0
            if c > row_max:
                row_max = c
            if c > col_max[j]:
                col_max[j] = c
        row_sum += row_max

    p_sum = 0.0
    for j in range(nc):
        p_sum += col_max[j]
    return p_sum / nc, row_sum / nr
