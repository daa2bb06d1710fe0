# cython: language_level=3
"""Compiled kernels for log-likelihoods and their exact gradients.

Mirrors :mod:`latentforce._kernels._numpy` function for function; see that
module for the conventions.  Pair loops here visit each unordered pair
once, compute the squared distance a single time, and run without the
GIL so independent restarts can execute on real threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1, log, log1p

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8
ctypedef cnp.uint8_t u8

# log(1e-300); must match the NumPy backend exactly.
LOG_FLOOR = -690.77552789821368
cdef double _LOG_FLOOR = -690.77552789821368


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double _log1pexp(double x) noexcept nogil:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline double _sq_dist(const double[:, ::1] pos, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double acc = 0.0, diff
    cdef Py_ssize_t k
    for k in range(pos.shape[1]):
        diff = pos[i, k] - pos[j, k]
        acc += diff * diff
    return acc


# ---------------------------------------------------------------------------
# unweighted family


def unweighted_loglik(const double[:, ::1] pos, const double[::1] alpha,
                      const double[::1] beta, const i64[::1] src,
                      const i64[::1] dst, bint undirected):
    cdef Py_ssize_t n = pos.shape[0]
    if n == 0:
        return 0.0
    cdef double ll = 0.0, d2
    cdef Py_ssize_t i, j, e
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d2 = _sq_dist(pos, i, j)
                if undirected:
                    ll -= _log1pexp(alpha[i] + alpha[j] - d2)
                else:
                    ll -= _log1pexp(alpha[i] + beta[j] - d2)
                    ll -= _log1pexp(alpha[j] + beta[i] - d2)
        for e in range(src.shape[0]):
            i = src[e]
            j = dst[e]
            d2 = _sq_dist(pos, i, j)
            if undirected:
                ll += alpha[i] + alpha[j] - d2
            else:
                ll += alpha[i] + beta[j] - d2
    return float(ll)


def unweighted_forces(const double[:, ::1] pos, const double[::1] alpha,
                      const double[::1] beta, const i64[::1] src,
                      const i64[::1] dst, bint undirected):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t dim = pos.shape[1]
    fpos_arr = np.zeros((n, dim))
    falpha_arr = np.zeros(n)
    fbeta_arr = np.zeros(n)
    if n == 0:
        return fpos_arr, falpha_arr, fbeta_arr
    cdef double[:, ::1] fpos = fpos_arr
    cdef double[::1] falpha = falpha_arr
    cdef double[::1] fbeta = fbeta_arr
    cdef double d2, w_ij, w_ji, coef, g
    cdef Py_ssize_t i, j, e, k
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d2 = _sq_dist(pos, i, j)
                if undirected:
                    w_ij = -_sigmoid(alpha[i] + alpha[j] - d2)
                    falpha[i] += w_ij
                    falpha[j] += w_ij
                    coef = w_ij
                else:
                    w_ij = -_sigmoid(alpha[i] + beta[j] - d2)
                    w_ji = -_sigmoid(alpha[j] + beta[i] - d2)
                    falpha[i] += w_ij
                    fbeta[j] += w_ij
                    falpha[j] += w_ji
                    fbeta[i] += w_ji
                    coef = w_ij + w_ji
                for k in range(dim):
                    g = -2.0 * coef * (pos[i, k] - pos[j, k])
                    fpos[i, k] += g
                    fpos[j, k] -= g
        for e in range(src.shape[0]):
            i = src[e]
            j = dst[e]
            if undirected:
                falpha[i] += 1.0
                falpha[j] += 1.0
            else:
                falpha[i] += 1.0
                fbeta[j] += 1.0
            for k in range(dim):
                g = -2.0 * (pos[i, k] - pos[j, k])
                fpos[i, k] += g
                fpos[j, k] -= g
    return fpos_arr, falpha_arr, fbeta_arr


# ---------------------------------------------------------------------------
# cumulative (per-action star) family


def cumulative_loglik(const double[:, ::1] pos, const double[::1] alpha,
                      const double[::1] beta_act, const i64[::1] authors,
                      const i64[::1] adopt_ptr, const i64[::1] adopt_idx):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t n_act = authors.shape[0]
    if n == 0 or n_act == 0:
        return 0.0
    cdef double ll = 0.0, d2
    cdef Py_ssize_t a, i, r, au
    with nogil:
        for a in range(n_act):
            au = authors[a]
            for i in range(n):
                if i == au:
                    continue
                d2 = _sq_dist(pos, i, au)
                ll -= _log1pexp(alpha[i] + beta_act[a] - d2)
            for r in range(adopt_ptr[a], adopt_ptr[a + 1]):
                i = adopt_idx[r]
                d2 = _sq_dist(pos, i, au)
                ll += alpha[i] + beta_act[a] - d2
    return float(ll)


def cumulative_forces(const double[:, ::1] pos, const double[::1] alpha,
                      const double[::1] beta_act, const i64[::1] authors,
                      const i64[::1] adopt_ptr, const i64[::1] adopt_idx):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t dim = pos.shape[1]
    cdef Py_ssize_t n_act = authors.shape[0]
    fpos_arr = np.zeros((n, dim))
    falpha_arr = np.zeros(n)
    fbeta_arr = np.zeros(n_act)
    if n == 0 or n_act == 0:
        return fpos_arr, falpha_arr, fbeta_arr
    cdef double[:, ::1] fpos = fpos_arr
    cdef double[::1] falpha = falpha_arr
    cdef double[::1] fbeta = fbeta_arr
    cdef double d2, c, g
    cdef Py_ssize_t a, i, r, au, k
    with nogil:
        for a in range(n_act):
            au = authors[a]
            for i in range(n):
                if i == au:
                    continue
                d2 = _sq_dist(pos, i, au)
                c = _sigmoid(alpha[i] + beta_act[a] - d2)
                falpha[i] -= c
                fbeta[a] -= c
                # dll/ds = -c; candidate i feels +2 c (x_i - x_author).
                for k in range(dim):
                    g = 2.0 * c * (pos[i, k] - pos[au, k])
                    fpos[i, k] += g
                    fpos[au, k] -= g
            for r in range(adopt_ptr[a], adopt_ptr[a + 1]):
                i = adopt_idx[r]
                falpha[i] += 1.0
                fbeta[a] += 1.0
                for k in range(dim):
                    g = -2.0 * (pos[i, k] - pos[au, k])
                    fpos[i, k] += g
                    fpos[au, k] -= g
    return fpos_arr, falpha_arr, fbeta_arr


# ---------------------------------------------------------------------------
# ordered-level (weighted) family


cdef inline double _ordered_terms(Py_ssize_t level, double s, const double[::1] cuts,
                                  Py_ssize_t n_levels, double* dls, double* dck,
                                  double* dck1) noexcept nogil:
    """Log-probability of the observed level plus gradient pieces.

    ``dck`` is d(lp)/d(cuts[level-1]) (zero at level 0) and ``dck1`` is
    d(lp)/d(cuts[level]) (zero at the top level).
    """
    cdef double a, b, la, lb, gap, ra, rb, sa, sb
    if level == 0:
        b = cuts[0] + s
        sb = _sigmoid(b)
        dls[0] = -sb
        dck[0] = 0.0
        dck1[0] = -sb
        return -_log1pexp(b)
    if level == n_levels - 1:
        a = cuts[n_levels - 2] + s
        sa = _sigmoid(-a)
        dls[0] = sa
        dck[0] = sa
        dck1[0] = 0.0
        return -_log1pexp(-a)
    a = cuts[level - 1] + s
    b = cuts[level] + s
    la = _log1pexp(a)
    lb = _log1pexp(b)
    gap = -expm1(b - a)
    ra = exp(lb - la) / gap
    rb = exp(b - a + la - lb) / gap
    dls[0] = ra - rb
    dck[0] = ra
    dck1[0] = -rb
    return a + log(gap) - la - lb


def weighted_loglik(const double[:, ::1] pos, const double[::1] alpha,
                    const double[::1] beta, const i8[:, ::1] levels,
                    const double[::1] cuts, const u8[::1] row_ok,
                    const u8[::1] col_ok, bint undirected):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t n_levels = cuts.shape[0] + 1
    if n == 0:
        return 0.0, 0
    cdef double ll = 0.0, d2, s, lp, dls, dck, dck1
    cdef Py_ssize_t i, j, n_clamped = 0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d2 = _sq_dist(pos, i, j)
                if undirected:
                    if row_ok[i] and col_ok[j]:
                        s = alpha[i] + alpha[j] - d2
                        lp = _ordered_terms(levels[i, j], s, cuts, n_levels,
                                            &dls, &dck, &dck1)
                        if lp < _LOG_FLOOR:
                            lp = _LOG_FLOOR
                            n_clamped += 1
                        ll += lp
                else:
                    if row_ok[i] and col_ok[j]:
                        s = alpha[i] + beta[j] - d2
                        lp = _ordered_terms(levels[i, j], s, cuts, n_levels,
                                            &dls, &dck, &dck1)
                        if lp < _LOG_FLOOR:
                            lp = _LOG_FLOOR
                            n_clamped += 1
                        ll += lp
                    if row_ok[j] and col_ok[i]:
                        s = alpha[j] + beta[i] - d2
                        lp = _ordered_terms(levels[j, i], s, cuts, n_levels,
                                            &dls, &dck, &dck1)
                        if lp < _LOG_FLOOR:
                            lp = _LOG_FLOOR
                            n_clamped += 1
                        ll += lp
    return float(ll), int(n_clamped)


def weighted_forces(const double[:, ::1] pos, const double[::1] alpha,
                    const double[::1] beta, const i8[:, ::1] levels,
                    const double[::1] cuts, const u8[::1] row_ok,
                    const u8[::1] col_ok, bint undirected):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t dim = pos.shape[1]
    cdef Py_ssize_t n_levels = cuts.shape[0] + 1
    fpos_arr = np.zeros((n, dim))
    falpha_arr = np.zeros(n)
    fbeta_arr = np.zeros(n)
    fcuts_arr = np.zeros(cuts.shape[0])
    if n == 0:
        return fpos_arr, falpha_arr, fbeta_arr, fcuts_arr, 0
    cdef double[:, ::1] fpos = fpos_arr
    cdef double[::1] falpha = falpha_arr
    cdef double[::1] fbeta = fbeta_arr
    cdef double[::1] fcuts = fcuts_arr
    cdef double d2, s, lp, dls, dck, dck1, g
    cdef Py_ssize_t i, j, k, lv, n_clamped = 0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d2 = _sq_dist(pos, i, j)
                if undirected:
                    if row_ok[i] and col_ok[j]:
                        s = alpha[i] + alpha[j] - d2
                        lv = levels[i, j]
                        lp = _ordered_terms(lv, s, cuts, n_levels, &dls, &dck, &dck1)
                        if lp < _LOG_FLOOR:
                            n_clamped += 1
                        falpha[i] += dls
                        falpha[j] += dls
                        if lv > 0:
                            fcuts[lv - 1] += dck
                        if lv < n_levels - 1:
                            fcuts[lv] += dck1
                        for k in range(dim):
                            g = -2.0 * dls * (pos[i, k] - pos[j, k])
                            fpos[i, k] += g
                            fpos[j, k] -= g
                else:
                    if row_ok[i] and col_ok[j]:
                        s = alpha[i] + beta[j] - d2
                        lv = levels[i, j]
                        lp = _ordered_terms(lv, s, cuts, n_levels, &dls, &dck, &dck1)
                        if lp < _LOG_FLOOR:
                            n_clamped += 1
                        falpha[i] += dls
                        fbeta[j] += dls
                        if lv > 0:
                            fcuts[lv - 1] += dck
                        if lv < n_levels - 1:
                            fcuts[lv] += dck1
                        for k in range(dim):
                            g = -2.0 * dls * (pos[i, k] - pos[j, k])
                            fpos[i, k] += g
                            fpos[j, k] -= g
                    if row_ok[j] and col_ok[i]:
                        s = alpha[j] + beta[i] - d2
                        lv = levels[j, i]
                        lp = _ordered_terms(lv, s, cuts, n_levels, &dls, &dck, &dck1)
                        if lp < _LOG_FLOOR:
                            n_clamped += 1
                        falpha[j] += dls
                        fbeta[i] += dls
                        if lv > 0:
                            fcuts[lv - 1] += dck
                        if lv < n_levels - 1:
                            fcuts[lv] += dck1
                        for k in range(dim):
                            g = -2.0 * dls * (pos[j, k] - pos[i, k])
                            fpos[j, k] += g
                            fpos[i, k] -= g
    return fpos_arr, falpha_arr, fbeta_arr, fcuts_arr, int(n_clamped)
