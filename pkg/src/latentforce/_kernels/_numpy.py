"""Pure-NumPy kernels for log-likelihoods and their exact gradients.

These are the reference implementations of the hot inner sums.  The
compiled extension (``_core``) mirrors the same signatures and must agree
numerically; the registry in ``__init__`` picks one at import time.

Conventions shared by every kernel:

* ``pos`` is ``(n, dim)`` float64, ``alpha``/``beta`` are per-node float64.
* Directed families sum over all ordered pairs ``i != j`` with linear
  predictor ``s_ij = alpha_i + beta_j - d_ij**2``.
* Undirected families sum over unordered pairs once, with a single
  per-node parameter: ``s_ij = alpha_i + alpha_j - d_ij**2`` (beta unused).
* Returned forces are the exact gradients of the returned log-likelihood.
"""

from __future__ import annotations

import numpy as np

# log(1e-300): floor applied to a single pair's log-probability in the
# ordered-level family, matching the documented underflow clamp.
LOG_FLOOR = -690.77552789821368


def sigmoid(x):
    """Logistic function, evaluated via the branch that exponentiates a
    non-positive quantity so it is stable for |x| up to ~700."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log1pexp(x):
    """Stable ``log(1 + exp(x))``."""
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def _sq_dists(pos):
    """Exact pairwise squared distances, ``(n, n)``."""
    diff = pos[:, None, :] - pos[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _pair_pos_forces(pos, w):
    """Position gradient ``f_u = -2 * sum_j w[u, j] * (x_u - x_j)``.

    For directed families pass ``w + w.T`` where ``w[i, j]`` holds
    d(loglik)/d(s_ij), so both orderings of a pair act on each endpoint;
    for undirected families pass the symmetric per-unordered-pair matrix
    as is.
    """
    return -2.0 * (pos * w.sum(axis=1)[:, None] - w @ pos)


# ---------------------------------------------------------------------------
# unweighted family


def unweighted_loglik(pos, alpha, beta, src, dst, undirected):
    n = pos.shape[0]
    if n == 0:
        return 0.0
    d2 = _sq_dists(pos)
    if undirected:
        s = alpha[:, None] + alpha[None, :] - d2
    else:
        s = alpha[:, None] + beta[None, :] - d2
    lg = log1pexp(s)
    np.fill_diagonal(lg, 0.0)
    total = lg.sum()
    if undirected:
        total /= 2.0
    ll = -total
    if src.size:
        ll += float(s[src, dst].sum())
    return float(ll)


def unweighted_forces(pos, alpha, beta, src, dst, undirected):
    n, dim = pos.shape
    fpos = np.zeros((n, dim))
    falpha = np.zeros(n)
    fbeta = np.zeros(n)
    if n == 0:
        return fpos, falpha, fbeta
    d2 = _sq_dists(pos)
    if undirected:
        s = alpha[:, None] + alpha[None, :] - d2
    else:
        s = alpha[:, None] + beta[None, :] - d2
    p = sigmoid(s)
    np.fill_diagonal(p, 0.0)
    if undirected:
        w = -p.copy()
        if src.size:
            w[src, dst] += 1.0
            w[dst, src] += 1.0
        falpha = w.sum(axis=1)
        fpos = _pair_pos_forces(pos, w)
    else:
        w = -p
        if src.size:
            np.add.at(w, (src, dst), 1.0)
        falpha = w.sum(axis=1)
        fbeta = w.sum(axis=0)
        fpos = _pair_pos_forces(pos, w + w.T)
    return fpos, falpha, fbeta


# ---------------------------------------------------------------------------
# cumulative (per-action star) family


def cumulative_loglik(pos, alpha, beta_act, authors, adopt_ptr, adopt_idx):
    n = pos.shape[0]
    n_act = authors.size
    if n == 0 or n_act == 0:
        return 0.0
    d2 = _sq_dists(pos)
    s = alpha[None, :] + beta_act[:, None] - d2[authors, :]  # (n_act, n)
    lg = log1pexp(s)
    rows_all = np.arange(n_act)
    lg[rows_all, authors] = 0.0
    ll = -lg.sum()
    if adopt_idx.size:
        rows = np.repeat(rows_all, np.diff(adopt_ptr))
        ll += s[rows, adopt_idx].sum()
    return float(ll)


def cumulative_forces(pos, alpha, beta_act, authors, adopt_ptr, adopt_idx):
    n, dim = pos.shape
    n_act = authors.size
    fpos = np.zeros((n, dim))
    falpha = np.zeros(n)
    fbeta = np.zeros(n_act)
    if n == 0 or n_act == 0:
        return fpos, falpha, fbeta
    d2 = _sq_dists(pos)
    s = alpha[None, :] + beta_act[:, None] - d2[authors, :]
    c = sigmoid(s)  # will become p - adoption_indicator
    rows_all = np.arange(n_act)
    c[rows_all, authors] = 0.0
    if adopt_idx.size:
        rows = np.repeat(rows_all, np.diff(adopt_ptr))
        np.subtract.at(c, (rows, adopt_idx), 1.0)
    falpha = -c.sum(axis=0)
    fbeta = -c.sum(axis=1)
    # dll/ds = -c and ds/dx_i = -2 (x_i - x_author), so candidate i feels
    # +2 * c[a, i] * (x_i - x_author); the author feels the opposite.
    col = c.sum(axis=0)
    fpos = 2.0 * (pos * col[:, None] - c.T @ pos[authors])
    per_act = 2.0 * (c @ pos - c.sum(axis=1)[:, None] * pos[authors])
    np.subtract.at(fpos, authors, per_act)
    return fpos, falpha, fbeta


# ---------------------------------------------------------------------------
# ordered-level (weighted) family


def _ordered_pair_terms(levels, s, cuts, n_levels):
    """Per-pair log-probability and gradient pieces for observed levels.

    Returns ``(lp, dls, dck, dck1)`` where, for a pair observed at level k
    with ``a = c_k + s`` and ``b = c_{k+1} + s`` (``c_0 = +inf``,
    ``c_K = -inf``):

    * ``lp``   -- log(sigma(a) - sigma(b)), not yet floored,
    * ``dls``  -- d lp / d s,
    * ``dck``  -- d lp / d c_k   (zero for level 0),
    * ``dck1`` -- d lp / d c_{k+1} (zero for the top level).
    """
    lp = np.zeros_like(s)
    dls = np.zeros_like(s)
    dck = np.zeros_like(s)
    dck1 = np.zeros_like(s)

    m0 = levels == 0
    mt = levels == n_levels - 1
    mm = ~(m0 | mt)

    if np.any(m0):
        b = cuts[0] + s[m0]
        sb = sigmoid(b)
        lp[m0] = -log1pexp(b)
        dls[m0] = -sb
        dck1[m0] = -sb
    if np.any(mt):
        a = cuts[n_levels - 2] + s[mt]
        sa = sigmoid(-a)
        lp[mt] = -log1pexp(-a)
        dls[mt] = sa
        dck[mt] = sa
    if np.any(mm):
        k = levels[mm].astype(np.int64)
        a = cuts[k - 1] + s[mm]
        b = cuts[k] + s[mm]
        la = log1pexp(a)
        lb = log1pexp(b)
        gap = -np.expm1(b - a)  # 1 - e^{b-a} > 0 for decreasing cuts
        lp[mm] = a + np.log(gap) - la - lb
        ra = np.exp(lb - la) / gap  # sigma'(a) / p
        rb = np.exp(b - a + la - lb) / gap  # sigma'(b) / p
        dls[mm] = ra - rb
        dck[mm] = ra
        dck1[mm] = -rb
    return lp, dls, dck, dck1


def _weighted_mask(n, row_ok, col_ok):
    # Undirected sums use the same symmetric mask and halve totals.
    mask = row_ok[:, None].astype(bool) & col_ok[None, :].astype(bool)
    np.fill_diagonal(mask, False)
    return mask


def weighted_loglik(pos, alpha, beta, levels, cuts, row_ok, col_ok, undirected):
    n = pos.shape[0]
    n_levels = cuts.size + 1
    if n == 0:
        return 0.0, 0
    d2 = _sq_dists(pos)
    if undirected:
        s = alpha[:, None] + alpha[None, :] - d2
    else:
        s = alpha[:, None] + beta[None, :] - d2
    mask = _weighted_mask(n, row_ok, col_ok)
    lp, _, _, _ = _ordered_pair_terms(levels, s, cuts, n_levels)
    clamp = (lp < LOG_FLOOR) & mask
    n_clamped = int(clamp.sum())
    if n_clamped:
        lp = np.where(clamp, LOG_FLOOR, lp)
    total = lp[mask].sum()
    if undirected:
        # Symmetric matrices: every unordered pair was counted twice.
        total /= 2.0
        n_clamped //= 2
    return float(total), n_clamped


def weighted_forces(pos, alpha, beta, levels, cuts, row_ok, col_ok, undirected):
    n, dim = pos.shape
    n_levels = cuts.size + 1
    n_cuts = cuts.size
    fpos = np.zeros((n, dim))
    falpha = np.zeros(n)
    fbeta = np.zeros(n)
    fcuts = np.zeros(n_cuts)
    if n == 0:
        return fpos, falpha, fbeta, fcuts, 0
    d2 = _sq_dists(pos)
    if undirected:
        s = alpha[:, None] + alpha[None, :] - d2
    else:
        s = alpha[:, None] + beta[None, :] - d2
    mask = _weighted_mask(n, row_ok, col_ok)
    lp, dls, dck, dck1 = _ordered_pair_terms(levels, s, cuts, n_levels)
    n_clamped = int(((lp < LOG_FLOOR) & mask).sum())
    dls = np.where(mask, dls, 0.0)
    dck = np.where(mask, dck, 0.0)
    dck1 = np.where(mask, dck1, 0.0)
    lv = np.where(mask, levels, -1)
    for k in range(1, n_levels):
        fcuts[k - 1] += dck[lv == k].sum()
    for k in range(0, n_levels - 1):
        fcuts[k] += dck1[lv == k].sum()
    if undirected:
        falpha = dls.sum(axis=1)
        fpos = _pair_pos_forces(pos, dls)
        fcuts /= 2.0
        n_clamped //= 2
    else:
        falpha = dls.sum(axis=1)
        fbeta = dls.sum(axis=0)
        fpos = _pair_pos_forces(pos, dls + dls.T)
    return fpos, falpha, fbeta, fcuts, n_clamped
