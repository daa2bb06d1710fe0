"""Forces acting on latent coordinates: exact gradients of the objective.

Every simulation force equals the partial derivative of the model
log-likelihood (plus Gaussian log-prior when enabled) with respect to the
corresponding coordinate, so running the force simulation to equilibrium
is maximum-likelihood (or MAP) estimation:

* attraction  -2 (x_i - x_j) for each recorded tie on a pair,
* repulsion   +2 p_ij (x_i - x_j) for each potential tie,
* alpha_i     sum_j (a_ij - p_ij)  (observed minus expected out-degree),
* beta_j      sum_i (a_ij - p_ij)  (observed minus expected in-degree),

with the cumulative and ordered-level analogues handled by the kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from latentforce._kernels import _numpy as _ref
from latentforce._kernels import kernels
from latentforce.graphs import CumulativeGraph, Graph, WeightedGraph
from latentforce.model import (
    LatentState,
    ModelConfig,
    PriorConfig,
    bipartite_roles,
    tie_probability,
)

__all__ = [
    "ForceField",
    "forces_unweighted",
    "forces_cumulative",
    "forces_weighted",
    "forces",
    "prior_forces",
    "finite_difference_gradient",
    "degree_residuals",
    "three_level_forces_reference",
]


@dataclass(eq=False)
class ForceField:
    """Per-coordinate gradient of the objective, in state layout.

    ``n_clamped`` counts ordered-level pairs whose probability hit the
    underflow floor while these forces were evaluated.
    """

    positions: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    cuts: np.ndarray = field(default_factory=lambda: np.empty(0))
    n_clamped: int = 0

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.positions.ravel(), self.alpha, self.beta, self.cuts])

    @classmethod
    def zeros_like(cls, state: LatentState) -> "ForceField":
        return cls(
            np.zeros_like(state.positions),
            np.zeros_like(state.alpha),
            np.zeros_like(state.beta),
            np.zeros_like(state.cuts),
        )


def prior_forces(state: LatentState, prior: PriorConfig) -> ForceField:
    """Gradient of the Gaussian log-prior: -theta / sigma^2 per block."""
    if not prior.enabled:
        return ForceField.zeros_like(state)
    return ForceField(
        -state.positions / prior.sigma_pos**2,
        -state.alpha / prior.sigma_alpha**2,
        -state.beta / prior.sigma_beta**2,
        np.zeros_like(state.cuts),
    )


def _add_prior(ff: ForceField, state: LatentState, prior: PriorConfig | None) -> ForceField:
    if prior is not None and prior.enabled:
        pf = prior_forces(state, prior)
        ff.positions += pf.positions
        ff.alpha += pf.alpha
        ff.beta += pf.beta
    return ff


def forces_unweighted(graph: Graph, state: LatentState, prior: PriorConfig | None = None) -> ForceField:
    if np.any(graph.weight != 1):
        raise ValueError("the unweighted family requires every edge weight to be 1")
    fpos, falpha, fbeta = kernels().unweighted_forces(
        state.positions, state.alpha, state.beta, graph.src, graph.dst,
        0 if graph.directed else 1,
    )
    ff = ForceField(fpos, falpha, fbeta, np.zeros_like(state.cuts))
    return _add_prior(ff, state, prior)


def forces_cumulative(graph: CumulativeGraph, state: LatentState, prior: PriorConfig | None = None) -> ForceField:
    authors, ptr, idx = graph.kernel_arrays()
    fpos, falpha, fbeta = kernels().cumulative_forces(
        state.positions, state.alpha, state.beta, authors, ptr, idx
    )
    ff = ForceField(fpos, falpha, fbeta, np.zeros_like(state.cuts))
    return _add_prior(ff, state, prior)


def forces_weighted(
    graph: WeightedGraph,
    state: LatentState,
    prior: PriorConfig | None = None,
    bipartite: bool = False,
) -> ForceField:
    n = graph.n_nodes
    if bipartite:
        row_ok, col_ok = bipartite_roles(graph)
    else:
        row_ok = np.ones(n, dtype=np.uint8)
        col_ok = np.ones(n, dtype=np.uint8)
    fpos, falpha, fbeta, fcuts, n_clamped = kernels().weighted_forces(
        state.positions, state.alpha, state.beta, graph.levels_dense(), state.cuts,
        row_ok, col_ok, 0 if graph.directed else 1,
    )
    ff = ForceField(fpos, falpha, fbeta, fcuts, n_clamped=n_clamped)
    return _add_prior(ff, state, prior)


def forces(graph, state: LatentState, model: ModelConfig) -> ForceField:
    """Family dispatcher; includes prior forces when the prior is enabled."""
    model.validate()
    prior = model.prior if model.prior.enabled else None
    if model.family == "unweighted":
        return forces_unweighted(graph, state, prior)
    if model.family == "cumulative":
        return forces_cumulative(graph, state, prior)
    return forces_weighted(graph, state, prior, bipartite=model.bipartite)


def finite_difference_gradient(objective, state: LatentState, step: float = 1e-5) -> ForceField:
    """Central-difference gradient of ``objective(state)`` over every coordinate.

    Used to verify that analytic forces match the objective; raises if the
    objective returns a non-finite value at any probe point.
    """
    base = state.to_vector()
    grad = np.empty_like(base)
    for k in range(base.size):
        hi = base.copy()
        lo = base.copy()
        hi[k] += step
        lo[k] -= step
        f_hi = objective(state.with_vector(hi))
        f_lo = objective(state.with_vector(lo))
        if not (np.isfinite(f_hi) and np.isfinite(f_lo)):
            raise FloatingPointError(
                f"objective is not finite near coordinate {k} (got {f_hi}, {f_lo})"
            )
        grad[k] = (f_hi - f_lo) / (2.0 * step)
    n, d = state.positions.shape
    nb = state.beta.size
    return ForceField(
        grad[: n * d].reshape(n, d).copy(),
        grad[n * d : n * d + n].copy(),
        grad[n * d + n : n * d + n + nb].copy(),
        grad[n * d + n + nb :].copy(),
    )


def degree_residuals(graph: Graph, state: LatentState) -> tuple[np.ndarray, np.ndarray]:
    """Observed minus expected degrees under the current state.

    Returns ``(out_residuals, in_residuals)``.  At a maximum-likelihood
    state with no prior these vanish, because they are exactly the alpha
    and beta forces.  Computed directly from tie probabilities rather
    than through the force kernels so the identity can be tested across
    two routes.
    """
    if np.any(graph.weight != 1):
        raise ValueError("degree residuals are defined for the unweighted family")
    n = graph.n_nodes
    pos = state.positions
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1)
    if graph.directed:
        p = tie_probability(state.alpha[:, None], state.beta[None, :], d2)
    else:
        p = tie_probability(state.alpha[:, None], state.alpha[None, :], d2)
    np.fill_diagonal(p, 0.0)
    out_obs = np.bincount(graph.src, minlength=n).astype(np.float64)
    in_obs = np.bincount(graph.dst, minlength=n).astype(np.float64)
    if not graph.directed:
        incident = out_obs + in_obs
        resid = incident - p.sum(axis=1)
        return resid, resid.copy()
    return out_obs - p.sum(axis=1), in_obs - p.sum(axis=0)


def three_level_forces_reference(graph: WeightedGraph, state: LatentState) -> ForceField:
    """Closed-form forces for the three-level ordered model (K = 3).

    Slow per-pair evaluation of the literal case formulas, with
    C_k = -c_k - alpha_i - beta_j + d_ij^2:

    * level 0: position force 2 dx / (1 + e^{C1}), alpha force -1 / (1 + e^{C1}),
    * level 1: ratio of sigma'(c_k + s) differences over the probability,
    * level 2: position force -2 dx / (1 + e^{-C2}), alpha force 1 / (1 + e^{-C2}),

    and the matching cut-point derivatives.  Kept as an independent
    cross-check of the generic ordered-level path; not used by the
    simulation.
    """
    if graph.n_levels != 3:
        raise ValueError("the closed-form reference applies to exactly 3 levels")
    if not graph.directed:
        raise ValueError("the closed-form reference covers the directed case")
    if state.cuts.size != 2:
        raise ValueError("state needs 2 cut points")
    n = graph.n_nodes
    levels = graph.levels_dense()
    c1, c2 = float(state.cuts[0]), float(state.cuts[1])
    fpos = np.zeros_like(state.positions)
    falpha = np.zeros_like(state.alpha)
    fbeta = np.zeros_like(state.beta)
    fcuts = np.zeros(2)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dx = state.positions[i] - state.positions[j]
            d2 = float(dx @ dx)
            base = -state.alpha[i] - state.beta[j] + d2
            big_c1 = -c1 + base
            big_c2 = -c2 + base
            k = int(levels[i, j])
            if k == 0:
                dls = -1.0 / (1.0 + np.exp(big_c1))
                dc1 = dls
                dc2 = 0.0
            elif k == 1:
                e1 = np.exp(big_c1)
                e2 = np.exp(big_c2)
                p = 1.0 / (1.0 + e1) - 1.0 / (1.0 + e2)
                dls = (e1 / (1.0 + e1) ** 2 - e2 / (1.0 + e2) ** 2) / p
                dc1 = (e1 / (1.0 + e1) ** 2) / p
                dc2 = -(e2 / (1.0 + e2) ** 2) / p
            else:
                dls = 1.0 / (1.0 + np.exp(-big_c2))
                dc1 = 0.0
                dc2 = dls
            fpos[i] += -2.0 * dls * dx
            fpos[j] += 2.0 * dls * dx
            falpha[i] += dls
            fbeta[j] += dls
            fcuts[0] += dc1
            fcuts[1] += dc2
    return ForceField(fpos, falpha, fbeta, fcuts)
