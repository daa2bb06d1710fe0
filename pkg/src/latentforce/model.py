"""Latent-space model: state containers, tie probabilities, log-likelihoods.

The model places every node at a position x_i in R^dim and gives it an
activity parameter alpha_i (propensity to form outgoing ties) and an
attractiveness parameter beta_j (propensity to receive ties).  A directed
tie i -> j occurs with probability

    p_ij = 1 / (1 + exp(-(alpha_i + beta_j - d_ij^2)))

where d_ij is the Euclidean distance between the latent positions.  Three
observation families share this predictor:

* ``unweighted``  -- one Bernoulli draw per ordered pair;
* ``cumulative``  -- each node authors one or more actions, and every
  other node adopts each action independently; action k of author j has
  its own offset beta_jk;
* ``weighted``    -- ordinal tie strengths 0..K-1 via strictly decreasing
  cut points c_1 > ... > c_{K-1}, with P(a_ij >= k) =
  sigmoid(c_k + alpha_i + beta_j - d_ij^2) and level 0 implicit for
  absent edges.

Undirected variants use a single per-node parameter (alpha) and sum each
unordered pair once.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from latentforce._kernels import _numpy as _ref
from latentforce._kernels import kernels
from latentforce.graphs import CumulativeGraph, Graph, WeightedGraph

__all__ = [
    "FAMILIES",
    "PriorConfig",
    "ModelConfig",
    "LatentState",
    "tie_probability",
    "level_probability",
    "loglik_unweighted",
    "loglik_cumulative",
    "loglik_weighted",
    "loglik",
    "log_prior",
    "objective",
    "bipartite_roles",
    "default_cuts",
]

FAMILIES = ("unweighted", "cumulative", "weighted")


@dataclass(frozen=True)
class PriorConfig:
    """Independent zero-mean Gaussian priors used for MAP layouts.

    When enabled, the optimization target becomes loglik + log_prior,
    which keeps alpha/beta finite on nodes with extreme degrees and pins
    the layout's center of mass.
    """

    enabled: bool = True
    sigma_alpha: float = 10.0
    sigma_beta: float = 10.0
    sigma_pos: float = 10.0

    def validate(self) -> "PriorConfig":
        if min(self.sigma_alpha, self.sigma_beta, self.sigma_pos) <= 0:
            raise ValueError("prior standard deviations must be positive")
        return self


@dataclass(frozen=True)
class ModelConfig:
    """Which observation family is fitted, and its structural options.

    ``levels`` is only read by the weighted family and always comes from
    configuration, never from the data.  ``bipartite`` restricts the
    weighted pair sum to rater -> item ordered pairs, where raters are
    the nodes with outgoing records and items the nodes with incoming
    records.
    """

    family: str = "unweighted"
    levels: int = 3
    undirected: bool = False
    bipartite: bool = False
    prior: PriorConfig = field(default_factory=PriorConfig)

    def validate(self) -> "ModelConfig":
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "weighted" and self.levels < 2:
            raise ValueError(f"weighted family needs levels >= 2, got {self.levels}")
        if self.family == "cumulative" and self.undirected:
            raise ValueError("the cumulative family is inherently directed")
        if self.bipartite and self.family != "weighted":
            raise ValueError("bipartite mode applies to the weighted family only")
        if self.bipartite and self.undirected:
            raise ValueError("bipartite mode requires a directed network")
        self.prior.validate()
        return self


@dataclass(eq=False)
class LatentState:
    """Positions and parameters of every node (and cut points, if ordinal).

    ``beta`` has one entry per node for the unweighted and weighted
    families and one entry per action for the cumulative family.  For
    undirected models beta is kept at zero and never enters the
    likelihood.  ``cuts`` is empty unless the weighted family is used, in
    which case it must be strictly decreasing.
    """

    positions: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    cuts: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        if self.positions.ndim != 2:
            raise ValueError("positions must be a 2-D array (n_nodes, dim)")
        self.alpha = np.ascontiguousarray(self.alpha, dtype=np.float64)
        self.beta = np.ascontiguousarray(self.beta, dtype=np.float64)
        self.cuts = np.ascontiguousarray(self.cuts, dtype=np.float64)
        if self.alpha.shape != (self.n_nodes,):
            raise ValueError("alpha must have one entry per node")
        if self.cuts.size > 1 and not np.all(np.diff(self.cuts) < 0):
            raise ValueError("cut points must be strictly decreasing")

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def copy(self) -> "LatentState":
        return LatentState(
            self.positions.copy(), self.alpha.copy(), self.beta.copy(), self.cuts.copy()
        )

    def to_vector(self) -> np.ndarray:
        """Flat coordinate vector: positions (row-major), alpha, beta, cuts."""
        return np.concatenate([self.positions.ravel(), self.alpha, self.beta, self.cuts])

    def with_vector(self, vec: np.ndarray) -> "LatentState":
        """A new state laid out like this one, with coordinates from ``vec``."""
        n, d = self.positions.shape
        nb = self.beta.size
        nc = self.cuts.size
        if vec.size != n * d + n + nb + nc:
            raise ValueError("coordinate vector has the wrong length")
        pos = vec[: n * d].reshape(n, d)
        alpha = vec[n * d : n * d + n]
        beta = vec[n * d + n : n * d + n + nb]
        cuts = vec[n * d + n + nb :]
        out = LatentState.__new__(LatentState)
        out.positions = np.ascontiguousarray(pos, dtype=np.float64)
        out.alpha = np.ascontiguousarray(alpha, dtype=np.float64)
        out.beta = np.ascontiguousarray(beta, dtype=np.float64)
        out.cuts = np.ascontiguousarray(cuts, dtype=np.float64)
        return out


def default_cuts(n_levels: int) -> np.ndarray:
    """Evenly spaced initial cut points from +1 down to -1."""
    if n_levels < 2:
        raise ValueError("n_levels must be >= 2")
    if n_levels == 2:
        return np.zeros(1)
    return np.linspace(1.0, -1.0, n_levels - 1)


def tie_probability(alpha_i, beta_j, d2):
    """P(tie) = 1 / (1 + exp(-(alpha_i + beta_j - d2))), overflow-safe."""
    out = _ref.sigmoid(np.asarray(alpha_i) + np.asarray(beta_j) - np.asarray(d2))
    return float(out) if out.ndim == 0 else out


def level_probability(n_levels, cuts, alpha_i, beta_j, d2, level):
    """P(a_ij = level) under the ordered-level model with K = n_levels.

    ``cuts`` holds c_1 > ... > c_{K-1}; the boundary cuts c_0 = +inf and
    c_K = -inf are implicit, so the K level probabilities sum to one.
    """
    cuts = np.asarray(cuts, dtype=np.float64)
    if cuts.shape != (n_levels - 1,):
        raise ValueError("expected n_levels - 1 cut points")
    if cuts.size > 1 and not np.all(np.diff(cuts) < 0):
        raise ValueError("cut points must be strictly decreasing")
    if not 0 <= level <= n_levels - 1:
        raise ValueError(f"level {level} outside [0, {n_levels - 1}]")
    s = np.asarray(alpha_i, dtype=np.float64) + np.asarray(beta_j) - np.asarray(d2)
    upper = np.ones_like(s, dtype=np.float64) if level == 0 else _ref.sigmoid(cuts[level - 1] + s)
    lower = (
        np.zeros_like(s, dtype=np.float64)
        if level == n_levels - 1
        else _ref.sigmoid(cuts[level] + s)
    )
    out = upper - lower
    return float(out) if out.ndim == 0 else out


def _check_state_for(graph, state: LatentState, family: str) -> None:
    if state.n_nodes != graph.n_nodes:
        raise ValueError(
            f"state has {state.n_nodes} nodes but the network has {graph.n_nodes}"
        )
    if family == "cumulative":
        if state.beta.shape != (graph.n_actions,):
            raise ValueError(
                f"cumulative state needs one beta per action "
                f"({graph.n_actions}), got {state.beta.size}"
            )
    else:
        if state.beta.shape != (state.alpha.shape[0],):
            raise ValueError("beta must have one entry per node")
    if family == "weighted":
        if state.cuts.size != graph.n_levels - 1:
            raise ValueError(
                f"weighted state needs {graph.n_levels - 1} cut points, got {state.cuts.size}"
            )
        if state.cuts.size > 1 and not np.all(np.diff(state.cuts) < 0):
            raise ValueError("cut points must be strictly decreasing")


def bipartite_roles(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Per-node rater/item masks for bipartite weighted networks.

    Raters are nodes that appear as a source, items as a destination;
    the two sets must be disjoint.
    """
    n = graph.n_nodes
    row_ok = np.zeros(n, dtype=np.uint8)
    col_ok = np.zeros(n, dtype=np.uint8)
    row_ok[graph.src] = 1
    col_ok[graph.dst] = 1
    if np.any(row_ok & col_ok):
        k = int(np.argmax(row_ok & col_ok))
        raise ValueError(
            f"node {graph.node_ids[k]!r} both sends and receives records; "
            "the network is not bipartite"
        )
    return row_ok, col_ok


def loglik_unweighted(graph: Graph, state: LatentState) -> float:
    """Log-likelihood of a binary network: sum of s_ij over edges minus
    log(1 + exp(s_ij)) over all pairs."""
    _check_state_for(graph, state, "unweighted")
    if np.any(graph.weight != 1):
        raise ValueError("the unweighted family requires every edge weight to be 1")
    return kernels().unweighted_loglik(
        state.positions, state.alpha, state.beta, graph.src, graph.dst,
        0 if graph.directed else 1,
    )


def loglik_cumulative(graph: CumulativeGraph, state: LatentState) -> float:
    """Log-likelihood of repeated actions, one Bernoulli term per
    (action, potential adopter) pair."""
    _check_state_for(graph, state, "cumulative")
    authors, ptr, idx = graph.kernel_arrays()
    return kernels().cumulative_loglik(
        state.positions, state.alpha, state.beta, authors, ptr, idx
    )


def loglik_weighted(graph: WeightedGraph, state: LatentState, bipartite: bool = False) -> tuple[float, int]:
    """Ordered-level log-likelihood; returns ``(loglik, n_clamped_pairs)``.

    A pair whose level probability underflows is floored at 1e-300 and
    counted in ``n_clamped_pairs``.
    """
    _check_state_for(graph, state, "weighted")
    n = graph.n_nodes
    if bipartite:
        row_ok, col_ok = bipartite_roles(graph)
    else:
        row_ok = np.ones(n, dtype=np.uint8)
        col_ok = np.ones(n, dtype=np.uint8)
    return kernels().weighted_loglik(
        state.positions, state.alpha, state.beta, graph.levels_dense(), state.cuts,
        row_ok, col_ok, 0 if graph.directed else 1,
    )


def loglik(graph, state: LatentState, model: ModelConfig) -> float:
    """Family dispatcher for the plain log-likelihood (no prior)."""
    model.validate()
    if model.family == "unweighted":
        _require(isinstance(graph, Graph), "unweighted family expects a Graph")
        return loglik_unweighted(graph, state)
    if model.family == "cumulative":
        _require(isinstance(graph, CumulativeGraph), "cumulative family expects a CumulativeGraph")
        return loglik_cumulative(graph, state)
    _require(isinstance(graph, WeightedGraph), "weighted family expects a WeightedGraph")
    ll, n_clamped = loglik_weighted(graph, state, bipartite=model.bipartite)
    if n_clamped:
        warnings.warn(
            f"{n_clamped} pair(s) had level probabilities floored at 1e-300",
            RuntimeWarning,
            stacklevel=2,
        )
    return ll


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise TypeError(message)


def log_prior(state: LatentState, prior: PriorConfig) -> float:
    """Gaussian log-prior on alpha, beta and positions (up to constants)."""
    if not prior.enabled:
        return 0.0
    prior.validate()
    return float(
        -np.sum(state.alpha**2) / (2.0 * prior.sigma_alpha**2)
        - np.sum(state.beta**2) / (2.0 * prior.sigma_beta**2)
        - np.sum(state.positions**2) / (2.0 * prior.sigma_pos**2)
    )


def objective(graph, state: LatentState, model: ModelConfig) -> float:
    """The quantity the layout maximizes: loglik plus log-prior if enabled."""
    total = loglik(graph, state, model)
    if model.prior.enabled:
        total += log_prior(state, model.prior)
    return total
