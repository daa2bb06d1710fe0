"""Synthetic ground-truth states and networks sampled from the model.

Two planted structures are provided: a two-block stochastic block model
realized by placing the blocks at coincident points a known distance
apart, and a mixture of spherical Gaussian clusters.  Networks are then
sampled from the generating state under any of the three observation
families, so a layout's ability to recover the planted geometry can be
measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from latentforce._kernels import _numpy as _ref
from latentforce.graphs import CumulativeGraph, Action, Graph, WeightedGraph
from latentforce.model import LatentState, ModelConfig, default_cuts, loglik

__all__ = [
    "SbmSpec",
    "GaussianClusterSpec",
    "expected_sbm_distance",
    "sample_latent",
    "sample_network",
    "prepare_generating_state",
    "generate_dataset",
    "ground_truth_loglik",
]


@dataclass(frozen=True)
class SbmSpec:
    """Two-block stochastic block model with within/between tie rates."""

    p_out: float
    n1: int = 100
    n2: int = 100
    p_in: float = 0.5
    dim: int = 2

    def validate(self) -> "SbmSpec":
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("block sizes must be at least 1")
        if not 0.0 < self.p_out <= self.p_in < 1.0:
            raise ValueError(
                f"need 0 < p_out <= p_in < 1, got p_out={self.p_out}, p_in={self.p_in}"
            )
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        return self


@dataclass(frozen=True)
class GaussianClusterSpec:
    """Equal-size spherical Gaussian clusters strung along the first axis."""

    n_nodes: int
    n_clusters: int = 2
    sigma: float = 1.0 / 12.0
    separation: float = 5.0 / 6.0
    dim: int = 2
    seed: int = 0

    def validate(self) -> "GaussianClusterSpec":
        if self.n_nodes < 1 or self.n_clusters < 1:
            raise ValueError("n_nodes and n_clusters must be at least 1")
        if self.n_nodes < self.n_clusters:
            raise ValueError("need at least one node per cluster")
        if self.sigma <= 0 or self.separation < 0 or self.dim < 1:
            raise ValueError("sigma must be positive, separation >= 0, dim >= 1")
        return self


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def expected_sbm_distance(p_out: float, p_in: float = 0.5) -> float:
    """Block separation at which the model reproduces the SBM tie rates.

    With both blocks internally coincident and alpha = beta =
    logit(p_in)/2, cross-block ties need distance d with
    sigmoid(logit(p_in) - d^2) = p_out, i.e.
    d = sqrt(logit(p_in) - logit(p_out)).  For the default p_in = 0.5
    this reduces to sqrt(log((1 - p_out) / p_out)).
    """
    if not 0.0 < p_out <= p_in < 1.0:
        raise ValueError(f"need 0 < p_out <= p_in < 1, got p_out={p_out}, p_in={p_in}")
    return math.sqrt(_logit(p_in) - _logit(p_out))


def sample_latent(spec) -> tuple[LatentState, np.ndarray]:
    """Planted ground-truth state and integer block labels for a spec."""
    spec.validate()
    if isinstance(spec, SbmSpec):
        n = spec.n1 + spec.n2
        d = expected_sbm_distance(spec.p_out, spec.p_in)
        positions = np.zeros((n, spec.dim))
        positions[spec.n1 :, 0] = d
        t = _logit(spec.p_in) / 2.0
        alpha = np.full(n, t)
        beta = np.full(n, t)
        labels = np.repeat([0, 1], [spec.n1, spec.n2])
        return LatentState(positions, alpha, beta), labels
    if isinstance(spec, GaussianClusterSpec):
        rng = np.random.default_rng(spec.seed)
        base, extra = divmod(spec.n_nodes, spec.n_clusters)
        sizes = [base + (1 if k < extra else 0) for k in range(spec.n_clusters)]
        offsets = (np.arange(spec.n_clusters) - (spec.n_clusters - 1) / 2.0) * spec.separation
        positions = np.empty((spec.n_nodes, spec.dim))
        labels = np.empty(spec.n_nodes, dtype=np.int64)
        row = 0
        for k, size in enumerate(sizes):
            pts = rng.normal(0.0, spec.sigma, size=(size, spec.dim))
            pts[:, 0] += offsets[k]
            positions[row : row + size] = pts
            labels[row : row + size] = k
            row += size
        n = spec.n_nodes
        return LatentState(positions, np.zeros(n), np.zeros(n)), labels
    raise TypeError(f"unknown spec type {type(spec).__name__}")


def _node_ids(n: int) -> list[str]:
    width = max(1, len(str(max(n - 1, 0))))
    return [f"n{i:0{width}d}" for i in range(n)]


def prepare_generating_state(
    state: LatentState,
    model: ModelConfig,
    actions_per_author: int = 3,
    cuts=None,
    action_betas=None,
) -> LatentState:
    """Complete a planted state so it matches the sampling family.

    The weighted family gets cut points (default evenly spaced from +1
    to -1); the cumulative family gets one beta per action, zero unless
    ``action_betas`` is given.
    """
    model.validate()
    if model.family == "weighted":
        cuts = default_cuts(model.levels) if cuts is None else np.asarray(cuts, dtype=np.float64)
        return LatentState(state.positions.copy(), state.alpha.copy(), state.beta.copy(), cuts)
    if model.family == "cumulative":
        if actions_per_author < 1:
            raise ValueError("each author needs at least one action")
        n_actions = state.n_nodes * actions_per_author
        if action_betas is None:
            beta = np.zeros(n_actions)
        else:
            beta = np.asarray(action_betas, dtype=np.float64)
            if beta.shape != (n_actions,):
                raise ValueError(f"expected {n_actions} action betas")
        return LatentState(state.positions.copy(), state.alpha.copy(), beta)
    return state.copy()


def sample_network(
    state: LatentState,
    model: ModelConfig,
    seed: int,
    actions_per_author: int = 3,
):
    """Draw one network from the model at the given generating state.

    Every potential tie is sampled independently with its model
    probability.  For the cumulative family each node authors
    ``actions_per_author`` actions (ids ``<node>:<k>``) and ``state.beta``
    must hold one entry per action in author-major order; for the
    weighted family ``state.cuts`` supplies the cut points.
    """
    model.validate()
    rng = np.random.default_rng(seed)
    n = state.n_nodes
    ids = _node_ids(n)
    pos = state.positions
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1)

    if model.family == "cumulative":
        m = actions_per_author
        if m < 1:
            raise ValueError("each author needs at least one action")
        if state.beta.shape != (n * m,):
            raise ValueError(
                f"state.beta must hold {n * m} per-action entries, got {state.beta.size}"
            )
        actions = []
        for j in range(n):
            others = np.concatenate([np.arange(j), np.arange(j + 1, n)])
            for k in range(m):
                b = state.beta[j * m + k]
                p = _ref.sigmoid(state.alpha[others] + b - d2[others, j])
                adopters = others[rng.random(others.size) < p]
                actions.append(Action(j, f"{ids[j]}:{k}", adopters))
        return CumulativeGraph(ids, actions)

    if model.undirected:
        s = state.alpha[:, None] + state.alpha[None, :] - d2
    else:
        s = state.alpha[:, None] + state.beta[None, :] - d2

    if model.family == "unweighted":
        p = _ref.sigmoid(s)
        draw = rng.random((n, n)) < p
        if model.undirected:
            iu = np.triu_indices(n, k=1)
            edges = [(int(i), int(j)) for i, j in zip(*iu) if draw[i, j]]
            return Graph(ids, edges, directed=False)
        np.fill_diagonal(draw, False)
        edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(draw))]
        return Graph(ids, edges, directed=True)

    # weighted: level = number of exceeded thresholds P(a >= k)
    cuts = state.cuts
    if cuts.size != model.levels - 1:
        raise ValueError("state.cuts must hold one cut per level boundary")
    u = rng.random((n, n))
    level = np.zeros((n, n), dtype=np.int64)
    for k in range(1, model.levels):
        level += u < _ref.sigmoid(cuts[k - 1] + s)
    np.fill_diagonal(level, 0)
    if model.undirected:
        iu = np.triu_indices(n, k=1)
        edges = [
            (int(i), int(j), int(level[i, j]))
            for i, j in zip(*iu)
            if level[i, j] > 0
        ]
        return WeightedGraph(ids, edges, model.levels, directed=False)
    edges = [(int(i), int(j), int(level[i, j])) for i, j in zip(*np.nonzero(level))]
    return WeightedGraph(ids, edges, model.levels, directed=True)


def generate_dataset(
    spec,
    model: ModelConfig,
    seed: int,
    actions_per_author: int = 3,
    cuts=None,
):
    """Sample a planted state and one network from it.

    Returns ``(network, generating_state, labels)``; the generating state
    already carries the cut points or per-action betas used while
    sampling, so it can be scored directly against the network.
    """
    planted, labels = sample_latent(spec)
    gen_state = prepare_generating_state(
        planted, model, actions_per_author=actions_per_author, cuts=cuts
    )
    network = sample_network(gen_state, model, seed=seed, actions_per_author=actions_per_author)
    return network, gen_state, labels


def ground_truth_loglik(network, state: LatentState, model: ModelConfig) -> float:
    """Log-likelihood of a sampled network at its generating state."""
    return loglik(network, state, model)
