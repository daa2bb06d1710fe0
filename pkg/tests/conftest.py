"""Shared builders for random model instances used across test modules."""

from __future__ import annotations

import numpy as np
import pytest

from latentforce.graphs import Action, CumulativeGraph, Graph, WeightedGraph
from latentforce.model import LatentState


def node_names(n: int) -> list[str]:
    return [f"v{i}" for i in range(n)]


def random_graph(rng: np.random.Generator, n: int, directed: bool = True,
                 p: float = 0.4) -> Graph:
    """A random binary graph with unit weights."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if directed:
                if rng.random() < p:
                    edges.append((i, j, 1))
                if rng.random() < p:
                    edges.append((j, i, 1))
            elif rng.random() < p:
                edges.append((i, j, 1))
    return Graph(node_names(n), edges, directed=directed)


def random_weighted_graph(rng: np.random.Generator, n: int, n_levels: int,
                          directed: bool = True, p: float = 0.6) -> WeightedGraph:
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            pairs = [(i, j), (j, i)] if directed else [(i, j)]
            for a, b in pairs:
                if rng.random() < p:
                    edges.append((a, b, int(rng.integers(1, n_levels))))
    return WeightedGraph(node_names(n), edges, n_levels, directed=directed)


def random_bipartite_weighted(rng: np.random.Generator, n_raters: int, n_items: int,
                              n_levels: int, p: float = 0.7) -> WeightedGraph:
    names = [f"r{i}" for i in range(n_raters)] + [f"m{j}" for j in range(n_items)]
    edges = []
    for i in range(n_raters):
        for j in range(n_items):
            if rng.random() < p:
                edges.append((i, n_raters + j, int(rng.integers(1, n_levels))))
    return WeightedGraph(names, edges, n_levels, directed=True)


def random_cumulative(rng: np.random.Generator, n: int, max_actions: int = 2,
                      p: float = 0.4) -> CumulativeGraph:
    actions = []
    for j in range(n):
        for k in range(int(rng.integers(1, max_actions + 1))):
            adopters = [i for i in range(n) if i != j and rng.random() < p]
            actions.append(Action(j, f"act{j}_{k}", np.asarray(adopters, dtype=np.int64)))
    return CumulativeGraph(node_names(n), actions)


def random_state(rng: np.random.Generator, n: int, dim: int = 2,
                 n_beta: int | None = None, n_levels: int | None = None,
                 scale: float = 0.8) -> LatentState:
    """A generic random state; cut gaps are kept >= 0.4 so central finite
    differences of the ordered-level objective stay well conditioned."""
    cuts = np.empty(0)
    if n_levels is not None:
        gaps = 0.4 + rng.random(n_levels - 2) if n_levels > 2 else np.empty(0)
        top = float(rng.normal(scale=0.5)) + gaps.sum() / 2.0
        cuts = np.concatenate([[top], top - np.cumsum(gaps)])
    nb = n if n_beta is None else n_beta
    return LatentState(
        rng.normal(size=(n, dim)) * scale,
        rng.normal(size=n) * 0.5,
        rng.normal(size=nb) * 0.5,
        cuts,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
