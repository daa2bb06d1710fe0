"""Reading and writing layout documents.

A layout file is a single JSON document holding the model settings, the
run metadata and every node's position and parameters (plus per-action
offsets for the cumulative family).  Floats are serialized via their
shortest round-tripping representation, so reading a file back
reproduces all numeric fields exactly.  All writers in this package go
through :func:`atomic_write_text`, which writes to a temporary file in
the target directory and renames it into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from latentforce.graphs import CumulativeGraph, Graph
from latentforce.integrator import LayoutResult
from latentforce.model import LatentState, ModelConfig, PriorConfig

__all__ = [
    "LayoutDocument",
    "document_from_result",
    "state_from_document",
    "write_layout",
    "read_layout",
    "atomic_write_text",
]

FORMAT_TAG = "latentforce-layout/1"


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` atomically (temp file, then rename)."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(eq=False)
class LayoutDocument:
    """In-memory form of a layout file."""

    model: ModelConfig
    dim: int
    seed: int
    iterations: int
    converged: bool
    loglik: float
    log_posterior: float
    node_ids: list[str]
    positions: np.ndarray
    alpha: np.ndarray
    node_beta: np.ndarray | None  # None for the cumulative family
    cuts: np.ndarray = field(default_factory=lambda: np.empty(0))
    actions: list[tuple[str, str, float]] = field(default_factory=list)  # (author, action, beta)


def document_from_result(result: LayoutResult, graph, model: ModelConfig) -> LayoutDocument:
    """Bundle a finished layout with its network's identifiers."""
    state = result.state
    if model.family == "cumulative":
        actions = [
            (graph.node_ids[act.author], act.action_id, float(state.beta[k]))
            for k, act in enumerate(graph.actions)
        ]
        node_beta = None
    else:
        actions = []
        node_beta = state.beta
    return LayoutDocument(
        model=model,
        dim=state.dim,
        seed=result.seed,
        iterations=result.iterations,
        converged=result.converged,
        loglik=result.loglik,
        log_posterior=result.log_posterior,
        node_ids=list(graph.node_ids),
        positions=state.positions,
        alpha=state.alpha,
        node_beta=node_beta,
        cuts=state.cuts,
        actions=actions,
    )


def state_from_document(doc: LayoutDocument, graph) -> LatentState:
    """Rebuild the latent state aligned to ``graph``'s node order.

    Raises ValueError when the document's id set does not match the
    network's, or (cumulative) when the action sets differ.
    """
    doc_ids = set(doc.node_ids)
    graph_ids = set(graph.node_ids)
    if doc_ids != graph_ids:
        missing = sorted(graph_ids - doc_ids)[:5]
        extra = sorted(doc_ids - graph_ids)[:5]
        raise ValueError(
            f"layout and network ids differ (missing from layout: {missing}, "
            f"not in network: {extra})"
        )
    order = {s: k for k, s in enumerate(doc.node_ids)}
    perm = np.asarray([order[s] for s in graph.node_ids], dtype=np.int64)
    positions = doc.positions[perm]
    alpha = doc.alpha[perm]
    if doc.model.family == "cumulative":
        if not isinstance(graph, CumulativeGraph):
            raise ValueError("cumulative layout requires a cumulative network")
        by_key = {(a, t): b for a, t, b in doc.actions}
        beta = np.empty(graph.n_actions)
        for k, act in enumerate(graph.actions):
            key = (graph.node_ids[act.author], act.action_id)
            if key not in by_key:
                raise ValueError(f"layout is missing action {key!r}")
            beta[k] = by_key[key]
        if len(doc.actions) != graph.n_actions:
            raise ValueError(
                f"layout has {len(doc.actions)} actions but the network has {graph.n_actions}"
            )
    else:
        beta = doc.node_beta[perm] if doc.node_beta is not None else np.zeros(len(perm))
    return LatentState(positions, alpha, beta, doc.cuts.copy())


def _doc_to_json(doc: LayoutDocument) -> str:
    nodes = []
    for k, node_id in enumerate(doc.node_ids):
        nodes.append(
            {
                "id": node_id,
                "x": [float(v) for v in doc.positions[k]],
                "alpha": float(doc.alpha[k]),
                "beta": (None if doc.node_beta is None else float(doc.node_beta[k])),
            }
        )
    payload = {
        "format": FORMAT_TAG,
        "model": {
            "family": doc.model.family,
            "levels": doc.model.levels if doc.model.family == "weighted" else None,
            "undirected": doc.model.undirected,
            "bipartite": doc.model.bipartite,
        },
        "prior": {
            "enabled": doc.model.prior.enabled,
            "sigma_alpha": doc.model.prior.sigma_alpha,
            "sigma_beta": doc.model.prior.sigma_beta,
            "sigma_pos": doc.model.prior.sigma_pos,
        },
        "dim": doc.dim,
        "seed": doc.seed,
        "iterations": doc.iterations,
        "converged": doc.converged,
        "loglik": doc.loglik,
        "log_posterior": doc.log_posterior,
        "cuts": [float(c) for c in doc.cuts],
        "nodes": nodes,
    }
    if doc.model.family == "cumulative":
        payload["actions"] = [
            {"author_id": a, "action_id": t, "beta": b} for a, t, b in doc.actions
        ]
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def write_layout(path, doc: LayoutDocument) -> None:
    """Serialize a layout document to ``path`` atomically."""
    atomic_write_text(path, _doc_to_json(doc))


def read_layout(path) -> LayoutDocument:
    """Parse a layout file; inverse of :func:`write_layout`."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != FORMAT_TAG:
        raise ValueError(f"not a layout file (format tag {payload.get('format')!r})")
    m = payload["model"]
    p = payload["prior"]
    model = ModelConfig(
        family=m["family"],
        levels=m["levels"] if m["levels"] is not None else 3,
        undirected=bool(m["undirected"]),
        bipartite=bool(m["bipartite"]),
        prior=PriorConfig(
            enabled=bool(p["enabled"]),
            sigma_alpha=float(p["sigma_alpha"]),
            sigma_beta=float(p["sigma_beta"]),
            sigma_pos=float(p["sigma_pos"]),
        ),
    ).validate()
    nodes = payload["nodes"]
    node_ids = [rec["id"] for rec in nodes]
    positions = np.asarray([rec["x"] for rec in nodes], dtype=np.float64)
    if positions.size == 0:
        positions = positions.reshape(0, int(payload["dim"]))
    alpha = np.asarray([rec["alpha"] for rec in nodes], dtype=np.float64)
    betas = [rec["beta"] for rec in nodes]
    node_beta = None
    if model.family != "cumulative":
        node_beta = np.asarray([float(b) for b in betas], dtype=np.float64)
    actions = [
        (rec["author_id"], rec["action_id"], float(rec["beta"]))
        for rec in payload.get("actions", [])
    ]
    return LayoutDocument(
        model=model,
        dim=int(payload["dim"]),
        seed=int(payload["seed"]),
        iterations=int(payload["iterations"]),
        converged=bool(payload["converged"]),
        loglik=float(payload["loglik"]),
        log_posterior=float(payload["log_posterior"]),
        node_ids=node_ids,
        positions=positions,
        alpha=alpha,
        node_beta=node_beta,
        cuts=np.asarray(payload["cuts"], dtype=np.float64),
        actions=actions,
    )
