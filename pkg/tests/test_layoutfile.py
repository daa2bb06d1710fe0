"""Layout-document serialization: exact round-trips, alignment, and errors.

Oracles here are independent of the writer: JSON payloads are inspected
with the stdlib ``json`` module, filesystem effects are checked directly,
and numeric round-trips are asserted with exact ``==`` (the format
contract is shortest-round-trip floats, not approximate recovery).
"""

from __future__ import annotations

import json
import os
import re

import numpy as np
import pytest

from latentforce.graphs import Action, CumulativeGraph, Graph
from latentforce.integrator import IntegratorConfig, LayoutResult, run_layout
from latentforce.layoutfile import (
    FORMAT_TAG,
    LayoutDocument,
    atomic_write_text,
    document_from_result,
    read_layout,
    state_from_document,
    write_layout,
)
from latentforce.model import LatentState, ModelConfig, PriorConfig, loglik

from conftest import node_names, random_graph


# ---------------------------------------------------------------------------
# builders


def awkward(k: int) -> float:
    """Floats with no short decimal form, to exercise exact round-trips."""
    vals = [1 / 3, np.pi, -np.e * 1.75, 0.1 + 0.2, -7.625e-13, 123456.789012345]
    return float(vals[k % len(vals)] + k * np.sqrt(2))


def unweighted_doc(n: int = 4, dim: int = 2) -> LayoutDocument:
    model = ModelConfig(
        family="unweighted",
        prior=PriorConfig(enabled=False, sigma_alpha=2.5, sigma_beta=7.25, sigma_pos=0.125),
    ).validate()
    rng = np.random.default_rng(99)
    return LayoutDocument(
        model=model,
        dim=dim,
        seed=17,
        iterations=345,
        converged=True,
        loglik=-awkward(0),
        log_posterior=-awkward(1),
        node_ids=node_names(n),
        positions=rng.normal(size=(n, dim)) + 1 / 3,
        alpha=rng.normal(size=n) * np.pi,
        node_beta=rng.normal(size=n) / 7,
        cuts=np.empty(0),
        actions=[],
    )


def weighted_doc() -> LayoutDocument:
    model = ModelConfig(family="weighted", levels=4, bipartite=True).validate()
    rng = np.random.default_rng(5)
    n = 5
    return LayoutDocument(
        model=model,
        dim=2,
        seed=3,
        iterations=12,
        converged=False,
        loglik=-awkward(2),
        log_posterior=-awkward(3),
        node_ids=node_names(n),
        positions=rng.normal(size=(n, 2)),
        alpha=rng.normal(size=n),
        node_beta=rng.normal(size=n),
        cuts=np.array([np.pi / 3, -1 / 7, -np.sqrt(2)]),
        actions=[],
    )


def small_cumulative() -> CumulativeGraph:
    return CumulativeGraph(
        node_names(3),
        [
            Action(0, "a0", np.array([1, 2], dtype=np.int64)),
            Action(1, "b0", np.array([0], dtype=np.int64)),
            Action(2, "c0", np.empty(0, dtype=np.int64)),
        ],
    )


def cumulative_doc() -> LayoutDocument:
    model = ModelConfig(family="cumulative").validate()
    rng = np.random.default_rng(21)
    return LayoutDocument(
        model=model,
        dim=2,
        seed=0,
        iterations=99,
        converged=True,
        loglik=-awkward(4),
        log_posterior=-awkward(5),
        node_ids=node_names(3),
        positions=rng.normal(size=(3, 2)),
        alpha=rng.normal(size=3),
        node_beta=None,
        cuts=np.empty(0),
        actions=[("v0", "a0", awkward(0)), ("v1", "b0", -awkward(1)), ("v2", "c0", 0.0)],
    )


def assert_docs_equal(a: LayoutDocument, b: LayoutDocument) -> None:
    assert a.dim == b.dim
    assert a.seed == b.seed
    assert a.iterations == b.iterations
    assert a.converged is b.converged
    assert a.loglik == b.loglik
    assert a.log_posterior == b.log_posterior
    assert a.node_ids == b.node_ids
    assert a.positions.shape == b.positions.shape
    assert (a.positions == b.positions).all()
    assert (a.alpha == b.alpha).all()
    if a.node_beta is None:
        assert b.node_beta is None
    else:
        assert (a.node_beta == b.node_beta).all()
    assert (a.cuts == b.cuts).all()
    assert a.actions == b.actions
    assert a.model.family == b.model.family
    assert a.model.undirected == b.model.undirected
    assert a.model.bipartite == b.model.bipartite
    assert a.model.prior.enabled == b.model.prior.enabled
    assert a.model.prior.sigma_alpha == b.model.prior.sigma_alpha
    assert a.model.prior.sigma_beta == b.model.prior.sigma_beta
    assert a.model.prior.sigma_pos == b.model.prior.sigma_pos


# ---------------------------------------------------------------------------
# atomic writes


def test_atomic_write_creates_exact_content(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "hello\nworld\n")
    assert target.read_text(encoding="utf-8") == "hello\nworld\n"


def test_atomic_write_overwrites_existing(tmp_path):
    target = tmp_path / "out.txt"
    target.write_text("old")
    atomic_write_text(target, "new")
    assert target.read_text() == "new"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    atomic_write_text(tmp_path / "a.json", "{}\n")
    atomic_write_text(tmp_path / "b.json", "{}\n")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.json", "b.json"]


def test_atomic_write_cleans_up_after_failure(tmp_path):
    # Renaming onto an existing directory fails; the temp file must be removed.
    (tmp_path / "taken").mkdir()
    with pytest.raises(OSError):
        atomic_write_text(tmp_path / "taken", "payload")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["taken"]
    assert list((tmp_path / "taken").iterdir()) == []


# ---------------------------------------------------------------------------
# round trips


def test_roundtrip_unweighted_exact(tmp_path):
    doc = unweighted_doc()
    path = tmp_path / "layout.json"
    write_layout(path, doc)
    back = read_layout(path)
    assert_docs_equal(doc, back)
    # levels is irrelevant outside the weighted family; the reader fills a
    # valid placeholder rather than preserving one.
    assert back.model.levels == 3


def test_roundtrip_weighted_exact(tmp_path):
    doc = weighted_doc()
    path = tmp_path / "layout.json"
    write_layout(path, doc)
    back = read_layout(path)
    assert_docs_equal(doc, back)
    assert back.model.levels == 4
    assert back.model.bipartite is True


def test_roundtrip_cumulative_exact(tmp_path):
    doc = cumulative_doc()
    path = tmp_path / "layout.json"
    write_layout(path, doc)
    back = read_layout(path)
    assert_docs_equal(doc, back)
    assert back.node_beta is None
    assert back.actions == doc.actions


def test_roundtrip_three_dimensional(tmp_path):
    doc = unweighted_doc(n=3, dim=3)
    write_layout(tmp_path / "d3.json", doc)
    back = read_layout(tmp_path / "d3.json")
    assert back.dim == 3
    assert back.positions.shape == (3, 3)
    assert (back.positions == doc.positions).all()


def test_roundtrip_empty_layout(tmp_path):
    model = ModelConfig(family="unweighted").validate()
    doc = LayoutDocument(
        model=model, dim=2, seed=0, iterations=0, converged=True,
        loglik=0.0, log_posterior=0.0, node_ids=[],
        positions=np.empty((0, 2)), alpha=np.empty(0), node_beta=np.empty(0),
    )
    write_layout(tmp_path / "empty.json", doc)
    back = read_layout(tmp_path / "empty.json")
    assert back.node_ids == []
    assert back.positions.shape == (0, 2)
    assert back.alpha.shape == (0,)


def test_write_is_byte_deterministic_and_stable_under_reload(tmp_path):
    doc = weighted_doc()
    p1, p2, p3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    write_layout(p1, doc)
    write_layout(p2, doc)
    assert p1.read_bytes() == p2.read_bytes()
    write_layout(p3, read_layout(p1))
    assert p3.read_bytes() == p1.read_bytes()


def test_json_payload_schema(tmp_path):
    path = tmp_path / "layout.json"
    write_layout(path, weighted_doc())
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    payload = json.loads(text)
    assert payload["format"] == FORMAT_TAG
    assert set(payload) == {
        "format", "model", "prior", "dim", "seed", "iterations",
        "converged", "loglik", "log_posterior", "cuts", "nodes",
    }
    assert set(payload["model"]) == {"family", "levels", "undirected", "bipartite"}
    assert set(payload["prior"]) == {"enabled", "sigma_alpha", "sigma_beta", "sigma_pos"}
    for rec in payload["nodes"]:
        assert set(rec) == {"id", "x", "alpha", "beta"}
        assert len(rec["x"]) == 2

    write_layout(path, cumulative_doc())
    payload = json.loads(path.read_text())
    assert set(payload["actions"][0]) == {"author_id", "action_id", "beta"}
    assert payload["model"]["levels"] is None
    assert all(rec["beta"] is None for rec in payload["nodes"])


def test_json_levels_null_outside_weighted(tmp_path):
    path = tmp_path / "layout.json"
    write_layout(path, unweighted_doc())
    assert json.loads(path.read_text())["model"]["levels"] is None


def test_nan_fields_are_rejected(tmp_path):
    doc = unweighted_doc()
    doc.loglik = float("nan")
    target = tmp_path / "bad.json"
    with pytest.raises(ValueError):
        write_layout(target, doc)
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_read_layout_rejects_wrong_format_tag(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"format": "something-else/9"}))
    with pytest.raises(ValueError, match=re.escape("not a layout file (format tag 'something-else/9')")):
        read_layout(path)


def test_read_layout_rejects_missing_format_tag(tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"nodes": []}))
    with pytest.raises(ValueError, match=re.escape("not a layout file (format tag None)")):
        read_layout(path)


# ---------------------------------------------------------------------------
# document_from_result


def test_document_from_result_unweighted(rng):
    graph = random_graph(rng, 5)
    model = ModelConfig(family="unweighted").validate()
    state = LatentState(rng.normal(size=(5, 2)), rng.normal(size=5), rng.normal(size=5))
    result = LayoutResult(state=state, loglik=-4.5, log_posterior=-6.5,
                          iterations=77, converged=True, seed=13)
    doc = document_from_result(result, graph, model)
    assert doc.node_ids == node_names(5)
    assert (doc.positions == state.positions).all()
    assert (doc.alpha == state.alpha).all()
    assert (doc.node_beta == state.beta).all()
    assert doc.actions == []
    assert (doc.seed, doc.iterations, doc.converged) == (13, 77, True)
    assert (doc.loglik, doc.log_posterior) == (-4.5, -6.5)
    assert doc.dim == 2


def test_document_from_result_cumulative(rng):
    graph = small_cumulative()
    model = ModelConfig(family="cumulative").validate()
    beta = np.array([0.25, -0.5, 1.75])
    state = LatentState(rng.normal(size=(3, 2)), rng.normal(size=3), beta)
    result = LayoutResult(state=state, loglik=-1.0, log_posterior=-2.0,
                          iterations=5, converged=False, seed=0)
    doc = document_from_result(result, graph, model)
    assert doc.node_beta is None
    assert doc.actions == [("v0", "a0", 0.25), ("v1", "b0", -0.5), ("v2", "c0", 1.75)]


# ---------------------------------------------------------------------------
# state_from_document


def test_state_from_document_identity_order(rng):
    graph = random_graph(rng, 4)
    doc = unweighted_doc(n=4)
    state = state_from_document(doc, graph)
    assert (state.positions == doc.positions).all()
    assert (state.alpha == doc.alpha).all()
    assert (state.beta == doc.node_beta).all()


def test_state_from_document_realigns_permuted_nodes(rng):
    graph = random_graph(rng, 6)
    doc = unweighted_doc(n=6)
    perm = np.random.default_rng(3).permutation(6)
    shuffled = LayoutDocument(
        model=doc.model, dim=2, seed=doc.seed, iterations=doc.iterations,
        converged=doc.converged, loglik=doc.loglik, log_posterior=doc.log_posterior,
        node_ids=[doc.node_ids[k] for k in perm],
        positions=doc.positions[perm],
        alpha=doc.alpha[perm],
        node_beta=doc.node_beta[perm],
    )
    state = state_from_document(shuffled, graph)
    assert (state.positions == doc.positions).all()
    assert (state.alpha == doc.alpha).all()
    assert (state.beta == doc.node_beta).all()


def test_state_from_document_cumulative_matches_by_author_and_action():
    graph = small_cumulative()
    doc = cumulative_doc()
    doc.actions = [doc.actions[2], doc.actions[0], doc.actions[1]]  # shuffled
    state = state_from_document(doc, graph)
    assert state.beta.tolist() == [awkward(0), -awkward(1), 0.0]


def test_state_from_document_id_mismatch():
    graph = Graph(["v0", "v1", "v2"], [(0, 1, 1)])
    doc = unweighted_doc(n=3)
    doc.node_ids = ["v0", "v1", "x9"]
    with pytest.raises(ValueError, match=re.escape(
            "layout and network ids differ (missing from layout: ['v2'], not in network: ['x9'])")):
        state_from_document(doc, graph)


def test_state_from_document_cumulative_needs_cumulative_graph():
    doc = cumulative_doc()
    graph = Graph(node_names(3), [(0, 1, 1)])
    with pytest.raises(ValueError, match="cumulative layout requires a cumulative network"):
        state_from_document(doc, graph)


def test_state_from_document_missing_action():
    graph = small_cumulative()
    doc = cumulative_doc()
    doc.actions = [a for a in doc.actions if a[1] != "b0"]
    with pytest.raises(ValueError, match=re.escape("layout is missing action ('v1', 'b0')")):
        state_from_document(doc, graph)


def test_state_from_document_extra_action_counted():
    graph = small_cumulative()
    doc = cumulative_doc()
    doc.actions = doc.actions + [("v0", "ghost", 0.5)]
    with pytest.raises(ValueError, match="layout has 4 actions but the network has 3"):
        state_from_document(doc, graph)


def test_state_from_document_fills_zero_beta_when_absent():
    doc = unweighted_doc(n=4)
    doc.node_beta = None
    graph = Graph(node_names(4), [(0, 1, 1)])
    state = state_from_document(doc, graph)
    assert (state.beta == np.zeros(4)).all()


# ---------------------------------------------------------------------------
# end to end: the stored log-likelihood is reproducible from the file alone


def test_saved_layout_reproduces_loglik_bitwise(rng, tmp_path):
    graph = random_graph(rng, 8, p=0.5)
    model = ModelConfig(family="unweighted").validate()
    result = run_layout(graph, model, IntegratorConfig(max_iters=200, deterministic=True), seed=4)
    doc = document_from_result(result, graph, model)
    path = tmp_path / "fit.json"
    write_layout(path, doc)
    back = read_layout(path)
    state = state_from_document(back, graph)
    assert loglik(graph, state, back.model) == result.loglik
