"""SVG rendering: deterministic bytes, viewport math, colors, and edges.

The oracle for geometry is independent: rendered markup is parsed back
with ``xml.etree.ElementTree`` and pixel coordinates are compared against
hand-computed viewport values (uniform scale, centered, y flipped).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from latentforce.graphs import Action, CumulativeGraph, Graph, WeightedGraph
from latentforce.layoutfile import LayoutDocument
from latentforce.model import ModelConfig
from latentforce.svg import DEFAULT_FILL, PALETTE, render_svg


def make_doc(positions, ids=None) -> LayoutDocument:
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    n = len(positions)
    if ids is None:
        ids = [f"v{i}" for i in range(n)]
    return LayoutDocument(
        model=ModelConfig(family="unweighted").validate(),
        dim=2, seed=0, iterations=1, converged=True, loglik=-1.0,
        log_posterior=-1.0, node_ids=list(ids), positions=positions,
        alpha=np.zeros(n), node_beta=np.zeros(n),
    )


def circles(svg_text: str) -> list[ET.Element]:
    root = ET.fromstring(svg_text)
    return [el for el in root.iter() if el.tag.endswith("}circle")]


def lines(svg_text: str) -> list[ET.Element]:
    root = ET.fromstring(svg_text)
    return [el for el in root.iter() if el.tag.endswith("}line")]


def circle_centers_by_id(svg_text: str) -> dict[str, tuple[float, float]]:
    out = {}
    for el in circles(svg_text):
        title = next(t for t in el if t.tag.endswith("}title"))
        out[title.text] = (float(el.get("cx")), float(el.get("cy")))
    return out


# ---------------------------------------------------------------------------
# validation and determinism


def test_three_dimensional_layout_rejected():
    doc = make_doc([[0.0, 0.0]])
    doc.dim = 3
    with pytest.raises(ValueError, match="dim=3.*project the positions to 2 dimensions"):
        render_svg(doc)


def test_draw_edges_requires_network():
    with pytest.raises(ValueError, match="draw_edges requires the network"):
        render_svg(make_doc([[0, 0], [1, 0]]), draw_edges=True)


def test_output_is_byte_deterministic():
    doc = make_doc(np.random.default_rng(0).normal(size=(7, 2)))
    labels = {"v0": "a", "v3": "b", "v5": "a"}
    first = render_svg(doc, labels=labels)
    second = render_svg(doc, labels=labels)
    assert first.encode() == second.encode()


def test_document_skeleton():
    svg = render_svg(make_doc([[0, 0], [1, 1]]), width=640, height=480)
    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>\n')
    assert 'xmlns="http://www.w3.org/2000/svg"' in svg
    assert 'viewBox="0 0 640 480"' in svg
    assert '<rect width="640" height="480" fill="#ffffff"/>' in svg
    assert svg.endswith("</svg>\n")


def test_empty_layout_renders_background_only():
    svg = render_svg(make_doc(np.empty((0, 2))))
    assert circles(svg) == []
    assert "<rect" in svg


# ---------------------------------------------------------------------------
# viewport geometry (hand-computed pixel values)


def test_horizontal_pair_spans_width_minus_margins():
    # margin = 0.05 * 1000 = 50 px, so x extent [0, 1] maps onto [50, 950].
    svg = render_svg(make_doc([[0.0, 0.0], [1.0, 0.0]]))
    centers = circle_centers_by_id(svg)
    assert centers["v0"] == (50.0, 500.0)
    assert centers["v1"] == (950.0, 500.0)


def test_y_axis_is_flipped():
    svg = render_svg(make_doc([[0.0, 0.0], [0.0, 1.0]]))
    centers = circle_centers_by_id(svg)
    assert centers["v1"][1] < centers["v0"][1]
    assert centers["v0"] == (500.0, 950.0)
    assert centers["v1"] == (500.0, 50.0)


def test_uniform_scale_preserves_aspect():
    # Data bbox is 2 wide x 1 tall in a square viewport: the x extent is
    # binding, so the y extent must occupy half the usable span.
    svg = render_svg(make_doc([[0, 0], [2, 1]]))
    centers = circle_centers_by_id(svg)
    (x0, y0), (x1, y1) = centers["v0"], centers["v1"]
    assert (x1 - x0) == pytest.approx(900.0)
    assert (y0 - y1) == pytest.approx(450.0)
    assert (x0 + x1) / 2 == pytest.approx(500.0)
    assert (y0 + y1) / 2 == pytest.approx(500.0)


def test_coincident_nodes_render_at_center():
    svg = render_svg(make_doc([[2.0, 3.0]] * 3))
    for cx, cy in circle_centers_by_id(svg).values():
        assert (cx, cy) == (500.0, 500.0)


def test_circle_count_and_radius():
    svg = render_svg(make_doc(np.random.default_rng(1).normal(size=(9, 2))),
                     node_radius=3.5)
    cs = circles(svg)
    assert len(cs) == 9
    assert all(el.get("r") == "3.500" for el in cs)


# ---------------------------------------------------------------------------
# label colors


def test_labels_color_by_first_appearance():
    doc = make_doc([[0, 0], [1, 0], [2, 0], [3, 0]])
    svg = render_svg(doc, labels={"v0": "blue-team", "v1": "red-team", "v2": "blue-team"})
    fills = {t.text: el.get("fill")
             for el in circles(svg) for t in el if t.tag.endswith("}title")}
    assert fills["v0"] == PALETTE[0]
    assert fills["v2"] == PALETTE[0]
    assert fills["v1"] == PALETTE[1]
    assert fills["v3"] == DEFAULT_FILL
    assert len({fills["v0"], fills["v1"]}) == 2


def test_two_block_labels_use_exactly_two_fills():
    rng = np.random.default_rng(2)
    doc = make_doc(rng.normal(size=(10, 2)))
    labels = {f"v{i}": ("left" if i < 5 else "right") for i in range(10)}
    svg = render_svg(doc, labels=labels)
    used = {el.get("fill") for el in circles(svg)}
    assert used == {PALETTE[0], PALETTE[1]}


def test_unknown_label_id_warns_and_is_ignored():
    doc = make_doc([[0, 0], [1, 0]])
    with pytest.warns(UserWarning, match="metadata row for unknown node id 'zz' ignored"):
        with_junk = render_svg(doc, labels={"v0": "a", "zz": "a"})
    clean = render_svg(doc, labels={"v0": "a"})
    assert with_junk == clean


# ---------------------------------------------------------------------------
# edges


def test_edges_drawn_between_correct_nodes_despite_permuted_layout():
    graph = Graph(["v0", "v1", "v2"], [(0, 1, 1), (1, 2, 1)])
    doc = make_doc([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]], ids=["v2", "v0", "v1"])
    svg = render_svg(doc, graph=graph, draw_edges=True)
    centers = circle_centers_by_id(svg)
    segs = {
        ((float(el.get("x1")), float(el.get("y1"))),
         (float(el.get("x2")), float(el.get("y2"))))
        for el in lines(svg)
    }
    assert segs == {
        (centers["v0"], centers["v1"]),
        (centers["v1"], centers["v2"]),
    }
    assert '<g stroke="#555555" stroke-width="1">' in svg


def test_edge_opacity_scales_with_weight():
    graph = WeightedGraph(["a", "b", "c"], [(0, 1, 1), (1, 2, 4)], 5)
    doc = make_doc([[0, 0], [1, 0], [2, 0]], ids=["a", "b", "c"])
    svg = render_svg(doc, graph=graph, draw_edges=True)
    opacities = sorted(el.get("stroke-opacity") for el in lines(svg))
    assert opacities == ["0.250", "1.000"]


def test_cumulative_edges_count_repeat_adoptions():
    graph = CumulativeGraph(
        ["v0", "v1", "v2"],
        [
            Action(0, "t1", np.array([1], dtype=np.int64)),
            Action(0, "t2", np.array([1], dtype=np.int64)),
            Action(1, "t3", np.array([2], dtype=np.int64)),
        ],
    )
    doc = make_doc([[0, 0], [1, 0], [2, 0]])
    svg = render_svg(doc, graph=graph, draw_edges=True)
    ls = lines(svg)
    assert len(ls) == 2  # (v1 -> author v0) collapsed to one weighted link
    opacities = sorted(el.get("stroke-opacity") for el in ls)
    assert opacities == ["0.500", "1.000"]


def test_edges_require_matching_ids():
    graph = Graph(["a", "b"], [(0, 1, 1)])
    doc = make_doc([[0, 0], [1, 0]])  # ids v0, v1
    with pytest.raises(ValueError, match="network and layout node ids differ"):
        render_svg(doc, graph=graph, draw_edges=True)


def test_unit_weight_edges_have_full_opacity():
    graph = Graph(["v0", "v1"], [(0, 1, 1)])
    doc = make_doc([[0, 0], [1, 0]])
    svg = render_svg(doc, graph=graph, draw_edges=True)
    assert [el.get("stroke-opacity") for el in lines(svg)] == ["1.000"]


# ---------------------------------------------------------------------------
# escaping


def test_node_id_escaped_in_title():
    doc = make_doc([[0, 0]], ids=["a<&>b"])
    svg = render_svg(doc)
    assert "<title>a&lt;&amp;&gt;b</title>" in svg
    title = next(t for el in circles(svg) for t in el if t.tag.endswith("}title"))
    assert title.text == "a<&>b"
