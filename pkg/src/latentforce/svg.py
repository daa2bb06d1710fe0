"""Deterministic SVG rendering of two-dimensional layouts.

The layout's bounding box is fitted into the viewport with a single
uniform scale (aspect preserved) and a margin on every side.  Output is
byte-deterministic for identical inputs: floats use fixed three-decimal
formatting and colors are assigned in first-appearance order.
"""

from __future__ import annotations

import warnings

import numpy as np

from latentforce.graphs import CumulativeGraph, Graph
from latentforce.layoutfile import LayoutDocument

__all__ = ["render_svg", "PALETTE", "DEFAULT_FILL"]

PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b2",
    "#59a14f",
    "#edc948",
    "#b07aa1",
    "#ff9da7",
    "#9c755f",
    "#bab0ac",
)
DEFAULT_FILL = "#888888"


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _viewport_transform(positions: np.ndarray, width: int, height: int, margin_frac: float):
    """Map data coordinates to pixels: uniform scale, centered, y flipped."""
    mx = margin_frac * width
    my = margin_frac * height
    lo = positions.min(axis=0)
    hi = positions.max(axis=0)
    ext = hi - lo
    scales = []
    if ext[0] > 0:
        scales.append((width - 2 * mx) / ext[0])
    if ext[1] > 0:
        scales.append((height - 2 * my) / ext[1])
    scale = min(scales) if scales else 1.0
    cx, cy = (lo + hi) / 2.0

    def to_pixel(p):
        x = (p[0] - cx) * scale + width / 2.0
        y = height / 2.0 - (p[1] - cy) * scale
        return x, y

    return to_pixel


def _edge_records(graph) -> list[tuple[int, int, float]]:
    if isinstance(graph, CumulativeGraph):
        counts: dict[tuple[int, int], int] = {}
        for act in graph.actions:
            for i in act.adopters:
                key = (int(i), act.author)
                counts[key] = counts.get(key, 0) + 1
        return [(i, j, float(w)) for (i, j), w in counts.items()]
    return [
        (int(i), int(j), float(w))
        for i, j, w in zip(graph.src, graph.dst, graph.weight)
    ]


def render_svg(
    doc: LayoutDocument,
    graph: Graph | CumulativeGraph | None = None,
    width: int = 1000,
    height: int = 1000,
    margin_frac: float = 0.05,
    node_radius: float = 6.0,
    draw_edges: bool = False,
    labels: dict[str, str] | None = None,
) -> str:
    """Render a two-dimensional layout document as an SVG string.

    ``labels`` maps node ids to categorical labels; each distinct label
    gets one palette color in first-appearance order.  Labels for
    unknown ids produce a warning and are ignored.  Edge strokes use
    opacity proportional to edge weight.
    """
    if doc.dim != 2:
        raise ValueError(
            f"SVG rendering requires a 2-dimensional layout, got dim={doc.dim}; "
            "project the positions to 2 dimensions first"
        )
    if draw_edges and graph is None:
        raise ValueError("draw_edges requires the network")
    known = set(doc.node_ids)
    color_of: dict[str, str] = {}
    fill_by_id: dict[str, str] = {}
    if labels:
        for node_id, label in labels.items():
            if node_id not in known:
                warnings.warn(f"metadata row for unknown node id {node_id!r} ignored",
                              UserWarning, stacklevel=2)
                continue
            if label not in color_of:
                color_of[label] = PALETTE[len(color_of) % len(PALETTE)]
            fill_by_id[node_id] = color_of[label]

    lines: list[str] = []
    lines.append('<?xml version="1.0" encoding="UTF-8"?>')
    lines.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    lines.append(f'<rect width="{width}" height="{height}" fill="#ffffff"/>')
    n = len(doc.node_ids)
    if n:
        to_pixel = _viewport_transform(doc.positions, width, height, margin_frac)
        pixels = [to_pixel(doc.positions[k]) for k in range(n)]
        if draw_edges and graph is not None:
            if set(graph.node_ids) != known:
                raise ValueError("network and layout node ids differ")
            edges = _edge_records(graph)
            index = {s: k for k, s in enumerate(doc.node_ids)}
            gmap = [index[s] for s in graph.node_ids]
            max_w = max((w for _, _, w in edges), default=1.0) or 1.0
            lines.append('<g stroke="#555555" stroke-width="1">')
            for i, j, w in edges:
                xi, yi = pixels[gmap[i]]
                xj, yj = pixels[gmap[j]]
                lines.append(
                    f'<line x1="{_fmt(xi)}" y1="{_fmt(yi)}" x2="{_fmt(xj)}" y2="{_fmt(yj)}" '
                    f'stroke-opacity="{_fmt(w / max_w)}"/>'
                )
            lines.append("</g>")
        lines.append('<g stroke="#333333" stroke-width="0.5">')
        for k, node_id in enumerate(doc.node_ids):
            x, y = pixels[k]
            fill = fill_by_id.get(node_id, DEFAULT_FILL)
            lines.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(node_radius)}" '
                f'fill="{fill}"><title>{_escape(node_id)}</title></circle>'
            )
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
