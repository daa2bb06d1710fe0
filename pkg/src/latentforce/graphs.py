"""Network containers and tab-separated parsing/serialization.

Node identifiers are opaque strings interned to dense integer indices in
first-appearance order.  Edge files are TSV lines ``src <TAB> dst [<TAB>
weight]``; cumulative adoption files are TSV lines ``author <TAB> action_id
<TAB> adopter``.  Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Graph",
    "WeightedGraph",
    "CumulativeGraph",
    "Action",
    "GraphFormatError",
    "parse_edge_list",
    "parse_cumulative",
    "serialize_edge_list",
    "serialize_cumulative",
    "degree",
]


class GraphFormatError(ValueError):
    """Raised when an input file or edge set violates the expected format."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _check_node_id(node_id: str) -> str:
    if not isinstance(node_id, str) or node_id == "":
        raise GraphFormatError(f"node id must be a non-empty string, got {node_id!r}")
    if any(c in node_id for c in "\t\n\r"):
        raise GraphFormatError(f"node id contains whitespace control characters: {node_id!r}")
    return node_id


class Graph:
    """A directed or undirected network with non-negative integer edge weights.

    Parameters
    ----------
    node_ids : sequence of str
        All node identifiers, in interning order.
    edges : iterable of (int, int) or (int, int, int)
        Edge records as dense node indices, optionally with a weight
        (default 1).  Undirected edges are canonicalized to ``src < dst``
        and stored once.
    directed : bool
        Whether edge records are ordered pairs.
    """

    def __init__(self, node_ids: Sequence[str], edges: Iterable[tuple], directed: bool = True):
        self.node_ids: list[str] = [_check_node_id(s) for s in node_ids]
        self.directed = bool(directed)
        self._index: dict[str, int] = {s: i for i, s in enumerate(self.node_ids)}
        if len(self._index) != len(self.node_ids):
            raise GraphFormatError("duplicate node ids")
        n = len(self.node_ids)
        seen: set[tuple[int, int]] = set()
        src: list[int] = []
        dst: list[int] = []
        wt: list[int] = []
        for rec in edges:
            if len(rec) == 2:
                i, j = rec
                w = 1
            else:
                i, j, w = rec
            i, j, w = int(i), int(j), int(w)
            if not (0 <= i < n and 0 <= j < n):
                raise GraphFormatError(f"edge ({i}, {j}) references an unknown node index")
            if i == j:
                raise GraphFormatError(f"self-loop on node {self.node_ids[i]!r}")
            if w < 0:
                raise GraphFormatError(f"negative weight {w} on edge ({i}, {j})")
            if not self.directed and i > j:
                i, j = j, i
            if (i, j) in seen:
                raise GraphFormatError(f"duplicate edge record for pair ({i}, {j})")
            seen.add((i, j))
            src.append(i)
            dst.append(j)
            wt.append(w)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.weight = np.asarray(wt, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def index_of(self, node_id: str) -> int:
        return self._index[node_id]

    def degree(self, node_id: str) -> tuple[int, int]:
        """Return ``(out_degree, in_degree)``; equal counts when undirected."""
        i = self._index[node_id]
        if self.directed:
            return int(np.sum(self.src == i)), int(np.sum(self.dst == i))
        k = int(np.sum(self.src == i) + np.sum(self.dst == i))
        return k, k

    def edge_strings(self) -> set[tuple[str, str, int]]:
        return {
            (self.node_ids[i], self.node_ids[j], int(w))
            for i, j, w in zip(self.src, self.dst, self.weight)
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.directed == other.directed
            and self.node_ids == other.node_ids
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
        )

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"<Graph {kind}, {self.n_nodes} nodes, {self.n_edges} edges>"


class WeightedGraph(Graph):
    """A :class:`Graph` whose edges carry ordinal levels ``1 .. n_levels - 1``.

    The number of levels comes from configuration, never from the data;
    an absent edge means level 0.
    """

    def __init__(self, node_ids, edges, n_levels: int, directed: bool = True):
        super().__init__(node_ids, edges, directed=directed)
        n_levels = int(n_levels)
        if n_levels < 2:
            raise GraphFormatError(f"n_levels must be >= 2, got {n_levels}")
        self.n_levels = n_levels
        bad = (self.weight < 1) | (self.weight > n_levels - 1)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise GraphFormatError(
                f"edge ({self.node_ids[self.src[k]]!r}, {self.node_ids[self.dst[k]]!r}) "
                f"has level {int(self.weight[k])}, outside [1, {n_levels - 1}]"
            )
        self._levels_dense: np.ndarray | None = None

    @classmethod
    def from_graph(cls, graph: Graph, n_levels: int) -> "WeightedGraph":
        return cls(
            graph.node_ids,
            zip(graph.src, graph.dst, graph.weight),
            n_levels,
            directed=graph.directed,
        )

    def levels_dense(self) -> np.ndarray:
        """Dense ``(n, n)`` int8 level matrix, mirrored when undirected."""
        if self._levels_dense is None:
            lv = np.zeros((self.n_nodes, self.n_nodes), dtype=np.int8)
            lv[self.src, self.dst] = self.weight
            if not self.directed:
                lv[self.dst, self.src] = self.weight
            self._levels_dense = lv
        return self._levels_dense


class Action(NamedTuple):
    author: int
    action_id: str
    adopters: np.ndarray  # sorted int64 node indices, author excluded


class CumulativeGraph:
    """A network of repeated actions, each a star from adopters to an author.

    Every action belongs to one author node and records the set of other
    nodes that adopted it.  Action order is first-appearance order and the
    pair ``(author, action_id)`` identifies an action.
    """

    def __init__(self, node_ids: Sequence[str], actions: Iterable[Action]):
        self.node_ids: list[str] = [_check_node_id(s) for s in node_ids]
        self._index: dict[str, int] = {s: i for i, s in enumerate(self.node_ids)}
        if len(self._index) != len(self.node_ids):
            raise GraphFormatError("duplicate node ids")
        n = len(self.node_ids)
        self.actions: list[Action] = []
        seen: set[tuple[int, str]] = set()
        for author, action_id, adopters in actions:
            author = int(author)
            if not 0 <= author < n:
                raise GraphFormatError(f"action author index {author} out of range")
            if (author, action_id) in seen:
                raise GraphFormatError(f"duplicate action {action_id!r} for author index {author}")
            seen.add((author, action_id))
            adopters = np.unique(np.asarray(adopters, dtype=np.int64))
            if adopters.size and (adopters.min() < 0 or adopters.max() >= n):
                raise GraphFormatError(f"adopter index out of range in action {action_id!r}")
            if np.any(adopters == author):
                raise GraphFormatError(
                    f"author {self.node_ids[author]!r} adopts its own action {action_id!r}"
                )
            self.actions.append(Action(author, str(action_id), adopters))
        self._kernel_arrays: tuple | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def index_of(self, node_id: str) -> int:
        return self._index[node_id]

    def actions_per_author(self) -> np.ndarray:
        """``m_j`` for every node (0 for nodes that author nothing)."""
        m = np.zeros(self.n_nodes, dtype=np.int64)
        for act in self.actions:
            m[act.author] += 1
        return m

    def kernel_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened ``(authors, adopter_ptr, adopter_idx)`` arrays."""
        if self._kernel_arrays is None:
            authors = np.asarray([a.author for a in self.actions], dtype=np.int64)
            ptr = np.zeros(len(self.actions) + 1, dtype=np.int64)
            for k, act in enumerate(self.actions):
                ptr[k + 1] = ptr[k] + act.adopters.size
            idx = (
                np.concatenate([a.adopters for a in self.actions])
                if self.actions
                else np.empty(0, dtype=np.int64)
            )
            self._kernel_arrays = (authors, ptr, idx.astype(np.int64))
        return self._kernel_arrays

    def __eq__(self, other) -> bool:
        if not isinstance(other, CumulativeGraph):
            return NotImplemented
        return (
            self.node_ids == other.node_ids
            and len(self.actions) == len(other.actions)
            and all(
                a.author == b.author
                and a.action_id == b.action_id
                and np.array_equal(a.adopters, b.adopters)
                for a, b in zip(self.actions, other.actions)
            )
        )

    def __repr__(self) -> str:
        return f"<CumulativeGraph {self.n_nodes} nodes, {self.n_actions} actions>"


def _iter_records(text: str | bytes, n_fields_low: int, n_fields_high: int):
    """Yield ``(line_number, fields)`` for data lines of a TSV document."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in raw.rstrip("\r\n").split("\t")]
        if not n_fields_low <= len(fields) <= n_fields_high:
            raise GraphFormatError(
                f"expected {n_fields_low}"
                + (f"-{n_fields_high}" if n_fields_high != n_fields_low else "")
                + f" tab-separated fields, got {len(fields)}",
                line=lineno,
            )
        if any(f == "" for f in fields):
            raise GraphFormatError("empty field", line=lineno)
        yield lineno, fields


def parse_edge_list(text: str | bytes, directed: bool = True) -> Graph:
    """Parse TSV edge records ``src <TAB> dst [<TAB> weight]`` into a Graph.

    Node ids are interned in first-appearance order.  Exact duplicate
    records are dropped; records that repeat a pair with a different
    weight are rejected.  Self-loops and negative or non-integer weights
    are rejected.  All errors carry the offending line number.
    """
    ids: list[str] = []
    index: dict[str, int] = {}

    def intern(s: str) -> int:
        if s not in index:
            index[s] = len(ids)
            ids.append(s)
        return index[s]

    records: dict[tuple[int, int], tuple[int, int]] = {}  # pair -> (weight, lineno)
    order: list[tuple[int, int]] = []
    for lineno, fields in _iter_records(text, 2, 3):
        s, d = fields[0], fields[1]
        if s == d:
            raise GraphFormatError(f"self-loop on node {s!r}", line=lineno)
        if len(fields) == 3:
            try:
                w = int(fields[2])
            except ValueError:
                raise GraphFormatError(f"non-integer weight {fields[2]!r}", line=lineno) from None
            if w < 0:
                raise GraphFormatError(f"negative weight {w}", line=lineno)
        else:
            w = 1
        i, j = intern(s), intern(d)
        if not directed and i > j:
            i, j = j, i
        if (i, j) in records:
            prev_w, prev_line = records[(i, j)]
            if prev_w != w:
                raise GraphFormatError(
                    f"conflicting weights for edge ({s!r}, {d!r}): "
                    f"{prev_w} on line {prev_line}, {w} here",
                    line=lineno,
                )
            continue
        records[(i, j)] = (w, lineno)
        order.append((i, j))
    return Graph(ids, [(i, j, records[(i, j)][0]) for i, j in order], directed=directed)


def serialize_edge_list(graph: Graph) -> str:
    """Render a Graph back to TSV text; inverse of :func:`parse_edge_list`."""
    lines = [
        f"{graph.node_ids[i]}\t{graph.node_ids[j]}\t{int(w)}"
        for i, j, w in zip(graph.src, graph.dst, graph.weight)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_cumulative(text: str | bytes) -> CumulativeGraph:
    """Parse TSV adoption records ``author <TAB> action_id <TAB> adopter``.

    Rows sharing ``(author, action_id)`` accumulate one action's adopter
    set.  A two-field row ``author <TAB> action_id`` declares an action
    with no adopters (actions sampled from the model can end up
    unadopted, and their parameters still enter the likelihood).
    Self-adoption and repeated identical rows are rejected with line
    numbers.
    """
    ids: list[str] = []
    index: dict[str, int] = {}

    def intern(s: str) -> int:
        if s not in index:
            index[s] = len(ids)
            ids.append(s)
        return index[s]

    adopters: dict[tuple[int, str], list[int]] = {}
    seen_rows: dict[tuple[int, str, int | None], int] = {}
    order: list[tuple[int, str]] = []
    for lineno, fields in _iter_records(text, 2, 3):
        author_id, action_id = fields[0], fields[1]
        a = intern(author_id)
        key = (a, action_id)
        if len(fields) == 2:
            i = None
        else:
            adopter_id = fields[2]
            if author_id == adopter_id:
                raise GraphFormatError(
                    f"author {author_id!r} adopts its own action {action_id!r}", line=lineno
                )
            i = intern(adopter_id)
        row = (a, action_id, i)
        if row in seen_rows:
            raise GraphFormatError(
                f"repeated adoption record (first seen on line {seen_rows[row]})", line=lineno
            )
        seen_rows[row] = lineno
        if key not in adopters:
            adopters[key] = []
            order.append(key)
        if i is not None:
            adopters[key].append(i)
    actions = [Action(a, action_id, np.asarray(adopters[(a, action_id)], dtype=np.int64)) for a, action_id in order]
    return CumulativeGraph(ids, actions)


def serialize_cumulative(graph: CumulativeGraph) -> str:
    """Render a CumulativeGraph back to TSV text.

    Actions without adopters are written as a two-field declaration row.
    """
    lines = []
    for act in graph.actions:
        author = graph.node_ids[act.author]
        if act.adopters.size == 0:
            lines.append(f"{author}\t{act.action_id}")
        for i in act.adopters:
            lines.append(f"{author}\t{act.action_id}\t{graph.node_ids[i]}")
    return "\n".join(lines) + ("\n" if lines else "")


def degree(graph: Graph, node_id: str) -> tuple[int, int]:
    """``(out_degree, in_degree)`` of a node; symmetric when undirected."""
    return graph.degree(node_id)
