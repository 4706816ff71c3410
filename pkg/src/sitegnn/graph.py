"""County graph data model: nodes, symmetric directed edges, feature matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AsymmetricEdgeSet,
    DimensionMismatch,
    DuplicateEdge,
    DuplicateFips,
    InvalidCoordinate,
    InvalidNodeId,
    SelfLoop,
    UnknownGroup,
)

NODE_GROUPS = ("BD", "WE", "TB", "LB", "CO")
EDGE_KINDS = ("SCI", "MCI")


@dataclass(frozen=True)
class CountyNode:
    fips: str
    name: str
    centroid: tuple[float, float]  # (lat, lon) degrees
    population: float

    def __post_init__(self):
        if len(self.fips) != 5:
            raise ValueError(f"fips must have 5 characters: {self.fips!r}")
        lat, lon = self.centroid
        if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
            raise InvalidCoordinate(f"centroid out of range for {self.fips}: {self.centroid}")
        if self.population < 0:
            raise ValueError(f"negative population for {self.fips}")


@dataclass(frozen=True)
class FeatureCatalog:
    """Maps node columns to one of the five groups and edge columns to SCI/MCI."""

    node_groups: dict[str, str]
    edge_kinds: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for col, grp in self.node_groups.items():
            if grp not in NODE_GROUPS:
                raise UnknownGroup(f"column {col!r} assigned to unknown group {grp!r}")
        for col, kind in self.edge_kinds.items():
            if kind not in EDGE_KINDS:
                raise UnknownGroup(f"edge column {col!r} assigned to unknown kind {kind!r}")

    def columns_for(self, groups) -> list[str]:
        wanted = set(groups)
        return [c for c, g in self.node_groups.items() if g in wanted]


class CountyGraph:
    """Immutable county graph.

    Edges are directed, stored sorted by (destination, source), and must be
    symmetric as a set; per-direction edge features may differ.  Node order is
    fixed at construction and defines all matrix row indices.
    """

    __slots__ = (
        "nodes", "edges", "node_features", "edge_features", "labels",
        "node_columns", "edge_columns", "_dst_offsets",
    )

    def __init__(self, nodes, edges, node_features, edge_features, labels,
                 node_columns, edge_columns, _dst_offsets):
        self.nodes = nodes
        self.edges = edges
        self.node_features = node_features
        self.edge_features = edge_features
        self.labels = labels
        self.node_columns = node_columns
        self.edge_columns = edge_columns
        self._dst_offsets = _dst_offsets

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @property
    def d(self) -> int:
        return self.node_features.shape[1]

    @property
    def k(self) -> int:
        return self.edge_features.shape[1]

    def node_id(self, fips: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.fips == fips:
                return i
        raise InvalidNodeId(f"no node with fips {fips}")

    def in_edge_slice(self, node_id: int) -> slice:
        """Rows of `edges`/`edge_features` whose destination is node_id."""
        if not (0 <= node_id < self.n):
            raise InvalidNodeId(f"node id {node_id} out of range")
        return slice(self._dst_offsets[node_id], self._dst_offsets[node_id + 1])


def build_graph(nodes, edge_pairs, node_features, edge_features, labels,
                node_columns=None, edge_columns=None) -> CountyGraph:
    """Validate all inputs and assemble a CountyGraph.

    Rejects duplicate fips, self-loops, duplicate edges, and edge sets that
    are not symmetric.  Edges and their feature rows are re-sorted into
    (destination, source) order so in-neighbor aggregation sees contiguous,
    ascending segments.
    """
    nodes = list(nodes)
    n = len(nodes)
    X = np.ascontiguousarray(np.asarray(node_features, dtype=np.float64))
    y = np.asarray(labels)
    edges = np.asarray(edge_pairs, dtype=np.intp).reshape(-1, 2)
    m = edges.shape[0]
    E = np.asarray(edge_features, dtype=np.float64)
    if E.ndim != 2:
        width = len(edge_columns) if edge_columns is not None else 0
        if E.size == 0:
            E = E.reshape(0, width)
        else:
            E = E.reshape(m, -1)
    if E.shape[0] != m:
        raise DimensionMismatch(f"edge_features has {E.shape[0]} rows for {m} edges")
    E = np.ascontiguousarray(E)

    seen = set()
    for node in nodes:
        if node.fips in seen:
            raise DuplicateFips(f"duplicate fips {node.fips}")
        seen.add(node.fips)

    if X.ndim != 2 or X.shape[0] != n:
        raise DimensionMismatch(f"node_features has {X.shape[0]} rows for {n} nodes")
    if y.shape != (n,):
        raise DimensionMismatch(f"labels has shape {y.shape} for {n} nodes")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    y = y.astype(np.int64)

    if m:
        if edges.min() < 0 or edges.max() >= n:
            raise DimensionMismatch("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            bad = edges[edges[:, 0] == edges[:, 1]][0]
            raise SelfLoop(f"self-loop at node {bad[0]}")
    pair_set = set(map(tuple, edges))
    if len(pair_set) != m:
        raise DuplicateEdge("duplicate directed edge supplied")
    for i, j in pair_set:
        if (j, i) not in pair_set:
            raise AsymmetricEdgeSet(f"edge ({i},{j}) has no reverse")

    # canonical (dst, src) order; permute feature rows along with the edges
    if m:
        order = np.lexsort((edges[:, 0], edges[:, 1]))
        edges = np.ascontiguousarray(edges[order])
        E = np.ascontiguousarray(E[order])
    dst_offsets = np.searchsorted(edges[:, 1], np.arange(n + 1)) if m else np.zeros(n + 1, dtype=np.intp)

    if node_columns is None:
        node_columns = [f"col{i}" for i in range(X.shape[1])]
    if edge_columns is None:
        edge_columns = [f"edge{i}" for i in range(E.shape[1])]
    node_columns = list(node_columns)
    edge_columns = list(edge_columns)
    if len(node_columns) != X.shape[1]:
        raise DimensionMismatch("node column names do not match feature width")
    if len(edge_columns) != E.shape[1]:
        raise DimensionMismatch("edge column names do not match feature width")

    return CountyGraph(tuple(nodes), edges, X, E, y, node_columns, edge_columns, dst_offsets)


def select_columns(graph: CountyGraph, catalog: FeatureCatalog,
                   node_groups, edge_kinds) -> CountyGraph:
    """Graph view restricted to the requested variable groups and edge kinds.

    Column order follows the graph's existing order; selecting the same
    groups twice is idempotent.
    """
    groups = list(node_groups)
    kinds = list(edge_kinds)
    if not groups or not kinds:
        raise UnknownGroup("node group and edge kind selections must be non-empty")
    available_groups = set(catalog.node_groups.values())
    for g in groups:
        if g not in available_groups:
            raise UnknownGroup(f"group {g!r} not present in catalog")
    available_kinds = set(catalog.edge_kinds.values())
    for kk in kinds:
        if kk not in available_kinds:
            raise UnknownGroup(f"edge kind {kk!r} not present in catalog")

    keep_node = [i for i, c in enumerate(graph.node_columns)
                 if catalog.node_groups.get(c) in set(groups)]
    keep_edge = [i for i, c in enumerate(graph.edge_columns)
                 if catalog.edge_kinds.get(c) in set(kinds)]

    return CountyGraph(
        graph.nodes,
        graph.edges,
        np.ascontiguousarray(graph.node_features[:, keep_node]),
        np.ascontiguousarray(graph.edge_features[:, keep_edge]),
        graph.labels,
        [graph.node_columns[i] for i in keep_node],
        [graph.edge_columns[i] for i in keep_edge],
        graph._dst_offsets,
    )


def neighbors(graph: CountyGraph, node_id: int) -> list[tuple[int, np.ndarray]]:
    """In-neighbors of node_id with their edge feature rows, ascending id."""
    sl = graph.in_edge_slice(node_id)
    srcs = graph.edges[sl, 0]
    rows = graph.edge_features[sl]
    return [(int(s), rows[i]) for i, s in enumerate(srcs)]
