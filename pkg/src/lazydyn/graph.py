"""Undirected simple graphs: construction, degree caches, and generators."""

from __future__ import annotations

import itertools

import numpy as np

__all__ = [
    "Graph",
    "GraphError",
    "from_edge_list",
    "from_spec",
    "complete_bipartite",
    "path",
    "cycle",
    "clique",
    "grid",
    "star",
    "erdos_renyi",
    "standard_family",
    "tightness_network",
]


class GraphError(ValueError):
    """Malformed graph input (bad edge list, invalid generator parameters)."""


class Graph:
    """Undirected simple graph over dense node ids 0..node_count-1.

    Stores one sorted neighbor array per node plus cached degree data:
    ``degree[u]``, the overall ``max_degree``, and ``nbhd_max_degree[u]``
    (largest degree among u's neighbors, 0 for isolated nodes). Edges are
    kept as parallel arrays ``edge_u < edge_v`` in sorted order. Instances
    are immutable by convention once constructed and safe to share across
    concurrent runs.
    """

    def __init__(self, node_count: int, edges) -> None:
        node_count = int(node_count)
        if node_count < 0:
            raise GraphError("node_count must be non-negative")
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"edge ({u},{v}) out of range for {node_count} nodes")
            seen.add((u, v) if u < v else (v, u))
        pairs = sorted(seen)
        self.node_count = node_count
        if pairs:
            arr = np.asarray(pairs, dtype=np.int64)
            self.edge_u = arr[:, 0].copy()
            self.edge_v = arr[:, 1].copy()
        else:
            self.edge_u = np.empty(0, dtype=np.int64)
            self.edge_v = np.empty(0, dtype=np.int64)
        nbrs: list[list[int]] = [[] for _ in range(node_count)]
        for u, v in pairs:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.adjacency = [np.sort(np.asarray(a, dtype=np.int64)) for a in nbrs]
        self.degree = np.asarray([len(a) for a in nbrs], dtype=np.int64)
        self.max_degree = int(self.degree.max()) if node_count else 0
        self.nbhd_max_degree = np.asarray(
            [int(self.degree[a].max()) if a.size else 0 for a in self.adjacency],
            dtype=np.int64,
        )

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.size)

    def neighbors(self, u: int) -> np.ndarray:
        return self.adjacency[u]

    def edges(self):
        """Iterate edges as (u, v) pairs with u < v, in sorted order."""
        return zip(self.edge_u.tolist(), self.edge_v.tolist())

    def validate(self) -> None:
        """Recheck simplicity, symmetry, and all degree caches; raise on drift."""
        pair_set = set()
        for u, v in self.edges():
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise GraphError(f"edge ({u},{v}) out of range")
            if u > v:
                raise GraphError(f"edge ({u},{v}) not canonically oriented")
            if (u, v) in pair_set:
                raise GraphError(f"duplicate edge ({u},{v})")
            pair_set.add((u, v))
        for u in range(self.node_count):
            adj = self.adjacency[u]
            if np.any(np.diff(adj) <= 0):
                raise GraphError(f"adjacency of {u} not sorted/unique")
            for v in adj.tolist():
                if u not in self.adjacency[v]:
                    raise GraphError(f"asymmetric adjacency at ({u},{v})")
                key = (u, v) if u < v else (v, u)
                if key not in pair_set:
                    raise GraphError(f"adjacency edge ({u},{v}) missing from edge arrays")
            if self.degree[u] != adj.size:
                raise GraphError(f"degree cache wrong at {u}")
            expect = int(self.degree[adj].max()) if adj.size else 0
            if self.nbhd_max_degree[u] != expect:
                raise GraphError(f"neighborhood max degree cache wrong at {u}")
        if 2 * len(pair_set) != int(self.degree.sum()):
            raise GraphError("edge arrays inconsistent with adjacency")
        expect_max = int(self.degree.max()) if self.node_count else 0
        if self.max_degree != expect_max:
            raise GraphError("max_degree cache wrong")

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


def from_edge_list(text: str) -> Graph:
    """Parse an edge-list document into a graph.

    Each non-empty line that does not start with ``#`` must contain two
    whitespace-separated decimal node ids ``u v`` with u != v. Node ids are
    0-based; the graph spans nodes 0..max-id. Duplicate edges collapse.
    """
    edges = []
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative node id in {line!r}")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at node {u}")
        edges.append((u, v))
        max_id = max(max_id, u, v)
    return Graph(max_id + 1, edges)


def complete_bipartite(n_left: int, n_right: int) -> Graph:
    """Complete bipartite graph; nodes 0..n_left-1 are side L, the rest side R."""
    if n_left < 1 or n_right < 1:
        raise GraphError("both sides must have at least one node")
    edges = [(u, n_left + v) for u in range(n_left) for v in range(n_right)]
    return Graph(n_left + n_right, edges)


def path(n: int) -> Graph:
    if n < 1:
        raise GraphError("path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def clique(n: int) -> Graph:
    if n < 1:
        raise GraphError("clique needs n >= 1")
    return Graph(n, itertools.combinations(range(n), 2))


def grid(width: int, height: int) -> Graph:
    """Axis-aligned grid; node id of cell (x, y) is y*width + x."""
    if width < 1 or height < 1:
        raise GraphError("grid needs width, height >= 1")
    edges = []
    for y in range(height):
        for x in range(width):
            u = y * width + x
            if x + 1 < width:
                edges.append((u, u + 1))
            if y + 1 < height:
                edges.append((u, u + width))
    return Graph(width * height, edges)


def star(n: int) -> Graph:
    """Star on n nodes: center 0 joined to leaves 1..n-1."""
    if n < 2:
        raise GraphError("star needs n >= 2")
    return Graph(n, [(0, i) for i in range(1, n)])


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    """G(n, p); deterministic for a fixed seed."""
    if n < 1:
        raise GraphError("erdos_renyi needs n >= 1")
    if not 0.0 <= p <= 1.0:
        raise GraphError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    if pairs:
        mask = rng.random(len(pairs)) < p
        edges = [e for e, keep in zip(pairs, mask) if keep]
    else:
        edges = []
    return Graph(n, edges)


def standard_family(kind: str, seed=None, **params) -> Graph:
    """Build one of the named graph families: path|cycle|clique|grid|erdos_renyi."""
    if kind == "path":
        return path(params["n"])
    if kind == "cycle":
        return cycle(params["n"])
    if kind == "clique":
        return clique(params["n"])
    if kind == "grid":
        return grid(params["width"], params["height"])
    if kind == "erdos_renyi":
        return erdos_renyi(params["n"], params["p"], params.get("seed", seed))
    raise GraphError(f"unknown graph family {kind!r}")


def tightness_network(r: int) -> tuple[Graph, np.ndarray, np.ndarray]:
    """Layered network on which instability propagates as a two-node frontier.

    Parts P_0..P_{r-2} have sizes r, r-1, ..., 2. P_0 is a clique; every
    P_i with i >= 1 is a path; consecutive parts are completely joined.
    Returns (graph, initial 2-coloring with P_0 black (0) and every path
    node white (1), per-node part label). The size ladder makes each path
    interior exactly tied (|P_{i-1}| = |P_{i+1}| + 2) so that, starting
    from the returned coloring, only the two endpoints of P_1 are unstable
    and the black region advances strictly part by part; the guarantees
    are enforced by the frontier checker in the analysis module.

    Requires even r >= 4. Node ids are assigned part by part, left to
    right, so configurations index naturally into the part layout.
    """
    if r < 4 or r % 2 != 0:
        raise GraphError("tightness network needs even r >= 4")
    sizes = [r - i for i in range(r - 1)]
    starts = np.concatenate(([0], np.cumsum(sizes)))
    n = int(starts[-1])
    edges = []
    for i, size in enumerate(sizes):
        base = int(starts[i])
        members = range(base, base + size)
        if i == 0:
            edges.extend(itertools.combinations(members, 2))
        else:
            edges.extend((w, w + 1) for w in members[:-1])
        if i + 1 < len(sizes):
            nxt = range(int(starts[i + 1]), int(starts[i + 1]) + sizes[i + 1])
            edges.extend((a, b) for a in members for b in nxt)
    graph = Graph(n, edges)
    init = np.ones(n, dtype=np.int64)
    init[: sizes[0]] = 0
    labels = np.concatenate(
        [np.full(size, i, dtype=np.int64) for i, size in enumerate(sizes)]
    )
    return graph, init, labels


def from_spec(spec: dict, base_dir: str = ".") -> Graph:
    """Build a graph from a JSON-style spec dict.

    Accepts ``{"generator": name, ...params}``, inline ``{"edge_list": text}``,
    a file reference ``{"edge_list_path": path}`` (resolved against base_dir),
    or raw ``{"node_count": n, "edges": [[u, v], ...]}``.
    """
    if not isinstance(spec, dict):
        raise GraphError("graph spec must be an object")
    if "edge_list" in spec:
        return from_edge_list(spec["edge_list"])
    if "edge_list_path" in spec:
        import os

        full = os.path.join(base_dir, spec["edge_list_path"])
        with open(full, "r", encoding="utf-8") as handle:
            return from_edge_list(handle.read())
    if "edges" in spec:
        return Graph(spec["node_count"], [tuple(e) for e in spec["edges"]])
    gen = spec.get("generator")
    if gen is None:
        raise GraphError("graph spec needs 'generator', 'edge_list', 'edge_list_path' or 'edges'")
    params = {k: v for k, v in spec.items() if k != "generator"}
    if gen == "complete_bipartite":
        return complete_bipartite(params["n_left"], params["n_right"])
    if gen == "star":
        return star(params["n"])
    if gen == "tightness":
        return tightness_network(params["r"])[0]
    return standard_family(gen, **params)
