"""Edge-potential games on graphs: builders, potentials, responses, instability.

A game instance attaches one non-negative integer potential table to every
edge; the global potential of a configuration is the sum of table entries at
the endpoints' current strategies. All response logic works on potential
differences only, so per-player payoff tables are never stored.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import graph as graphs
from .graph import Graph

__all__ = [
    "BLACK",
    "WHITE",
    "EdgeGame",
    "GameInstance",
    "GameError",
    "symmetric_coordination",
    "minority",
    "from_potential_tables",
    "opinion_game",
    "total_potential",
    "payoff_gain",
    "response_gains",
    "best_response",
    "unstable_set",
    "conflict_count",
    "monochromatic",
    "random_configuration",
    "validate_configuration",
    "save_instance",
    "load_instance",
    "instance_from_spec",
]

# Two-strategy instances use these color aliases throughout.
BLACK, WHITE = 0, 1

# Scaled table entries must stay comfortably inside int64.
_MAX_TABLE_ENTRY = 2**62


class GameError(ValueError):
    """Invalid game construction or configuration input."""


@dataclass(frozen=True)
class EdgeGame:
    """One edge's potential table; rows are the smaller endpoint's strategies."""

    table: np.ndarray

    @property
    def max_value(self) -> int:
        return int(self.table.max())


class GameInstance:
    """A graph plus one integer potential table per edge.

    ``tables`` maps each edge (u, v) with u < v to an EdgeGame whose rows are
    indexed by u's strategy and columns by v's strategy. ``delta_P`` is the
    weighted maximum degree: the largest, over nodes, sum of incident table
    maxima. ``uniform_table`` is set when every node has two strategies and
    all edges share one symmetric table; the dynamics engine uses it for a
    vectorized path. Instances are immutable after construction.
    """

    def __init__(self, graph: Graph, strategy_counts, tables: dict, label: str = "custom"):
        self.graph = graph
        counts = np.asarray(strategy_counts, dtype=np.int64)
        if counts.ndim == 0:
            counts = np.full(graph.node_count, int(counts), dtype=np.int64)
        if counts.shape != (graph.node_count,):
            raise GameError("strategy_counts must give one count per node")
        if graph.node_count and counts.min() < 1:
            raise GameError("every node needs at least one strategy")
        self.strategy_counts = counts
        self.label = label

        expected = set(graph.edges())
        games: dict[tuple[int, int], EdgeGame] = {}
        for key, value in tables.items():
            u, v = int(key[0]), int(key[1])
            if u > v:
                u, v = v, u
            if (u, v) not in expected:
                raise GameError(f"table given for non-edge ({u},{v})")
            arr = np.asarray(value.table if isinstance(value, EdgeGame) else value, dtype=np.int64)
            if arr.shape != (counts[u], counts[v]):
                raise GameError(
                    f"table for edge ({u},{v}) has shape {arr.shape}, "
                    f"expected ({counts[u]},{counts[v]})"
                )
            if arr.min() < 0:
                raise GameError(f"table for edge ({u},{v}) has negative entries")
            games[(u, v)] = EdgeGame(arr)
        missing = expected - set(games)
        if missing:
            raise GameError(f"missing table for edge {sorted(missing)[0]}")
        self.tables = games
        self.edge_max = {e: g.max_value for e, g in games.items()}

        # Per-node incident table views: (neighbor, table, node_is_row).
        self.incident: list[list[tuple[int, np.ndarray, bool]]] = [
            [] for _ in range(graph.node_count)
        ]
        for (u, v), g in sorted(games.items()):
            self.incident[u].append((v, g.table, True))
            self.incident[v].append((u, g.table, False))

        per_node = np.zeros(graph.node_count, dtype=np.int64)
        for (u, v), m in self.edge_max.items():
            per_node[u] += m
            per_node[v] += m
        self.delta_P = int(per_node.max()) if graph.node_count else 0

        self.uniform_table = None
        if graph.node_count and counts.max() == 2 and counts.min() == 2 and games:
            first = next(iter(games.values())).table
            if np.array_equal(first, first.T) and all(
                np.array_equal(g.table, first) for g in games.values()
            ):
                self.uniform_table = first.copy()

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def two_strategy(self) -> bool:
        """True when every node has exactly two strategies (colors)."""
        return self.node_count > 0 and bool(
            np.all(self.strategy_counts == 2)
        )

    def potential_cap(self) -> int:
        """Upper bound on the global potential: sum of per-edge maxima."""
        return sum(self.edge_max.values())

    def __repr__(self) -> str:
        return (
            f"GameInstance({self.label}, n={self.node_count}, "
            f"m={self.graph.edge_count}, delta_P={self.delta_P})"
        )


# ----------------------------------------------------------------------
# Builders
# ----------------------------------------------------------------------


def symmetric_coordination(graph: Graph) -> GameInstance:
    """Two colors per node; a conflicting edge costs 1, agreement costs 0."""
    table = [[0, 1], [1, 0]]
    return GameInstance(
        graph, 2, {e: table for e in graph.edges()}, label="symmetric_coordination"
    )


def minority(graph: Graph) -> GameInstance:
    """Two colors per node; agreement costs 1, so nodes chase the minority color."""
    table = [[1, 0], [0, 1]]
    return GameInstance(graph, 2, {e: table for e in graph.edges()}, label="minority")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise GameError("potential values must be finite")
    return Fraction(x)


def _normalization_factor(values: list[Fraction]) -> Fraction:
    """Smallest usable integer factor making distinct values at least 1 apart.

    Starts from ceil(1 / min gap). If that factor would force lossy
    truncation (some scaled value non-integral), it is raised to the least
    common multiple of the value denominators, which scales every value to
    an exact integer and therefore keeps the full order structure of
    potential differences intact.
    """
    distinct = sorted(set(values))
    if len(distinct) <= 1:
        return Fraction(1)
    gap = min(b - a for a, b in zip(distinct, distinct[1:]))
    factor = Fraction(math.ceil(Fraction(1) / gap))
    if all((factor * v).denominator == 1 for v in distinct):
        return factor
    return Fraction(math.lcm(*(v.denominator for v in distinct)))


def from_potential_tables(graph: Graph, strategy_counts, tables: dict) -> GameInstance:
    """Build an instance from rational-valued tables, normalized to integers.

    All tables are multiplied by one common factor (see
    :func:`_normalization_factor`) and shifted by one common offset so the
    global minimum entry is 0. Both operations are affine and shared across
    every entry, so the ordering of potential differences, and hence every
    best/better response, is exactly preserved.
    """
    counts = np.asarray(strategy_counts, dtype=np.int64)
    if counts.ndim == 0:
        counts = np.full(graph.node_count, int(counts), dtype=np.int64)
    frac_tables: dict[tuple[int, int], list[list[Fraction]]] = {}
    values: list[Fraction] = []
    for key, raw in tables.items():
        u, v = int(key[0]), int(key[1])
        if u > v:
            u, v = v, u
        rows = [[_as_fraction(x) for x in row] for row in np.asarray(raw, dtype=object)]
        if len(rows) != counts[u] or any(len(r) != counts[v] for r in rows):
            raise GameError(f"table for edge ({u},{v}) has wrong dimensions")
        frac_tables[(u, v)] = rows
        for r in rows:
            values.extend(r)
    if not values:
        return GameInstance(graph, counts, {}, label="custom")
    factor = _normalization_factor(values)
    scaled_min = min(factor * v for v in values)
    int_tables = {}
    for key, rows in frac_tables.items():
        out = [[factor * x - scaled_min for x in row] for row in rows]
        if any(abs(x) >= _MAX_TABLE_ENTRY for row in out for x in row):
            raise GameError("normalized potential values overflow 64-bit range")
        int_tables[key] = [[int(x) for x in row] for row in out]
    return GameInstance(graph, counts, int_tables, label="custom")


def opinion_game(graph: Graph, beliefs) -> GameInstance:
    """Two-opinion game with per-node beliefs in {1/4, 3/4}.

    Every original edge carries a coordination table scaled by 16; each
    original node u gains a single-strategy anchor node n + u whose edge
    table is the column (16*(0-b)^2, 16*(1-b)^2), i.e. (1, 9) for b = 1/4
    and (9, 1) for b = 3/4. Anchor nodes have one strategy and so are never
    unstable and never activated.
    """
    b = np.asarray(beliefs, dtype=np.float64)
    if b.shape != (graph.node_count,):
        raise GameError("need one belief per node")
    if not np.all((b == 0.25) | (b == 0.75)):
        raise GameError("beliefs must be 1/4 or 3/4")
    n = graph.node_count
    edges = list(graph.edges()) + [(u, n + u) for u in range(n)]
    big = Graph(2 * n, edges)
    counts = np.concatenate([np.full(n, 2), np.ones(n)]).astype(np.int64)
    tables: dict[tuple[int, int], list] = {e: [[0, 16], [16, 0]] for e in graph.edges()}
    for u in range(n):
        lo, hi = (1, 9) if b[u] == 0.25 else (9, 1)
        tables[(u, n + u)] = [[lo], [hi]]
    return GameInstance(big, counts, tables, label="opinion")


# ----------------------------------------------------------------------
# Potentials and responses
# ----------------------------------------------------------------------


def validate_configuration(instance: GameInstance, config) -> np.ndarray:
    c = np.asarray(config, dtype=np.int64)
    if c.shape != (instance.node_count,):
        raise GameError("configuration length does not match node count")
    if instance.node_count and (c.min() < 0 or np.any(c >= instance.strategy_counts)):
        raise GameError("strategy index out of range")
    return c


def monochromatic(instance: GameInstance, strategy: int = 0) -> np.ndarray:
    """Configuration assigning every node the same strategy (clipped to range)."""
    c = np.minimum(strategy, instance.strategy_counts - 1)
    return c.astype(np.int64)


def random_configuration(instance: GameInstance, rng) -> np.ndarray:
    return (rng.random(instance.node_count) * instance.strategy_counts).astype(np.int64)


def total_potential(instance: GameInstance, config) -> int:
    """Global potential: sum of edge-table entries at the current strategies."""
    c = np.asarray(config, dtype=np.int64)
    if instance.uniform_table is not None:
        gr = instance.graph
        if gr.edge_count == 0:
            return 0
        return int(instance.uniform_table[c[gr.edge_u], c[gr.edge_v]].sum())
    return sum(
        int(g.table[c[u], c[v]]) for (u, v), g in instance.tables.items()
    )


def response_gains(instance: GameInstance, config, u: int) -> np.ndarray:
    """Potential drop for each strategy of u: gains[s] = P(c) - P(c with u -> s)."""
    c = config
    k = int(instance.strategy_counts[u])
    base = 0
    alt = np.zeros(k, dtype=np.int64)
    for v, table, is_row in instance.incident[u]:
        col = table[:, c[v]] if is_row else table[c[v], :]
        base += int(col[c[u]])
        alt += col
    return base - alt


def payoff_gain(instance: GameInstance, config, u: int, strategy: int) -> int:
    """Payoff improvement for u switching to ``strategy``, everyone else fixed.

    Equals the potential decrease P(c) - P(c'), evaluated locally over the
    edges incident to u.
    """
    return int(response_gains(instance, config, u)[strategy])


def best_response(instance: GameInstance, config, u: int) -> int:
    """Best response of u; the current strategy wins ties, then lowest index."""
    gains = response_gains(instance, config, u)
    top = int(gains.max())
    if top <= 0:
        return int(config[u])
    return int(np.flatnonzero(gains == top)[0])


def _uniform_gains(instance: GameInstance, config: np.ndarray) -> np.ndarray:
    """Vectorized flip gains for instances with one shared symmetric 2x2 table."""
    gr = instance.graph
    t = instance.uniform_table
    c = config
    n = gr.node_count
    if gr.edge_count:
        cnt1 = np.bincount(gr.edge_u[c[gr.edge_v] == 1], minlength=n) + np.bincount(
            gr.edge_v[c[gr.edge_u] == 1], minlength=n
        )
    else:
        cnt1 = np.zeros(n, dtype=np.int64)
    cnt0 = gr.degree - cnt1
    gain_from0 = cnt0 * (t[0, 0] - t[1, 0]) + cnt1 * (t[0, 1] - t[1, 1])
    gain_from1 = cnt0 * (t[1, 0] - t[0, 0]) + cnt1 * (t[1, 1] - t[0, 1])
    return np.where(c == 0, gain_from0, gain_from1)


def unstable_set(instance: GameInstance, config) -> np.ndarray:
    """Sorted ids of nodes with a strictly improving strategy, i.e. gain >= 1."""
    c = np.asarray(config, dtype=np.int64)
    if instance.uniform_table is not None:
        return np.flatnonzero(_uniform_gains(instance, c) >= 1)
    out = [
        u
        for u in range(instance.node_count)
        if instance.strategy_counts[u] > 1 and int(response_gains(instance, c, u).max()) >= 1
    ]
    return np.asarray(out, dtype=np.int64)


def conflict_count(instance: GameInstance, config):
    """Number of edges whose endpoints differ; None unless all nodes have 2 strategies."""
    if not instance.two_strategy:
        return None
    c = np.asarray(config, dtype=np.int64)
    gr = instance.graph
    if gr.edge_count == 0:
        return 0
    return int((c[gr.edge_u] != c[gr.edge_v]).sum())


# ----------------------------------------------------------------------
# Instance documents (JSON)
# ----------------------------------------------------------------------

_BUILDERS = {
    "symmetric_coordination": symmetric_coordination,
    "minority": minority,
}


def instance_from_spec(spec: dict, base_dir: str = ".") -> GameInstance:
    """Build an instance from a JSON-style spec dict.

    Builder form: ``{"graph": {...}, "builder": name}`` with optional
    ``"beliefs"`` for the opinion builder. Raw form: ``{"graph": {...},
    "strategy_counts": ..., "edges": [{"u", "v", "table"}, ...]}``; raw
    tables may be rational-valued and are normalized on load. A
    ``{"instance_file": path}`` form defers to :func:`load_instance`.
    """
    if "instance_file" in spec:
        return load_instance(os.path.join(base_dir, spec["instance_file"]))
    graph = graphs.from_spec(spec["graph"], base_dir=base_dir)
    builder = spec.get("builder")
    if builder is not None:
        if builder == "opinion":
            return opinion_game(graph, spec["beliefs"])
        if builder not in _BUILDERS:
            raise GameError(f"unknown builder {builder!r}")
        return _BUILDERS[builder](graph)
    if "edges" not in spec:
        raise GameError("game spec needs a 'builder' or explicit 'edges'")
    tables = {(int(e["u"]), int(e["v"])): e["table"] for e in spec["edges"]}
    return from_potential_tables(graph, spec["strategy_counts"], tables)


def save_instance(instance: GameInstance, path: str) -> None:
    doc = {
        "format": "lazydyn-instance",
        "graph": {
            "node_count": instance.node_count,
            "edges": [[int(u), int(v)] for u, v in instance.graph.edges()],
        },
        "strategy_counts": instance.strategy_counts.tolist(),
        "edges": [
            {"u": int(u), "v": int(v), "table": g.table.tolist()}
            for (u, v), g in sorted(instance.tables.items())
        ],
        "label": instance.label,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1, sort_keys=True)
        handle.write("\n")


def load_instance(path: str) -> GameInstance:
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    if "builder" in doc:
        return instance_from_spec(doc, base_dir=os.path.dirname(path) or ".")
    graph = graphs.from_spec(doc["graph"])
    tables = {(int(e["u"]), int(e["v"])): e["table"] for e in doc["edges"]}
    if doc.get("format") == "lazydyn-instance":
        # Files written by save_instance hold normalized integer tables;
        # load them verbatim so a save/load round trip is the identity.
        inst = GameInstance(graph, doc["strategy_counts"], tables)
    else:
        inst = from_potential_tables(graph, doc["strategy_counts"], tables)
    inst.label = doc.get("label", "custom")
    return inst
