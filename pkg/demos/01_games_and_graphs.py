"""Graphs and edge-potential games: potentials, responses, instability.

Builds a few graphs, attaches games to their edges, and inspects the
quantities everything else is built on: the global potential, per-node
payoff gains, best responses, and the unstable set.
"""

import numpy as np

import lazydyn as lz

# A 5-cycle with the symmetric coordination game on every edge: the
# potential is simply the number of bi-chromatic edges.
ring = lz.cycle(5)
coord = lz.symmetric_coordination(ring)
config = np.array([0, 1, 0, 1, 1])
print("cycle(5) coordination")
print("  config           ", config)
print("  potential        ", lz.total_potential(coord, config))
print("  unstable nodes   ", lz.unstable_set(coord, config))
print("  best response(0) ", lz.best_response(coord, config, 0))

# Flipping node 0 to white removes both of its conflicts.
print("  gain of 0 -> 1   ", lz.payoff_gain(coord, config, 0, 1))

# The minority game is the same machinery with agreement penalized instead.
mino = lz.minority(ring)
print("\ncycle(5) minority")
print("  potential        ", lz.total_potential(mino, config))
print("  unstable nodes   ", lz.unstable_set(mino, config))

# Arbitrary rational tables are normalized to equivalent integer tables
# (scaled and shifted; every response comparison is preserved exactly).
two = lz.path(2)
custom = lz.from_potential_tables(two, 2, {(0, 1): [[-2, -1], [0, -2]]})
print("\nnormalized table for {(-2,-1),(0,-2)}:")
print(" ", custom.tables[(0, 1)].table.tolist())

# The two-opinion game adds one single-strategy anchor node per player; its
# weighted maximum degree delta_P lands in [16*max_degree, 16*(max_degree+1)].
opinion = lz.opinion_game(lz.path(3), [0.25, 0.75, 0.25])
print("\nopinion game on path(3)")
print("  delta_P          ", opinion.delta_P)
print("  strategy counts  ", opinion.strategy_counts)
start = np.array([1, 0, 1, 0, 0, 0])
print("  potential        ", lz.total_potential(opinion, start))
print("  unstable nodes   ", lz.unstable_set(opinion, start), "(anchors never appear)")

# Graphs and instances round-trip through JSON documents.
lz.save_instance(opinion, "/tmp/opinion.json")
back = lz.load_instance("/tmp/opinion.json")
print("\nreloaded instance matches:", back.delta_P == opinion.delta_P)
