"""The layered frontier network: where adaptive activation provably wins.

The layered network (a clique followed by completely-joined shrinking
paths) funnels instability through a two-node frontier: from the all-paths-
white start, exactly the endpoints of the current path are unstable, and
parts turn black strictly left to right. Because an unstable node here has
at most one conflicting unstable neighbor, the adaptive schedule activates
at nearly full rate alpha while degree-scaled schedules crawl at
alpha/degree, and the gap widens with size.
"""

import numpy as np

import lazydyn as lz


def mean_steps(r, schedule, trials=100, tag=0):
    gr, init, _ = lz.tightness_network(r)
    inst = lz.symmetric_coordination(gr)
    steps = [
        lz.run(inst, init, schedule, seed=lz.derive_trial_seed(tag, t), max_steps=10**6).steps
        for t in range(trials)
    ]
    return np.mean(steps)


for r in (4, 8):
    gr, init, labels = lz.tightness_network(r)
    report = lz.frontier_check(gr, init, labels)
    print(
        f"r={r}: {gr.node_count} nodes; frontier verified: "
        f"starts at {report.initial_unstable}, never more than "
        f"{report.max_unstable} unstable, parts finish in order {report.completion_order}"
    )

print("\nmean convergence steps (100 trials each)")
print(f"{'r':>4} {'adaptive(0.25)':>15} {'local_degree(0.25)':>19} {'ratio':>7}")
for r in (6, 8, 12):
    fast = mean_steps(r, lz.Adaptive(0.25), tag=1)
    slow = mean_steps(r, lz.LocalDegree(0.25), tag=2)
    print(f"{r:>4} {fast:>15.0f} {slow:>19.0f} {slow / fast:>7.1f}")
print("\nthe ratio grows with r: adaptive activation tracks the frontier,")
print("degree-scaled activation pays for the dense joins it never uses")
