"""Independent better-response dynamics and the activation trade-off.

Every unstable node activates independently each step and all activated
nodes switch simultaneously. Aggressive activation lets neighbors collide
(the two-node swap below never settles); scaling the probability by the
degree restores fast convergence.
"""

import numpy as np

import lazydyn as lz

# The canonical collision: both endpoints of one conflicting edge always
# active swap colors forever.
k2 = lz.symmetric_coordination(lz.path(2))
res = lz.run(k2, np.array([0, 1]), lz.Constant(1.0), seed=0, max_steps=50)
print("always-active K2:", "converged" if res.converged else f"still swapping after {res.steps} steps")

# At p = 1/2 the swap breaks symmetry quickly; the exact expectation is 2.
steps = [
    lz.run(k2, np.array([0, 1]), lz.Constant(0.5), seed=lz.derive_trial_seed(0, t)).steps
    for t in range(4000)
]
print(f"p=1/2 mean steps over 4000 trials: {np.mean(steps):.3f} (exact expectation 2)")

# One simultaneous step, in detail.
ring = lz.symmetric_coordination(lz.cycle(6))
config = np.array([0, 1, 0, 1, 0, 1])
new, report = lz.step(ring, config, lz.Constant(0.5), np.random.default_rng(4))
print("\nalternating 6-cycle, one step at p=1/2")
print("  unstable:", report.unstable, "activated:", report.activated)
print("  potential change:", report.potential_delta)

# The trade-off where both failure modes show: a complete bipartite graph
# from a balanced start. Too lazy is slow; too eager collides and stalls.
gr = lz.complete_bipartite(20, 20)
inst = lz.symmetric_coordination(gr)
init = lz.balanced_bipartite_config(20, 0.5)
print(f"\nK_20,20 from a balanced start: max degree {gr.max_degree}")
print(f"{'p':>8} {'convergence rate':>17} {'mean steps':>11}")
for p in (0.005, 0.025, 1.0 / gr.max_degree, 0.3, 0.9):
    runs = [
        lz.run(inst, init, lz.Constant(p), seed=lz.derive_trial_seed(7, t), max_steps=4000)
        for t in range(40)
    ]
    done = [r.steps for r in runs if r.converged]
    rate = len(done) / len(runs)
    mean = f"{np.mean(done):.0f}" if done else "-"
    print(f"{p:>8.3f} {rate:>17.2f} {mean:>11}")

# Degree-scaled schedules stay on the fast side of the trade-off.
for schedule in (lz.MaxDegree(0.5), lz.LocalDegree(0.5), lz.Adaptive(0.25)):
    runs = [
        lz.run(inst, init, schedule, seed=lz.derive_trial_seed(8, t), max_steps=10**5)
        for t in range(40)
    ]
    assert all(r.converged for r in runs)
    print(f"{schedule.kind:>18}: mean steps {np.mean([r.steps for r in runs]):.0f}")
