"""Sustained oscillation on complete bipartite graphs vs lazy convergence.

With a constant activation probability p, a complete bipartite graph
started from opposite alpha = 1/(2-p) majorities keeps reproducing the
same balanced pattern with swapped colors: each step, the active majority
members defect, recreating an alpha majority of the other color. The
experiment tracks how long both sides stay inside the oscillation window
[(1-eps)*alpha, (1+eps)*alpha]. Scaling the activation probability down by
the degree (here 1/1000) converges quickly instead.
"""

import lazydyn as lz

n, p = 500, 0.5
params = lz.cycle_params(n, p)
print(f"K_{{{n},{n}}} at constant p = {p}")
print(f"  alpha = {params.alpha:.4f}, window eps = {params.eps:.4f}")
print(f"  analytic per-step failure bound: {params.fail_bound:.3g} (loose at this size)")

steps, trials = 10**4, 10
result = lz.lower_bound_experiment(n, p, steps, trials, seed=2024)
print(f"\nconstant-probability run, {trials} trials x {steps} steps:")
print(f"  trials converged:            {result.converged_count}")
print(f"  oscillation never broken in: {result.full_survival_count}/{trials} trials")
print(f"  mean steps inside window:    {result.mean_survival:.0f}")

# Contrast: the same start with activation 0.5/max_degree converges quickly,
# far below the worst-case guarantee for degree-scaled schedules.
inst = lz.symmetric_coordination(lz.complete_bipartite(n, n))
start = lz.balanced_bipartite_config(n, p)
m0 = lz.conflict_count(inst, start)
bound = lz.theorem_bound("max_degree", inst, m0, 0.5, 0.5)
contrast = lz.lower_bound_experiment(n, p, 10**6, trials, seed=2024, activation=0.5 / n)
worst = max(t.converged_at for t in contrast.trials)
print(f"\nlazy contrast (activation {0.5 / n:g}):")
print(f"  initial conflicting edges m0 = {m0}")
print(f"  all {contrast.converged_count} trials converged; worst case {worst} steps")
print(f"  worst-case guarantee for this schedule family: {bound:.3g} steps")
