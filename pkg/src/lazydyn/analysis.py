"""Verification layer: exact drift, hitting-time oracle, bounds, experiments.

All checks are pure functions over immutable inputs. Exact drift enumerates
activation subsets, the hitting-time oracle solves the absorbing chain over
the full configuration space, and the bipartite oscillation experiment uses
an exact count-based reduction (nodes within a side of a complete bipartite
coordination game are exchangeable, so the per-side black counts form a
Markov chain equivalent to the per-node dynamics).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import (
    RESPONSE_BEST,
    RESPONSE_BETTER_UNIFORM,
    ActivationSchedule,
    derive_trial_seed,
    respond,
)
from .game import (
    best_response,
    symmetric_coordination,
    unstable_set,
    validate_configuration,
)

__all__ = [
    "AnalysisError",
    "TooManyUnstable",
    "StateSpaceTooLarge",
    "NonDeterministicRule",
    "FrontierViolation",
    "DriftReport",
    "HittingTimeResult",
    "CycleParams",
    "LowerBoundResult",
    "FrontierReport",
    "exact_drift",
    "mc_drift",
    "matched_drift_bound",
    "general_drift_identity_check",
    "exact_hitting_time",
    "theorem_bound",
    "cycle_params",
    "balanced_bipartite_config",
    "cycle_holds",
    "lower_bound_experiment",
    "frontier_check",
]


class AnalysisError(RuntimeError):
    """A check could not be carried out on the given inputs."""


class TooManyUnstable(AnalysisError):
    """Exact drift enumeration would exceed the subset cap; use mc_drift."""


class StateSpaceTooLarge(AnalysisError):
    """Configuration space exceeds the hitting-time oracle cap."""


class NonDeterministicRule(AnalysisError):
    """The oracle needs a deterministic response rule (best or better_lowest)."""


class FrontierViolation(AnalysisError):
    """The layered network violated its sequential-frontier contract."""


# ----------------------------------------------------------------------
# Drift
# ----------------------------------------------------------------------


@dataclass
class DriftReport:
    """Expected one-step potential change from a fixed configuration.

    ``bound`` is the matched schedule family's guaranteed decrease (None when
    no guarantee applies); ``edge_classes`` counts edges incident to at least
    one unstable node, split by same/conflicting endpoint strategies and by
    one/two unstable endpoints.
    """

    exact: bool
    drift: float
    bound: Optional[float]
    edge_classes: dict[str, int]
    unstable_count: int
    std_error: Optional[float] = None

    @property
    def equilibrium(self) -> bool:
        return self.unstable_count == 0


def _edge_classes(instance, config, unstable) -> dict[str, int]:
    flags = np.zeros(instance.node_count, dtype=bool)
    flags[unstable] = True
    out = {"s1": 0, "s2": 0, "c1": 0, "c2": 0}
    for u, v in instance.graph.edges():
        k = int(flags[u]) + int(flags[v])
        if k == 0:
            continue
        same = config[u] == config[v]
        out[("s" if same else "c") + str(k)] += 1
    return out


def matched_drift_bound(schedule: ActivationSchedule, instance, n_unstable: int):
    """The per-step expected-decrease guarantee matching the schedule family.

    Returns a negative number, or None when the family carries no guarantee
    for this instance (degenerate graph, or constant probability at or above
    1/delta_P).
    """
    if n_unstable == 0:
        return None
    kind = schedule.kind
    if kind == "constant":
        if instance.delta_P == 0:
            return None
        eps = 1.0 - schedule.p * instance.delta_P
        if eps <= 0:
            return None
        return -schedule.p * eps * n_unstable
    window = schedule.theorem_window()
    if window is None:
        return None
    p, q = window
    if kind in ("max_degree", "neighborhood_max"):
        d = instance.graph.max_degree
        return -p * (1.0 - q) * n_unstable / d if d > 0 else None
    if kind == "adaptive":
        return -p * (1.0 - 2.0 * q)
    if kind == "local_degree":
        d = instance.graph.max_degree
        return -p * (1.0 - 2.0 * q) * n_unstable / d if d > 0 else None
    if kind == "potential_weighted":
        dp = instance.delta_P
        return -p * (1.0 - q) * n_unstable / dp if dp > 0 else None
    return None


def _deterministic_responses(instance, config, unstable, mode):
    if mode == RESPONSE_BETTER_UNIFORM:
        raise NonDeterministicRule("drift/oracle computations need a deterministic rule")
    return {int(u): respond(instance, config, int(u), mode=mode) for u in unstable}


def _edge_move_tables(instance, config, pos, resp):
    """Per edge touching an unstable node: (row index vecs later) move deltas.

    Returns a list of (index_a, index_b, D) where index_* is the position of
    the endpoint inside the unstable vector (or -1 if stable) and D is the
    2x2 array of potential deltas indexed by (a activated, b activated).
    """
    out = []
    for (a, b), g in instance.tables.items():
        ia = pos.get(a, -1)
        ib = pos.get(b, -1)
        if ia < 0 and ib < 0:
            continue
        t = g.table
        ca, cb = int(config[a]), int(config[b])
        ra = resp[a] if ia >= 0 else ca
        rb = resp[b] if ib >= 0 else cb
        base = int(t[ca, cb])
        d = np.array(
            [
                [0.0, float(t[ca, rb] - base)],
                [float(t[ra, cb] - base), float(t[ra, rb] - base)],
            ]
        )
        out.append((ia, ib, d))
    return out


def exact_drift(
    instance,
    config,
    schedule,
    mode: str = RESPONSE_BEST,
    cap: int = 20,
) -> DriftReport:
    """Exact E[potential change] by enumerating all activation subsets.

    Enumerates the 2^k activation subsets of the k unstable nodes, weights
    each by its independent-activation probability, and applies the
    simultaneous moves. Raises TooManyUnstable above ``cap``; callers then
    fall back to :func:`mc_drift`.
    """
    c = validate_configuration(instance, config)
    unstable = unstable_set(instance, c)
    k = int(unstable.size)
    classes = _edge_classes(instance, c, unstable)
    if k == 0:
        return DriftReport(True, 0.0, None, classes, 0)
    if k > cap:
        raise TooManyUnstable(f"{k} unstable nodes exceed the enumeration cap {cap}")
    resp = _deterministic_responses(instance, c, unstable, mode)
    probs = schedule.probabilities(instance, c, unstable=unstable)[unstable]
    pos = {int(u): i for i, u in enumerate(unstable)}
    masks = np.arange(1 << k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
    weights = np.prod(np.where(bits, probs, 1.0 - probs), axis=1)
    zeros = np.zeros(1 << k, dtype=np.int64)
    delta = np.zeros(1 << k)
    for ia, ib, d in _edge_move_tables(instance, c, pos, resp):
        va = bits[:, ia].astype(np.int64) if ia >= 0 else zeros
        vb = bits[:, ib].astype(np.int64) if ib >= 0 else zeros
        delta += d[va, vb]
    drift = float(weights @ delta)
    return DriftReport(True, drift, matched_drift_bound(schedule, instance, k), classes, k)


def mc_drift(
    instance,
    config,
    schedule,
    samples: int,
    rng,
    mode: str = RESPONSE_BEST,
) -> DriftReport:
    """Unbiased Monte Carlo estimate of the one-step drift with standard error."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    c = validate_configuration(instance, config)
    unstable = unstable_set(instance, c)
    k = int(unstable.size)
    classes = _edge_classes(instance, c, unstable)
    if k == 0:
        return DriftReport(False, 0.0, None, classes, 0, std_error=0.0)
    resp = _deterministic_responses(instance, c, unstable, mode)
    probs = schedule.probabilities(instance, c, unstable=unstable)[unstable]
    pos = {int(u): i for i, u in enumerate(unstable)}
    active = rng.random((samples, k)) < probs
    zeros = np.zeros(samples, dtype=np.int64)
    values = np.zeros(samples)
    for ia, ib, d in _edge_move_tables(instance, c, pos, resp):
        va = active[:, ia].astype(np.int64) if ia >= 0 else zeros
        vb = active[:, ib].astype(np.int64) if ib >= 0 else zeros
        values += d[va, vb]
    drift = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else None
    return DriftReport(
        False, drift, matched_drift_bound(schedule, instance, k), classes, k, std_error=se
    )


def general_drift_identity_check(instance, config, u: int, v: int, mode=RESPONSE_BEST) -> int:
    """Evaluate the collision term on one edge two ways and return it.

    For unstable endpoints u, v with chosen responses u', v', the sum of both
    one-sided improvements plus the joint variation must equal
    P(c_u, c_v) + P(u', v') - P(u', c_v) - P(c_u, v'), and is at most twice
    the edge's maximum value. A mismatch signals an implementation bug.
    """
    c = validate_configuration(instance, config)
    key = (u, v) if u < v else (v, u)
    if key not in instance.tables:
        raise AnalysisError(f"({u},{v}) is not an edge")
    flags = set(unstable_set(instance, c).tolist())
    if u not in flags or v not in flags:
        raise AnalysisError("both endpoints must be unstable")
    t = instance.tables[key].table

    def entry(su, sv):
        return int(t[su, sv]) if key[0] == u else int(t[sv, su])

    cu, cv = int(c[u]), int(c[v])
    ru = respond(instance, c, u, mode=mode)
    rv = respond(instance, c, v, mode=mode)
    gain_u = entry(cu, cv) - entry(ru, cv)
    gain_v = entry(cu, cv) - entry(cu, rv)
    joint = entry(ru, rv) - entry(cu, cv)
    lhs = gain_u + gain_v + joint
    rhs = entry(cu, cv) + entry(ru, rv) - entry(ru, cv) - entry(cu, rv)
    if lhs != rhs:
        raise AnalysisError("collision identity violated: implementation bug")
    if lhs > 2 * instance.edge_max[key]:
        raise AnalysisError("collision term exceeds twice the edge maximum")
    return int(lhs)


# ----------------------------------------------------------------------
# Exact hitting-time oracle
# ----------------------------------------------------------------------


@dataclass
class HittingTimeResult:
    """Exact expected steps to absorption for every start configuration."""

    expected_steps: np.ndarray
    equilibria: list[tuple[int, ...]]
    state_count: int
    _strides: np.ndarray = field(repr=False, default=None)

    def state_index(self, config) -> int:
        return int(np.dot(np.asarray(config, dtype=np.int64), self._strides))

    def expected(self, config) -> float:
        return float(self.expected_steps[self.state_index(config)])


_KERNEL_BUDGET = 5 * 10**7


def exact_hitting_time(
    instance,
    schedule,
    init=None,
    mode: str = RESPONSE_BEST,
    state_cap: int = 2**20,
    direct_threshold: int = 10**4,
    tol: float = 1e-10,
) -> HittingTimeResult:
    """Solve E[T] = 1 + sum_c' Pr(c -> c') E[T_c'] over all configurations.

    Builds the exact transition kernel (activation subsets of the unstable
    set, deterministic moves), marks equilibria absorbing, and solves the
    linear system: sparse direct elimination up to ``direct_threshold``
    transient states, Gauss-Seidel sweeps to relative tolerance ``tol``
    beyond that.
    """
    if mode == RESPONSE_BETTER_UNIFORM:
        raise NonDeterministicRule("hitting-time oracle needs best or better_lowest")
    counts = instance.strategy_counts
    total = 1
    for k in counts.tolist():
        total *= int(k)
        if total > state_cap:
            raise StateSpaceTooLarge(
                f"{np.prod(counts, dtype=object)} states exceed cap {state_cap}"
            )
    n = instance.node_count
    strides = np.ones(n, dtype=np.int64)
    for u in range(n - 2, -1, -1):
        strides[u] = strides[u + 1] * counts[u + 1]

    rows_cols: list[np.ndarray] = []
    rows_probs: list[np.ndarray] = []
    absorbing = np.zeros(total, dtype=bool)
    equilibria: list[tuple[int, ...]] = []
    nnz = 0
    for idx, state in enumerate(itertools.product(*(range(int(k)) for k in counts))):
        config = np.asarray(state, dtype=np.int64)
        unstable = unstable_set(instance, config)
        k = int(unstable.size)
        if k == 0:
            absorbing[idx] = True
            equilibria.append(state)
            rows_cols.append(np.empty(0, dtype=np.int64))
            rows_probs.append(np.empty(0))
            continue
        nnz += 1 << k
        if nnz > _KERNEL_BUDGET:
            raise StateSpaceTooLarge("transition kernel exceeds the size budget")
        resp = _deterministic_responses(instance, config, unstable, mode)
        probs = schedule.probabilities(instance, config, unstable=unstable)[unstable]
        shift = np.asarray(
            [(resp[int(u)] - int(config[u])) * strides[u] for u in unstable], dtype=np.int64
        )
        masks = np.arange(1 << k, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
        weights = np.prod(np.where(bits, probs, 1.0 - probs), axis=1)
        targets = idx + bits @ shift
        rows_cols.append(targets)
        rows_probs.append(weights)

    expected = np.zeros(total)
    transient = np.flatnonzero(~absorbing)
    if transient.size:
        remap = -np.ones(total, dtype=np.int64)
        remap[transient] = np.arange(transient.size)
        if transient.size <= direct_threshold:
            import scipy.sparse
            import scipy.sparse.linalg

            data, rows, cols = [], [], []
            for new_r, s in enumerate(transient.tolist()):
                tgt = rows_cols[s]
                keep = ~absorbing[tgt]
                rows.extend([new_r] * int(keep.sum()))
                cols.extend(remap[tgt[keep]].tolist())
                data.extend(rows_probs[s][keep].tolist())
            q = scipy.sparse.csr_matrix(
                (data, (rows, cols)), shape=(transient.size, transient.size)
            )
            a = scipy.sparse.identity(transient.size, format="csr") - q
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                t = scipy.sparse.linalg.spsolve(a.tocsc(), np.ones(transient.size))
            if not np.all(np.isfinite(t)) or np.any(t < -1e-9):
                raise AnalysisError(
                    "expected hitting time diverges: some state cannot reach an equilibrium"
                )
            expected[transient] = t
        else:
            t = np.zeros(transient.size)
            for _ in range(10**6):
                worst = 0.0
                for new_r, s in enumerate(transient.tolist()):
                    tgt = rows_cols[s]
                    pr = rows_probs[s]
                    keep = ~absorbing[tgt]
                    self_mask = tgt == s
                    p_self = float(pr[self_mask].sum())
                    if p_self >= 1.0 - 1e-15:
                        raise AnalysisError("state has no exit: hitting time diverges")
                    other = keep & ~self_mask
                    acc = 1.0 + float(pr[other] @ t[remap[tgt[other]]])
                    new_val = acc / (1.0 - p_self)
                    worst = max(worst, abs(new_val - t[new_r]) / max(new_val, 1.0))
                    t[new_r] = new_val
                if worst < tol:
                    break
            else:
                raise AnalysisError("hitting-time sweeps did not converge")
            expected[transient] = t

    result = HittingTimeResult(expected, equilibria, total, _strides=strides)
    if init is not None:
        validate_configuration(instance, init)
    return result


# ----------------------------------------------------------------------
# Convergence-time bound calculators
# ----------------------------------------------------------------------


def _require_window(p, q, hi, kind):
    if not (0.0 < p <= q < hi):
        raise ValueError(f"{kind} bound needs 0 < p <= q < {hi}, got p={p}, q={q}")


def theorem_bound(kind: str, instance, initial_value, p: float, q: float = None) -> float:
    """Explicit constant-free convergence-time bound for a schedule family.

    ``initial_value`` is the initial conflict count for the two-strategy
    kinds (max_degree, adaptive, degree, constant) and the initial potential
    for the general kinds (None defaults to the n*delta_P/2 potential cap).
    The "general" kind uses the proven per-step decrease p(1-q)/delta_P;
    "general_stated" reports the p(1-2q) variant alongside it.
    """
    if kind == "max_degree":
        _require_window(p, q, 1.0, kind)
        d = instance.graph.max_degree
        if d == 0:
            raise ValueError("max_degree bound needs a graph with edges")
        return d * initial_value / (p * (1.0 - q))
    if kind == "adaptive":
        _require_window(p, q, 0.5, kind)
        return initial_value / (p * (1.0 - 2.0 * q))
    if kind == "degree":
        _require_window(p, q, 0.5, kind)
        d = instance.graph.max_degree
        if d == 0:
            raise ValueError("degree bound needs a graph with edges")
        return d * initial_value / (p * (1.0 - 2.0 * q))
    if kind in ("general", "general_stated"):
        _require_window(p, q, 0.5, kind)
        dp = instance.delta_P
        if dp == 0:
            raise ValueError("general bound needs a nonzero weighted maximum degree")
        m0 = initial_value
        if m0 is None:
            m0 = instance.node_count * dp / 2.0
        falloff = (1.0 - q) if kind == "general" else (1.0 - 2.0 * q)
        return m0 * dp / (p * falloff)
    if kind == "constant":
        if not 0.0 < p < 1.0:
            raise ValueError("constant bound needs p in (0, 1)")
        eps = 1.0 - p * instance.graph.max_degree
        if eps <= 0:
            raise ValueError("constant bound needs p below 1/max_degree")
        return initial_value / (p * eps)
    raise ValueError(f"unknown bound kind {kind!r}")


# ----------------------------------------------------------------------
# Complete-bipartite oscillation experiment
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CycleParams:
    """Derived quantities of the sustained-oscillation event on K_{n,n}.

    ``alpha`` is the self-reproducing majority fraction for constant
    activation probability p; the oscillation event requires both sides'
    opposite majority fractions to stay within [(1-eps)*alpha,
    (1+eps)*alpha]; ``fail_bound`` is the analytic per-step failure bound
    4*exp(-delta_ch^2 * mu / 3).
    """

    n: int
    p: float
    alpha: float
    eps: float
    delta_ch: float
    mu: float
    fail_bound: float


def cycle_params(n: int, p: float) -> CycleParams:
    if not 0.0 < p <= 1.0:
        raise ValueError("activation probability must lie in (0, 1]")
    if n < 1:
        raise ValueError("side size must be >= 1")
    alpha = 1.0 / (2.0 - p)
    eps = p / 3.0
    delta_ch = eps / (1.0 + eps)
    mu = p * (1.0 + eps) * alpha * n
    fail_bound = 4.0 * math.exp(-delta_ch * delta_ch * mu / 3.0)
    if not math.isclose(1.0 - alpha * (1.0 - p), alpha, rel_tol=1e-12):
        raise AnalysisError("alpha self-map identity failed")
    if not (1.0 - eps) * alpha > 0.5:
        raise AnalysisError("(1-eps)*alpha must exceed 1/2")
    if not delta_ch * delta_ch * mu > p**3 * n / 24.0:
        raise AnalysisError("concentration exponent fell below p^3 n / 24")
    return CycleParams(n, p, alpha, eps, delta_ch, mu, fail_bound)


def balanced_bipartite_config(n: int, p: float, orientation: str = "left_white") -> np.ndarray:
    """Starting configuration for K_{n,n}: opposite alpha-majorities per side.

    Nodes 0..n-1 are side L, n..2n-1 side R (the complete_bipartite layout).
    A rounded alpha fraction of L gets one color and the same count of R the
    other; ``orientation`` picks which side is mostly white.
    """
    params = cycle_params(n, p)
    k = int(round(params.alpha * n))
    if 2 * k <= n or k >= n:
        raise ValueError(
            f"rounding alpha*n={params.alpha * n:.3f} to {k} leaves no proper majority mix"
        )
    if orientation not in ("left_white", "left_black"):
        raise ValueError("orientation must be left_white or left_black")
    config = np.zeros(2 * n, dtype=np.int64)
    if orientation == "left_white":
        config[:k] = 1  # L majority white
        config[n + k :] = 1  # R majority black
    else:
        config[k:n] = 1
        config[n : n + k] = 1
    return config


def _cycle_counts(n, black_l, black_r, lo, hi) -> bool:
    fl_black = black_l / n
    fr_black = black_r / n
    return (lo <= fl_black <= hi and lo <= 1.0 - fr_black <= hi) or (
        lo <= 1.0 - fl_black <= hi and lo <= fr_black <= hi
    )


def cycle_holds(config, params: CycleParams) -> bool:
    """True when some color's L fraction and its opposite's R fraction both sit
    inside [(1-eps)*alpha, (1+eps)*alpha]; assumes the complete_bipartite layout."""
    c = np.asarray(config, dtype=np.int64)
    n = params.n
    if c.shape != (2 * n,):
        raise ValueError("configuration does not match a K_{n,n} layout")
    lo = (1.0 - params.eps) * params.alpha
    hi = (1.0 + params.eps) * params.alpha
    black_l = int((c[:n] == 0).sum())
    black_r = int((c[n:] == 0).sum())
    return _cycle_counts(n, black_l, black_r, lo, hi)


def _bipartite_side_unstable(n, b_own, b_other) -> bool:
    if 2 * b_other > n:
        return b_own < n  # white nodes want to turn black
    if 2 * b_other < n:
        return b_own > 0  # black nodes want to turn white
    return False


def _bipartite_equilibrium(n, black_l, black_r) -> bool:
    return not (
        _bipartite_side_unstable(n, black_l, black_r)
        or _bipartite_side_unstable(n, black_r, black_l)
    )


def _bipartite_count_step(n, black_l, black_r, prob, rng):
    """One simultaneous step of coordination on K_{n,n}, tracked by counts."""
    new_l, new_r = black_l, black_r
    if 2 * black_r > n:
        new_l = black_l + rng.binomial(n - black_l, prob)
    elif 2 * black_r < n:
        new_l = black_l - rng.binomial(black_l, prob)
    if 2 * black_l > n:
        new_r = black_r + rng.binomial(n - black_r, prob)
    elif 2 * black_l < n:
        new_r = black_r - rng.binomial(black_r, prob)
    return new_l, new_r


@dataclass
class LowerBoundTrial:
    seed: int
    first_cycle_failure: Optional[int]
    converged_at: Optional[int]
    steps_observed: int

    @property
    def cycle_held_throughout(self) -> bool:
        return self.first_cycle_failure is None


@dataclass
class LowerBoundResult:
    n: int
    p: float
    activation: float
    params: CycleParams
    max_steps: int
    trials: list[LowerBoundTrial]

    @property
    def converged_count(self) -> int:
        return sum(1 for t in self.trials if t.converged_at is not None)

    @property
    def full_survival_count(self) -> int:
        return sum(1 for t in self.trials if t.cycle_held_throughout)

    @property
    def mean_survival(self) -> float:
        lengths = [
            (t.first_cycle_failure - 1) if t.first_cycle_failure else t.steps_observed
            for t in self.trials
        ]
        return float(np.mean(lengths)) if lengths else 0.0


def lower_bound_experiment(
    n: int,
    p: float,
    max_steps: int,
    trials: int,
    seed: int,
    activation: Optional[float] = None,
) -> LowerBoundResult:
    """Run coordination on K_{n,n} from the balanced start; track oscillation.

    ``activation`` is the per-unstable-node activation probability (defaults
    to the constant p that defines the balanced start). Per trial, records
    the first step at which the oscillation event fails and the convergence
    step, if any. Uses the exact count-based reduction, so side size is not
    a performance constraint.
    """
    params = cycle_params(n, p)
    prob = p if activation is None else float(activation)
    if not 0.0 < prob <= 1.0:
        raise ValueError("activation probability must lie in (0, 1]")
    try:
        start = balanced_bipartite_config(n, p)
    except ValueError:
        # tiny n: no strict-majority mix exists; run from the nearest split
        k = max(1, min(int(round(params.alpha * n)), n))
        start = np.zeros(2 * n, dtype=np.int64)
        start[:k] = 1
        start[n + k :] = 1
    start_l = int((start[:n] == 0).sum())
    start_r = int((start[n:] == 0).sum())
    lo = (1.0 - params.eps) * params.alpha
    hi = (1.0 + params.eps) * params.alpha
    start_balanced = _cycle_counts(n, start_l, start_r, lo, hi)
    outcomes = []
    for trial in range(trials):
        trial_seed = derive_trial_seed(seed, trial)
        rng = np.random.default_rng(trial_seed)
        black_l, black_r = start_l, start_r
        first_fail = None if start_balanced else 0
        converged_at = 0 if _bipartite_equilibrium(n, start_l, start_r) else None
        steps = 0
        if converged_at is None:
            for t in range(1, max_steps + 1):
                black_l, black_r = _bipartite_count_step(n, black_l, black_r, prob, rng)
                steps = t
                if first_fail is None and not _cycle_counts(n, black_l, black_r, lo, hi):
                    first_fail = t
                if _bipartite_equilibrium(n, black_l, black_r):
                    converged_at = t
                    break
        outcomes.append(LowerBoundTrial(trial_seed, first_fail, converged_at, steps))
    return LowerBoundResult(n, p, prob, params, max_steps, outcomes)


# ----------------------------------------------------------------------
# Sequential frontier checker
# ----------------------------------------------------------------------


@dataclass
class FrontierReport:
    initial_unstable: tuple[int, ...]
    total_flips: int
    max_unstable: int
    completion_order: list[int]
    orders_checked: int


def _frontier_simulate(instance, init, labels, last_label, remaining0, pick):
    config = init.copy()
    flips = 0
    max_unstable = 0
    completion: list[int] = []
    remaining = dict(remaining0)
    last_touched = False
    flip_cap = 4 * instance.node_count
    while True:
        unstable = unstable_set(instance, config)
        if unstable.size == 0:
            break
        if np.any(labels[unstable] == last_label):
            last_touched = True
        if not last_touched and unstable.size > 2:
            raise FrontierViolation(
                f"{unstable.size} unstable nodes before the last part was reached"
            )
        max_unstable = max(max_unstable, int(unstable.size))
        u = int(pick(unstable))
        new = best_response(instance, config, u)
        if new == config[u]:
            raise FrontierViolation("picked node is not actually unstable")
        lab = int(labels[u])
        if any(remaining.get(j, 0) > 0 for j in range(1, lab)):
            raise FrontierViolation(
                f"part {lab} flipped before all earlier parts turned black"
            )
        config[u] = new
        flips += 1
        if flips > flip_cap:
            raise FrontierViolation("sequential dynamics did not terminate")
        if lab in remaining:
            remaining[lab] -= 1
            if remaining[lab] == 0:
                completion.append(lab)
    if any(v > 0 for v in remaining.values()):
        raise FrontierViolation("converged with white path nodes left")
    return flips, max_unstable, completion


def frontier_check(graph, init, part_labels, random_orders: int = 5, seed: int = 0) -> FrontierReport:
    """Verify the sequential-frontier contract of the layered network.

    Simulates one-flip-at-a-time coordination dynamics (lowest unstable id
    first, then ``random_orders`` random orders): exactly the two endpoints
    of part 1 start unstable, at most two nodes are unstable before the last
    part is reached, parts turn black strictly left to right, and the total
    number of flips equals the number of path nodes. Raises
    FrontierViolation otherwise.
    """
    instance = symmetric_coordination(graph)
    labels = np.asarray(part_labels, dtype=np.int64)
    init = validate_configuration(instance, init)
    if labels.shape != (graph.node_count,):
        raise ValueError("need one part label per node")
    last_label = int(labels.max())
    part1 = np.flatnonzero(labels == 1)
    endpoints = [
        int(u)
        for u in part1
        if int(np.isin(graph.neighbors(u), part1).sum()) == 1
    ]
    first = unstable_set(instance, init)
    if first.size != 2 or set(first.tolist()) != set(endpoints):
        raise FrontierViolation(
            f"initial unstable set {first.tolist()} is not the two part-1 endpoints {endpoints}"
        )
    path_nodes = int((labels >= 1).sum())
    remaining0 = {
        int(lab): int((labels == lab).sum()) for lab in range(1, last_label + 1)
    }

    def check_one(pick):
        flips, max_u, completion = _frontier_simulate(
            instance, init, labels, last_label, remaining0, pick
        )
        if flips != path_nodes:
            raise FrontierViolation(f"{flips} flips, expected {path_nodes}")
        if completion != sorted(completion):
            raise FrontierViolation(f"parts completed out of order: {completion}")
        return flips, max_u, completion

    flips, max_u, completion = check_one(lambda unstable: unstable[0])
    for k in range(random_orders):
        rng = np.random.default_rng((seed, k))
        check_one(lambda unstable: rng.choice(unstable))
    return FrontierReport(
        initial_unstable=tuple(first.tolist()),
        total_flips=flips,
        max_unstable=max_u,
        completion_order=completion,
        orders_checked=1 + random_orders,
    )
