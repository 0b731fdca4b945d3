"""Independent better-response dynamics: activation schedules, step, run.

Every step recomputes the unstable set against the current configuration,
activates each unstable node independently with its scheduled probability,
and lets all activated nodes switch simultaneously to a response evaluated
against the pre-step configuration. Stable nodes never move, so activation
is sampled only for unstable nodes (distributionally identical, and it
halves RNG consumption). Randomness comes from numpy's seedable default
generator (PCG64); activation draws are consumed in ascending node id
within the unstable set, so traces replay bit-exactly for a fixed seed,
and per-trial seeds derive from a stable hash of (master seed, trial).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np

from .game import (
    GameInstance,
    conflict_count,
    payoff_gain,
    response_gains,
    total_potential,
    unstable_set,
    validate_configuration,
)

__all__ = [
    "ActivationSchedule",
    "Constant",
    "MaxDegree",
    "NeighborhoodMax",
    "LocalDegree",
    "Adaptive",
    "PotentialWeighted",
    "ScheduleError",
    "StepReport",
    "RunResult",
    "RESPONSE_BEST",
    "RESPONSE_BETTER_LOWEST",
    "RESPONSE_BETTER_UNIFORM",
    "better_response_mode",
    "respond",
    "probabilities",
    "step",
    "run",
    "derive_trial_seed",
]

RESPONSE_BEST = "best"
RESPONSE_BETTER_LOWEST = "better_lowest"
RESPONSE_BETTER_UNIFORM = "better_uniform"
_RESPONSE_MODES = (RESPONSE_BEST, RESPONSE_BETTER_LOWEST, RESPONSE_BETTER_UNIFORM)


class ScheduleError(ValueError):
    """Activation probabilities left (0, 1] or schedule/instance mismatch."""


class ActivationSchedule:
    """Rule producing per-node activation probabilities, possibly state-dependent."""

    kind: ClassVar[str] = "base"

    def probabilities(self, instance: GameInstance, config, unstable=None) -> np.ndarray:
        raise NotImplementedError

    def theorem_window(self) -> Optional[tuple[float, float]]:
        """The (p, q) window this schedule claims for convergence-bound checks."""
        return None

    def validate_window(self, instance: GameInstance, config=None) -> list[str]:
        """Return human-readable warnings where realized probabilities leave the window.

        Warnings only: out-of-window schedules are legitimate simulation
        inputs (the oscillation experiments rely on them).
        """
        return []

    def _check(self, probs: np.ndarray, degenerate: np.ndarray) -> np.ndarray:
        live = ~degenerate
        if np.any(probs[live] <= 0.0) or np.any(probs > 1.0):
            raise ScheduleError(
                f"{self.kind} schedule produced probabilities outside (0, 1]"
            )
        probs[degenerate] = 0.0
        return probs


@dataclass(frozen=True)
class Constant(ActivationSchedule):
    """Every node is active with the same fixed probability."""

    p: float
    kind: ClassVar[str] = "constant"

    def probabilities(self, instance, config, unstable=None):
        probs = np.full(instance.node_count, float(self.p))
        return self._check(probs, np.zeros(instance.node_count, dtype=bool))

    def validate_window(self, instance, config=None):
        if instance.graph.max_degree > 0 and self.p * instance.graph.max_degree >= 1.0:
            return [
                f"constant p={self.p} is not below 1/max_degree={1.0 / instance.graph.max_degree:.4g}; "
                "no convergence-time bound applies"
            ]
        return []


@dataclass(frozen=True)
class MaxDegree(ActivationSchedule):
    """p_u = alpha / max_degree; optional (p, q) window for bound checks."""

    alpha: float
    window: Optional[tuple[float, float]] = None
    kind: ClassVar[str] = "max_degree"

    def theorem_window(self):
        return tuple(self.window) if self.window else (self.alpha, self.alpha)

    def probabilities(self, instance, config, unstable=None):
        d = instance.graph.max_degree
        value = float(self.alpha) / d if d > 0 else 0.0
        probs = np.full(instance.node_count, value)
        degenerate = instance.graph.degree == 0
        return self._check(probs, degenerate)

    def validate_window(self, instance, config=None):
        p, q = self.theorem_window()
        gr = instance.graph
        if gr.max_degree == 0:
            return []
        out = []
        value = self.alpha / gr.max_degree
        if value < p / gr.max_degree - 1e-15:
            out.append(f"alpha={self.alpha} falls below window floor p={p}")
        hi = np.min(q / gr.nbhd_max_degree[gr.degree > 0])
        if value > hi + 1e-15:
            out.append(
                f"alpha={self.alpha} exceeds the q/nbhd_max_degree ceiling for some node"
            )
        return out


@dataclass(frozen=True)
class NeighborhoodMax(ActivationSchedule):
    """p_u = alpha_high / nbhd_max_degree(u), clamped into [alpha_low/max_degree, ...]."""

    alpha_low: float
    alpha_high: float
    kind: ClassVar[str] = "neighborhood_max"

    def theorem_window(self):
        return (self.alpha_low, self.alpha_high)

    def probabilities(self, instance, config, unstable=None):
        gr = instance.graph
        if self.alpha_low > self.alpha_high:
            raise ScheduleError("alpha_low must not exceed alpha_high")
        degenerate = gr.nbhd_max_degree == 0
        probs = np.zeros(gr.node_count)
        live = ~degenerate
        if gr.max_degree > 0:
            floor = self.alpha_low / gr.max_degree
            raw = self.alpha_high / np.maximum(gr.nbhd_max_degree, 1)
            probs[live] = np.maximum(raw[live], floor)
        return self._check(probs, degenerate)


@dataclass(frozen=True)
class LocalDegree(ActivationSchedule):
    """Fully local rule p_u = alpha / degree(u)."""

    alpha: float
    window: Optional[tuple[float, float]] = None
    kind: ClassVar[str] = "local_degree"

    def theorem_window(self):
        return tuple(self.window) if self.window else (self.alpha, self.alpha)

    def probabilities(self, instance, config, unstable=None):
        gr = instance.graph
        degenerate = gr.degree == 0
        probs = np.zeros(gr.node_count)
        probs[~degenerate] = float(self.alpha) / gr.degree[~degenerate]
        return self._check(probs, degenerate)


@dataclass(frozen=True)
class Adaptive(ActivationSchedule):
    """p_u = alpha / (d_u + 1) with d_u the node's conflicting unstable neighbors.

    Only defined on instances where every node has two strategies, so that
    a conflicting edge (differing colors) is meaningful.
    """

    alpha: float
    window: Optional[tuple[float, float]] = None
    kind: ClassVar[str] = "adaptive"

    def theorem_window(self):
        return tuple(self.window) if self.window else (self.alpha, self.alpha)

    def probabilities(self, instance, config, unstable=None):
        if not instance.two_strategy:
            raise ScheduleError("adaptive schedule needs a two-strategy instance")
        c = np.asarray(config, dtype=np.int64)
        if unstable is None:
            unstable = unstable_set(instance, c)
        gr = instance.graph
        n = gr.node_count
        is_unstable = np.zeros(n, dtype=bool)
        is_unstable[unstable] = True
        d = np.zeros(n, dtype=np.int64)
        if gr.edge_count:
            eu, ev = gr.edge_u, gr.edge_v
            conflict = c[eu] != c[ev]
            d += np.bincount(eu[conflict & is_unstable[ev]], minlength=n)
            d += np.bincount(ev[conflict & is_unstable[eu]], minlength=n)
        probs = float(self.alpha) / (d + 1.0)
        return self._check(probs, np.zeros(n, dtype=bool))


@dataclass(frozen=True)
class PotentialWeighted(ActivationSchedule):
    """p_u = alpha / delta_P (the instance's weighted maximum degree)."""

    alpha: float
    window: Optional[tuple[float, float]] = None
    kind: ClassVar[str] = "potential_weighted"

    def theorem_window(self):
        return tuple(self.window) if self.window else (self.alpha, self.alpha)

    def probabilities(self, instance, config, unstable=None):
        value = float(self.alpha) / instance.delta_P if instance.delta_P > 0 else 0.0
        probs = np.full(instance.node_count, value)
        degenerate = instance.graph.degree == 0
        return self._check(probs, degenerate)


def probabilities(schedule: ActivationSchedule, instance, config, unstable=None) -> np.ndarray:
    """Per-node activation probabilities for the given state."""
    return schedule.probabilities(instance, config, unstable=unstable)


# ----------------------------------------------------------------------
# Responses
# ----------------------------------------------------------------------


def respond(instance, config, u, mode=RESPONSE_BEST, rng=None) -> int:
    """Apply a response rule for node u against the given configuration."""
    if mode == RESPONSE_BEST:
        gains = response_gains(instance, config, u)
        top = int(gains.max())
        if top <= 0:
            return int(config[u])
        return int(np.flatnonzero(gains == top)[0])
    if mode == RESPONSE_BETTER_LOWEST:
        gains = response_gains(instance, config, u)
        improving = np.flatnonzero(gains >= 1)
        return int(improving[0]) if improving.size else int(config[u])
    if mode == RESPONSE_BETTER_UNIFORM:
        gains = response_gains(instance, config, u)
        improving = np.flatnonzero(gains >= 1)
        if improving.size == 0:
            return int(config[u])
        if rng is None:
            raise ValueError("better_uniform responses need an rng")
        return int(improving[rng.integers(improving.size)])
    raise ValueError(f"unknown response mode {mode!r}")


def better_response_mode(instance, mode):
    """Return a response rule(config, u, rng=None) for the named mode.

    On two-strategy instances all three modes coincide, since flipping is
    the only alternative strategy.
    """
    if mode not in _RESPONSE_MODES:
        raise ValueError(f"unknown response mode {mode!r}")

    def rule(config, u, rng=None):
        return respond(instance, config, u, mode=mode, rng=rng)

    return rule


# ----------------------------------------------------------------------
# Step and run
# ----------------------------------------------------------------------


@dataclass
class StepReport:
    """One step's bookkeeping; ``probabilities`` aligns with ``unstable``."""

    unstable: np.ndarray
    probabilities: np.ndarray
    activated: np.ndarray
    potential_delta: int


@dataclass
class RunResult:
    converged: bool
    steps: int
    initial_potential: int
    initial_conflicts: Optional[int]
    seed: Optional[int]
    final_config: np.ndarray
    potential_trace: Optional[list[int]] = field(default=None)


def _apply_moves(instance, config, moves: dict[int, int]):
    """Apply simultaneous moves; return (new config, potential change)."""
    if not moves:
        return config, 0
    new = config.copy()
    for u, s in moves.items():
        new[u] = s
    delta = 0
    for u in moves:
        for v, table, is_row in instance.incident[u]:
            if v in moves and v < u:
                continue  # edge already counted from v's side
            if is_row:
                delta += int(table[new[u], new[v]]) - int(table[config[u], config[v]])
            else:
                delta += int(table[new[v], new[u]]) - int(table[config[v], config[u]])
    return new, delta


def step(instance, config, schedule, rng, mode=RESPONSE_BEST):
    """One simultaneous update; returns (new configuration, StepReport)."""
    c = validate_configuration(instance, config)
    unstable = unstable_set(instance, c)
    probs_full = schedule.probabilities(instance, c, unstable=unstable)
    probs = probs_full[unstable]
    if unstable.size:
        draws = rng.random(unstable.size)
        activated = unstable[draws < probs]
    else:
        activated = unstable
    if instance.uniform_table is not None:
        moves = {int(u): 1 - int(c[u]) for u in activated}
    else:
        moves = {int(u): respond(instance, c, int(u), mode=mode, rng=rng) for u in activated}
    new, delta = _apply_moves(instance, c, moves)
    return new, StepReport(
        unstable=unstable,
        probabilities=probs,
        activated=np.asarray(sorted(moves), dtype=np.int64),
        potential_delta=delta,
    )


def run(
    instance,
    init,
    schedule,
    seed: Optional[int] = None,
    max_steps: int = 10**6,
    trace: bool = False,
    mode: str = RESPONSE_BEST,
) -> RunResult:
    """Iterate steps until no node is unstable or max_steps is reached.

    A run hitting the step cap is reported with ``converged=False``, never
    raised: the oscillation experiments rely on non-convergence.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    config = validate_configuration(instance, init).copy()
    rng = np.random.default_rng(seed)
    pot = total_potential(instance, config)
    result = RunResult(
        converged=False,
        steps=0,
        initial_potential=pot,
        initial_conflicts=conflict_count(instance, config),
        seed=seed,
        final_config=config,
        potential_trace=[pot] if trace else None,
    )
    fast = instance.uniform_table is not None
    steps = 0
    while True:
        unstable = unstable_set(instance, config)
        if unstable.size == 0:
            result.converged = True
            break
        if steps >= max_steps:
            break
        probs = schedule.probabilities(instance, config, unstable=unstable)[unstable]
        draws = rng.random(unstable.size)
        activated = unstable[draws < probs]
        if fast:
            moves = {int(u): 1 - int(config[u]) for u in activated}
        else:
            moves = {
                int(u): respond(instance, config, int(u), mode=mode, rng=rng)
                for u in activated
            }
        new, delta = _apply_moves(instance, config, moves)
        if trace:
            if len(moves) == 1:
                ((u, s),) = moves.items()
                gain = payoff_gain(instance, config, u, s)
                assert delta == -gain, "single-mover potential law violated"
            result.potential_trace.append(pot + delta)
        pot += delta
        config = new
        steps += 1
    result.steps = steps
    result.final_config = config
    return result


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Stable 63-bit per-trial seed hashed from (master_seed, trial_index)."""
    digest = hashlib.sha256(f"{master_seed}:{trial_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
