"""Simultaneous-move (SMBRD) and alternating-move (AMBRD) best-response dynamics.

Every update uses the interference form of the best response.  Stopping
rules:

* SMBRD converges at step ``t + 1`` when ``max_k |x_k(t+1) - x_k(t)| <= tol``.
* AMBRD counts individual player updates.  It converges at update ``T >= K``
  when ``max_k |x_k(s) - x_k(s - K)| <= tol`` for every ``s`` in
  ``T - K + 1 .. T``, with ``x(s) = x(0)`` for ``s < 0``.

A run that hits ``max_steps`` without converging is checked for a cycle
(periods 2..max_period) before being declared exhausted.  For AMBRD the
cycle search runs on the states at the end of each full round.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (InsufficientHistoryError, UnsupportedDimensionError,
                     ValidationError)
from .game import (NetworkConfig, _unconstrained_all, check_profile, sir_all)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-2
DEFAULT_MAX_STEPS = 100
DEFAULT_MAX_PERIOD = 4


class ScheduleKind(str, enum.Enum):
    SIMULTANEOUS = "SIMULTANEOUS"
    ALTERNATING = "ALTERNATING"


@dataclass(frozen=True)
class Schedule:
    kind: ScheduleKind
    order: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Converged:
    fixed_point: np.ndarray
    steps: int
    kind = "CONVERGED"


@dataclass(frozen=True)
class Cycled:
    period: int
    cycle_states: list[np.ndarray]
    kind = "CYCLED"


@dataclass(frozen=True)
class Exhausted:
    max_steps: int
    kind = "EXHAUSTED"


Outcome = Union[Converged, Cycled, Exhausted]


@dataclass
class DynamicsTrace:
    """States visited by one run of a dynamic.

    ``times[i]`` is the time index of ``states[i]`` and ``updated[i]`` the
    player whose update produced it (``None`` for the initial state and for
    simultaneous steps).  ``times`` has gaps only when the trace was trimmed
    by a memory cap.
    """

    states: list[np.ndarray]
    outcome: Outcome
    schedule: Schedule
    times: list[int] = field(default_factory=list)
    updated: list[int | None] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def steps(self) -> float:
        """Steps to convergence, ``inf`` if the run did not converge."""
        return float(self.outcome.steps) if isinstance(self.outcome, Converged) else float("inf")


def smbrd_step(config: NetworkConfig, profile) -> np.ndarray:
    """Every player best-responds to the same snapshot ``profile``."""
    x = check_profile(config, profile)
    return np.minimum(_unconstrained_all(config, x), 1.0)


def ambrd_step(config: NetworkConfig, profile, k: int) -> np.ndarray:
    """Player ``k`` best-responds to the current profile; the rest stay put."""
    x = check_profile(config, profile)
    if not 0 <= k < config.num_players:
        raise IndexError(f"player index {k} out of range for {config.num_players} players")
    out = x.copy()
    interf = config.cross[k] @ (1.0 - x)
    out[k] = min(config.private_share[k] * (1.0 + interf / config.signal[k]), 1.0)
    return out


def _check_run_args(tol: float, max_steps: int, max_period: int) -> None:
    if not tol > 0:
        raise ValidationError(f"tol must be > 0, got {tol!r}")
    if max_steps < 1:
        raise ValidationError(f"max_steps must be >= 1, got {max_steps!r}")
    if max_period < 2:
        raise ValidationError(f"max_period must be >= 2, got {max_period!r}")


def _log_step(config: NetworkConfig, t: int, x: np.ndarray) -> None:
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("t=%d x=%s sir=%s", t, x.tolist(), sir_all(config, x).tolist())


def detect_cycle(states: Sequence[np.ndarray], max_period: int = DEFAULT_MAX_PERIOD,
                 tol: float = DEFAULT_TOL) -> tuple[int, list[np.ndarray]] | None:
    """Find the smallest period ``p`` in ``2..max_period`` of the trailing states.

    Period ``p`` holds when ``||x(t) - x(t - p)||_inf <= tol`` for every pair
    inside the last ``2p`` states.  A tail that is already constant (period 1)
    is convergence, not a cycle, and yields ``None``.
    """
    n = len(states)
    if n < 2 * max_period:
        raise InsufficientHistoryError(
            f"cycle detection up to period {max_period} needs {2 * max_period} states, got {n}")
    tail = np.asarray(states[n - 2 * max_period:], dtype=float)
    m = len(tail)
    for p in range(1, max_period + 1):
        window = tail[m - 2 * p:]
        if np.max(np.abs(window[p:] - window[:p])) <= tol:
            if p == 1:
                return None
            return p, [np.array(s) for s in states[n - p:]]
    return None


def _finish(states, times, updated, outcome, schedule, memory_cap, max_period):
    if memory_cap and isinstance(outcome, Exhausted):
        keep = 2 * max_period + 1
        if len(states) > keep + 1:
            states = states[:1] + states[-keep:]
            times = times[:1] + times[-keep:]
            updated = updated[:1] + updated[-keep:]
    return DynamicsTrace(states=states, outcome=outcome, schedule=schedule,
                         times=times, updated=updated)


def run_smbrd(config: NetworkConfig, x0, tol: float = DEFAULT_TOL,
              max_steps: int = DEFAULT_MAX_STEPS, max_period: int = DEFAULT_MAX_PERIOD,
              memory_cap: bool = False) -> DynamicsTrace:
    """Iterate simultaneous best responses from ``x0``."""
    _check_run_args(tol, max_steps, max_period)
    x = check_profile(config, x0).copy()
    schedule = Schedule(ScheduleKind.SIMULTANEOUS)
    states, times, updated = [x], [0], [None]
    for t in range(1, max_steps + 1):
        nxt = np.minimum(_unconstrained_all(config, x), 1.0)
        states.append(nxt)
        times.append(t)
        updated.append(None)
        _log_step(config, t, nxt)
        if np.max(np.abs(nxt - x)) <= tol:
            return _finish(states, times, updated, Converged(nxt, t), schedule,
                           memory_cap, max_period)
        x = nxt
    outcome: Outcome = Exhausted(max_steps)
    if len(states) >= 2 * max_period:
        hit = detect_cycle(states, max_period, tol)
        if hit is not None:
            outcome = Cycled(*hit)
    return _finish(states, times, updated, outcome, schedule, memory_cap, max_period)


def _check_order(order, K: int) -> tuple[int, ...]:
    order = tuple(range(K)) if order is None else tuple(int(k) for k in order)
    if sorted(order) != list(range(K)):
        raise ValidationError(f"order must be a permutation of 0..{K - 1}, got {order}")
    return order


def run_ambrd(config: NetworkConfig, x0, order: Sequence[int] | None = None,
              tol: float = DEFAULT_TOL, max_steps: int = DEFAULT_MAX_STEPS,
              max_period: int = DEFAULT_MAX_PERIOD,
              memory_cap: bool = False) -> DynamicsTrace:
    """Players update one at a time, cycling through ``order`` (default ``0..K-1``).

    ``max_steps`` counts individual player updates.
    """
    _check_run_args(tol, max_steps, max_period)
    K = config.num_players
    order = _check_order(order, K)
    x = check_profile(config, x0).copy()
    schedule = Schedule(ScheduleKind.ALTERNATING, order)
    states, times, updated = [x], [0], [None]
    share, signal, cross = config.private_share, config.signal, config.cross
    for t in range(1, max_steps + 1):
        k = order[(t - 1) % K]
        nxt = x.copy()
        nxt[k] = min(share[k] * (1.0 + (cross[k] @ (1.0 - x)) / signal[k]), 1.0)
        states.append(nxt)
        times.append(t)
        updated.append(k)
        _log_step(config, t, nxt)
        x = nxt
        if t >= K:
            recent = np.asarray(states[t - K + 1:t + 1])
            lagged = np.asarray([states[max(s - K, 0)] for s in range(t - K + 1, t + 1)])
            if np.max(np.abs(recent - lagged)) <= tol:
                return _finish(states, times, updated, Converged(nxt, t), schedule,
                               memory_cap, max_period)
    outcome: Outcome = Exhausted(max_steps)
    rounds = states[::K]
    if len(rounds) >= 2 * max_period:
        hit = detect_cycle(rounds, max_period, tol)
        if hit is not None:
            outcome = Cycled(*hit)
    return _finish(states, times, updated, outcome, schedule, memory_cap, max_period)


def ambrd_cycle_map(config: NetworkConfig, order: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Affine map ``x -> M x + c`` of one full AMBRD round in the linear regime.

    ``M`` is the ordered product of the per-player update matrices (identity
    with row ``k`` replaced by row ``k`` of ``A``) and ``c`` collects the
    offsets.  Only meaningful when no best response saturates.
    """
    from .equilibrium import build_linear_system

    K = config.num_players
    order = _check_order(order, K)
    system = build_linear_system(config)
    m = np.eye(K)
    c = np.zeros(K)
    for k in order:
        a_k = np.eye(K)
        a_k[k] = system.a_matrix[k]
        b_k = np.zeros(K)
        b_k[k] = system.b_vector[k]
        m = a_k @ m
        c = a_k @ c + b_k
    return m, c


def two_player_subsequences(trace: DynamicsTrace) -> tuple[np.ndarray, np.ndarray]:
    """Split a two-player SMBRD trace into its two decoupled subsequences.

    Returns arrays of ``(x1, x2)`` pairs: sequence a is
    ``(x1(0), x2(1)), (x1(2), x2(3)), ...`` and is driven by ``x1(0)`` only;
    sequence b is ``(x1(1), x2(0)), (x1(3), x2(2)), ...`` and is driven by
    ``x2(0)`` only.
    """
    if trace.schedule.kind is not ScheduleKind.SIMULTANEOUS:
        raise ValidationError("subsequence decomposition needs a simultaneous-move trace")
    states = np.asarray(trace.states, dtype=float)
    if states.ndim != 2 or states.shape[1] != 2:
        raise UnsupportedDimensionError("subsequence decomposition needs K = 2")
    if trace.times and trace.times != list(range(len(trace.states))):
        raise ValidationError("trace has been trimmed; subsequences need every state")
    n = (len(states) // 2) * 2
    even, odd = states[0:n:2], states[1:n:2]
    seq_a = np.column_stack([even[:, 0], odd[:, 1]])
    seq_b = np.column_stack([odd[:, 0], even[:, 1]])
    return seq_a, seq_b


def subsequence_from_x1(config: NetworkConfig, x1_0: float, length: int) -> np.ndarray:
    """Regenerate sequence a from ``x1(0)`` alone (the other coordinate never enters)."""
    if config.num_players != 2:
        raise UnsupportedDimensionError("subsequences are defined for K = 2")
    share, signal, cross = config.private_share, config.signal, config.cross
    out = np.empty((length, 2))
    x1 = float(x1_0)
    for i in range(length):
        x2 = min(share[1] * (1.0 + cross[1, 0] * (1.0 - x1) / signal[1]), 1.0)
        out[i] = (x1, x2)
        x1 = min(share[0] * (1.0 + cross[0, 1] * (1.0 - x2) / signal[0]), 1.0)
    return out
