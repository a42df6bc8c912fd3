"""Monte Carlo harness and the built-in scenario catalog.

Initial strategies are reproducible per trial: trial ``i`` of a run seeded
with ``seed`` draws ``x0`` as::

    np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, i]))).random(K)

so results do not depend on the order or the process in which trials run.
For AMBRD, steps count individual player updates; for SMBRD they count
simultaneous rounds.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (DEFAULT_MAX_PERIOD, DEFAULT_MAX_STEPS, DEFAULT_TOL,
                       run_ambrd, run_smbrd)
from .equilibrium import NEKind
from .errors import ComparisonError, ValidationError
from .game import NetworkConfig, symmetric_config

# Interference matrices of the 4-player scenarios; entry (k, j) is the gain
# from transmitter j to receiver k.
C1 = ((1.0, 0.2, 0.1, 0.4),
      (0.4, 1.0, 0.5, 0.3),
      (0.3, 0.4, 1.0, 0.6),
      (0.4, 0.2, 0.5, 1.0))
C2 = ((1.0, 0.6, 1.4, 1.6),
      (1.4, 1.0, 0.9, 1.4),
      (2.3, 1.4, 1.0, 2.0),
      (0.9, 0.7, 1.4, 1.0))
C3 = ((1.0, 1.4, 2.0, 0.9),
      (0.4, 1.0, 1.6, 2.1),
      (1.4, 2.2, 1.0, 0.9),
      (1.2, 2.1, 3.0, 1.0))

# (c12/c22, c21/c11) pairs of the 2-player scenarios.
TWO_PLAYER_PAIRS = {
    "2p-unique": ((0.4, 0.6), NEKind.UNIQUE_INTERIOR),
    "2p-two": ((3.0, 4.0), NEKind.TWO_SINGULAR),
    "2p-three": ((3.5, 4.0), NEKind.THREE),
    "2p-infinite": ((3.0, 3.0), NEKind.INFINITE_SEGMENT),
}


class Dynamic(str, enum.Enum):
    SIMULTANEOUS = "SIMULTANEOUS"
    ALTERNATING = "ALTERNATING"

    @classmethod
    def parse(cls, value) -> "Dynamic":
        if isinstance(value, Dynamic):
            return value
        aliases = {"smbrd": cls.SIMULTANEOUS, "simultaneous": cls.SIMULTANEOUS,
                   "ambrd": cls.ALTERNATING, "alternating": cls.ALTERNATING}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValidationError(f"unknown dynamic {value!r}; use smbrd or ambrd") from None


@dataclass(frozen=True)
class Scenario:
    name: str
    config: NetworkConfig
    expected_class: str | None = None
    provenance: str = "USER"
    description: str = ""


def two_player_config(c12: float, c21: float) -> NetworkConfig:
    """Symmetric two-player game with unit direct gains and the given cross gains.

    ``c12`` is the gain from player 1 into player 2's receiver.
    """
    return symmetric_config(2, [[1.0, c21], [c12, 1.0]])


def catalog() -> list[Scenario]:
    """The seven reference scenarios (alpha = 0.5, beta_k = 0.5/K, P_k = 1, n0 = 0.01)."""
    out = []
    for name, ((c12, c21), kind) in TWO_PLAYER_PAIRS.items():
        out.append(Scenario(name, two_player_config(c12, c21), kind.value, "REFERENCE",
                            f"2 players, (c12/c22, c21/c11) = ({c12}, {c21})"))
    for name, matrix, label in (("4p-weak", C1, "weak"), ("4p-medium", C2, "medium"),
                                ("4p-strong", C3, "strong")):
        out.append(Scenario(name, symmetric_config(4, matrix), label, "REFERENCE",
                            f"4 players, {label} interference"))
    return out


def get_scenario(name: str) -> Scenario:
    for scenario in catalog():
        if scenario.name == name:
            return scenario
    names = ", ".join(s.name for s in catalog())
    raise KeyError(f"unknown scenario {name!r}; built-ins are: {names}")


def trial_initial_state(seed: int, trial: int, num_players: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))
    return rng.random(num_players)


@dataclass(frozen=True, eq=False)
class TrialRecord:
    trial: int
    x0: np.ndarray
    outcome: str
    steps: float
    final: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return (self.trial == other.trial and self.outcome == other.outcome
                and self.steps == other.steps and np.array_equal(self.x0, other.x0)
                and np.array_equal(self.final, other.final))

    __hash__ = None


@dataclass
class ExperimentResult:
    scenario: str
    dynamic: Dynamic
    trials: int
    seed: int
    tol: float
    max_steps: int
    records: list[TrialRecord] = field(default_factory=list)

    def _fraction(self, kind: str) -> float:
        return sum(r.outcome == kind for r in self.records) / self.trials

    @property
    def fraction_converged(self) -> float:
        return self._fraction("CONVERGED")

    @property
    def fraction_cycled(self) -> float:
        return self._fraction("CYCLED")

    @property
    def fraction_exhausted(self) -> float:
        return self._fraction("EXHAUSTED")

    @property
    def converged_steps(self) -> np.ndarray:
        return np.array([r.steps for r in self.records if r.outcome == "CONVERGED"])

    @property
    def cdf(self) -> list[tuple[int, float]]:
        """Empirical CDF of steps to convergence over all trials.

        Non-converged trials count as infinitely many steps, so the last
        cumulative value equals ``fraction_converged``.
        """
        steps, counts = np.unique(self.converged_steps, return_counts=True)
        cum = np.cumsum(counts)
        return [(int(s), int(c) / self.trials) for s, c in zip(steps, cum)]

    @property
    def median_steps(self) -> float:
        s = self.converged_steps
        return float(np.median(s)) if s.size else math.nan


def _run_trial(args) -> TrialRecord:
    config, dynamic, seed, trial, tol, max_steps, max_period = args
    x0 = trial_initial_state(seed, trial, config.num_players)
    if dynamic is Dynamic.SIMULTANEOUS:
        trace = run_smbrd(config, x0, tol=tol, max_steps=max_steps, max_period=max_period,
                          memory_cap=True)
    else:
        trace = run_ambrd(config, x0, tol=tol, max_steps=max_steps, max_period=max_period,
                          memory_cap=True)
    return TrialRecord(trial, x0, trace.outcome.kind, trace.steps, trace.final)


def monte_carlo(scenario: Scenario, dynamic, trials: int = 1000, seed: int = 0,
                tol: float = DEFAULT_TOL, max_steps: int = DEFAULT_MAX_STEPS,
                max_period: int = DEFAULT_MAX_PERIOD, workers: int = 1) -> ExperimentResult:
    """Run ``trials`` independent dynamics from uniform random initial strategies.

    ``workers > 1`` spreads trials over processes; the records are identical
    to a sequential run.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials!r}")
    dynamic = Dynamic.parse(dynamic)
    jobs = [(scenario.config, dynamic, seed, i, tol, max_steps, max_period)
            for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        records = [_run_trial(job) for job in jobs]
    records.sort(key=lambda r: r.trial)
    return ExperimentResult(scenario.name, dynamic, trials, seed, tol, max_steps, records)


@dataclass(frozen=True)
class SpeedComparison:
    median_a: float
    median_b: float
    faster: str  # "a", "b" or "tie"
    a_dominates: bool
    b_dominates: bool


def _cdf_at(cdf: list[tuple[int, float]], s: float) -> float:
    value = 0.0
    for step, frac in cdf:
        if step > s:
            break
        value = frac
    return value


def compare_speed(result_a: ExperimentResult, result_b: ExperimentResult) -> SpeedComparison:
    """Compare median steps and check pointwise CDF dominance.

    ``a_dominates`` means the CDF of ``a`` is everywhere at least that of
    ``b``, i.e. ``a`` has converged at least as often by every step count.
    """
    if result_a.scenario != result_b.scenario:
        raise ComparisonError(
            f"cannot compare scenario {result_a.scenario!r} with {result_b.scenario!r}")
    if result_a.trials != result_b.trials:
        raise ComparisonError(f"trial counts differ: {result_a.trials} vs {result_b.trials}")
    ma, mb = result_a.median_steps, result_b.median_steps
    if ma == mb or (math.isnan(ma) and math.isnan(mb)):
        faster = "tie"
    elif math.isnan(mb) or (not math.isnan(ma) and ma < mb):
        faster = "a"
    else:
        faster = "b"
    cdf_a, cdf_b = result_a.cdf, result_b.cdf
    points = sorted({s for s, _ in cdf_a} | {s for s, _ in cdf_b})
    diffs = [_cdf_at(cdf_a, s) - _cdf_at(cdf_b, s) for s in points]
    return SpeedComparison(ma, mb, faster,
                           a_dominates=all(d >= 0 for d in diffs),
                           b_dominates=all(d <= 0 for d in diffs))
