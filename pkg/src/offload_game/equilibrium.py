"""Nash equilibria: verification, two-player classification, the linear
(weak interference) regime, and a brute-force grid oracle."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import (OracleBudgetError, RegimeError, SingularSystemError,
                     UnsupportedDimensionError, ValidationError)
from .game import (NetworkConfig, best_response_all, check_profile, utility,
                   _check_player)

DEFAULT_THRESHOLD_RTOL = 1e-12
DEFAULT_MAX_CELLS = 20_000_000


class NEKind(str, enum.Enum):
    UNIQUE_INTERIOR = "UNIQUE_INTERIOR"
    UNIQUE_BOUNDARY_P1_SATURATES = "UNIQUE_BOUNDARY_P1_SATURATES"
    UNIQUE_BOUNDARY_P2_SATURATES = "UNIQUE_BOUNDARY_P2_SATURATES"
    THREE = "THREE"
    TWO_SINGULAR = "TWO_SINGULAR"
    INFINITE_SEGMENT = "INFINITE_SEGMENT"


@dataclass(frozen=True)
class TwoPlayerClass:
    """Equilibrium structure of a two-player game.

    ``equilibria`` is empty for ``INFINITE_SEGMENT``; ``segment`` then holds
    the two endpoints of the segment of equilibria, ``(f1(1), 1)`` and
    ``(1, f2(1))``.
    """

    kind: NEKind
    equilibria: list[np.ndarray]
    segment: tuple[np.ndarray, np.ndarray] | None = None
    # Signed comparisons of each cross-gain ratio with its threshold (-1, 0, +1).
    comparisons: tuple[int, int] = (0, 0)

    @property
    def count(self) -> float:
        return math.inf if self.kind is NEKind.INFINITE_SEGMENT else len(self.equilibria)


@dataclass(frozen=True)
class LinearBestResponseSystem:
    """Unclamped best responses written as ``x = A x + b``."""

    a_matrix: np.ndarray
    b_vector: np.ndarray

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.max(np.abs(x - self.a_matrix @ x - self.b_vector)))


def ne_residual(config: NetworkConfig, profile) -> float:
    """``max_k |x_k - BR_k(x_{-k})|``."""
    x = check_profile(config, profile)
    return float(np.max(np.abs(x - best_response_all(config, x))))


def verify_ne(config: NetworkConfig, profile, tol: float) -> bool:
    """True iff ``profile`` is a fixed point of the best-response map within ``tol``.

    Because each utility is strictly concave in the player's own strategy, this
    is equivalent to no player having a profitable unilateral deviation.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be > 0, got {tol!r}")
    return ne_residual(config, profile) <= tol


def _compare(value: float, threshold: float, rtol: float) -> int:
    if abs(value - threshold) <= rtol * max(abs(value), abs(threshold)):
        return 0
    return 1 if value > threshold else -1


def two_player_thresholds(config: NetworkConfig) -> tuple[tuple[float, float], tuple[float, float]]:
    """Return ``((c12/c22, T1), (c21/c11, T2))``.

    ``c12/c22`` is the cross-gain ratio seen by player 2 (index 1) and ``T1 =
    (P2/P1)(alpha + beta1)/beta2`` the value above which player 2 retreats
    from the shared band when player 1 uses its zero-interference response.
    """
    if config.num_players != 2:
        raise UnsupportedDimensionError(
            f"two-player analysis needs K = 2, got K = {config.num_players}")
    a, (b1, b2), (p1, p2), g = config.alpha, config.beta, config.power, config.gain
    ratio_to_2 = g[1, 0] / g[1, 1]
    ratio_to_1 = g[0, 1] / g[0, 0]
    thr_2 = (p2 / p1) * (a + b1) / b2
    thr_1 = (p1 / p2) * (a + b2) / b1
    return (float(ratio_to_2), float(thr_2)), (float(ratio_to_1), float(thr_1))


def classify_two_player(config: NetworkConfig, rtol: float = DEFAULT_THRESHOLD_RTOL) -> TwoPlayerClass:
    """Classify the Nash equilibria of a two-player game and list them all.

    Ties with a threshold (within relative tolerance ``rtol``) resolve to the
    singular subcases: one tie with the other ratio above its threshold gives
    two equilibria, two ties give a segment.  For ``THREE`` the interior
    equilibrium comes first, then ``(f1(1), 1)``, then ``(1, f2(1))``.
    """
    (r2, t2), (r1, t1) = two_player_thresholds(config)
    c_first = _compare(r2, t2, rtol)
    c_second = _compare(r1, t1, rtol)
    s1, s2 = config.private_share
    p2_out = np.array([s1, 1.0])
    p1_out = np.array([1.0, s2])
    comparisons = (c_first, c_second)

    if c_first == 0 and c_second == 0:
        return TwoPlayerClass(NEKind.INFINITE_SEGMENT, [], (p2_out, p1_out), comparisons)
    if c_first < 0 and c_second < 0:
        return TwoPlayerClass(NEKind.UNIQUE_INTERIOR, [_solve_unclamped(config)],
                              comparisons=comparisons)
    if c_second < 0:
        return TwoPlayerClass(NEKind.UNIQUE_BOUNDARY_P2_SATURATES, [p2_out],
                              comparisons=comparisons)
    if c_first < 0:
        return TwoPlayerClass(NEKind.UNIQUE_BOUNDARY_P1_SATURATES, [p1_out],
                              comparisons=comparisons)
    if c_first > 0 and c_second > 0:
        return TwoPlayerClass(NEKind.THREE, [_solve_unclamped(config), p2_out, p1_out],
                              comparisons=comparisons)
    return TwoPlayerClass(NEKind.TWO_SINGULAR, [p2_out, p1_out], comparisons=comparisons)


def weak_interference_holds(config: NetworkConfig) -> np.ndarray:
    """Per-player test of ``sum_{j != k} P_j c_jk < (alpha / beta_k) P_k c_kk``.

    When it holds for every player, no best response ever saturates at 1.
    """
    total_cross = config.cross.sum(axis=1)
    return total_cross < (config.alpha / config.beta) * config.signal


def build_linear_system(config: NetworkConfig) -> LinearBestResponseSystem:
    share = config.private_share
    a_matrix = -share[:, None] * config.cross / config.signal[:, None]
    b_vector = share * (1.0 + config.cross.sum(axis=1) / config.signal)
    a_matrix.setflags(write=False)
    b_vector.setflags(write=False)
    return LinearBestResponseSystem(a_matrix, b_vector)


def gershgorin_bound(system: LinearBestResponseSystem) -> float:
    """Largest absolute row sum of ``A``; bounds every eigenvalue modulus."""
    a = np.asarray(system.a_matrix)
    off = np.abs(a) - np.diag(np.abs(np.diag(a)))
    return float(off.sum(axis=1).max()) if a.size else 0.0


def _solve_unclamped(config: NetworkConfig) -> np.ndarray:
    system = build_linear_system(config)
    K = config.num_players
    try:
        x = np.linalg.solve(np.eye(K) - system.a_matrix, system.b_vector)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"I - A is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("I - A is numerically singular")
    return x


def solve_linear_ne(config: NetworkConfig) -> np.ndarray:
    """Unique equilibrium ``(I - A)^{-1} b`` under weak interference.

    Raises :class:`RegimeError` if some player violates the weak
    interference condition; callers should then fall back to the dynamics or
    the grid oracle.
    """
    weak = weak_interference_holds(config)
    if not weak.all():
        bad = [int(k) for k in np.flatnonzero(~weak)]
        raise RegimeError(f"weak interference condition fails for players {bad}")
    x = _solve_unclamped(config)
    if not np.all((x > 0.0) & (x < 1.0)):
        raise SingularSystemError(f"linear solution {x.tolist()} left the open unit box")
    return x


@dataclass
class OracleResult:
    """Output of :func:`oracle_scan`."""

    grid: np.ndarray
    hit_tol: float
    clusters: list[np.ndarray] = field(default_factory=list)
    representatives: list[np.ndarray] = field(default_factory=list)


def _lipschitz_bound(config: NetworkConfig) -> float:
    return float(np.max(config.private_share * config.cross.sum(axis=1) / config.signal))


def oracle_scan(config: NetworkConfig, resolution: float,
                max_cells: int = DEFAULT_MAX_CELLS) -> OracleResult:
    """Scan the strategy grid for approximate fixed points of the best-response map.

    A grid point is a hit when ``max_k |x_k - BR_k(x_{-k})| <= 2 * resolution``.
    If some best response has Lipschitz constant ``L > 3`` the tolerance is
    widened to ``(1 + L) / 2 * resolution`` so the grid point nearest to any
    equilibrium is still guaranteed to be a hit.  Hits are grouped into
    clusters of Chebyshev-adjacent grid points; each cluster is represented
    by its smallest-residual point.
    """
    if not resolution > 0:
        raise ValidationError(f"resolution must be > 0, got {resolution!r}")
    K = config.num_players
    n = int(math.ceil(1.0 / resolution - 1e-9)) + 1
    cells = n ** K
    if cells > max_cells:
        raise OracleBudgetError(
            f"grid of {n}^{K} = {cells} cells exceeds the budget of {max_cells}; "
            f"use a coarser resolution (at least {max_cells ** (-1.0 / K):.3g})")
    grid = np.linspace(0.0, 1.0, n)
    hit_tol = resolution * max(2.0, 0.5 * (1.0 + _lipschitz_bound(config)))

    share, signal, cross = config.private_share, config.signal, config.cross
    shapes = [tuple(n if j == i else 1 for j in range(K)) for i in range(K)]
    slack = [(1.0 - grid).reshape(s) for s in shapes]
    coords = [grid.reshape(s) for s in shapes]
    residual = np.zeros((n,) * K)
    for k in range(K):
        interf = sum(cross[k, j] * slack[j] for j in range(K) if j != k and cross[k, j] != 0.0)
        br = np.minimum(share[k] * (1.0 + interf / signal[k]), 1.0)
        np.maximum(residual, np.abs(coords[k] - br), out=residual)

    hits = residual <= hit_tol
    labels, count = ndimage.label(hits, structure=np.ones((3,) * K, dtype=bool))
    result = OracleResult(grid=grid, hit_tol=hit_tol)
    if count == 0:
        return result
    flat_labels = labels.ravel()
    flat_res = residual.ravel()
    hit_idx = np.flatnonzero(flat_labels)
    order = np.argsort(flat_labels[hit_idx], kind="stable")
    hit_idx = hit_idx[order]
    bounds = np.searchsorted(flat_labels[hit_idx], np.arange(1, count + 2))
    for c in range(count):
        members = hit_idx[bounds[c]:bounds[c + 1]]
        pts = grid[np.stack(np.unravel_index(members, labels.shape), axis=1)]
        result.clusters.append(pts)
        result.representatives.append(pts[int(np.argmin(flat_res[members]))])
    return result


def brute_force_ne(config: NetworkConfig, resolution: float,
                   max_cells: int = DEFAULT_MAX_CELLS) -> list[np.ndarray]:
    """One representative profile per cluster of approximate equilibria on the grid."""
    return oracle_scan(config, resolution, max_cells).representatives


def mixed_strategy_dominance_gap(config: NetworkConfig, k: int,
                                 support: Sequence[tuple[float, float]],
                                 opponents) -> float:
    """How much player ``k`` loses by randomizing instead of playing the mean.

    ``support`` is a finite list of ``(x_value, probability)`` pairs and
    ``opponents`` a full profile whose entry ``k`` is ignored.  By strict
    concavity the gap is positive for any support with nonzero variance.
    """
    k = _check_player(config, k)
    x = check_profile(config, opponents).copy()
    if len(support) == 0:
        raise ValidationError("support must not be empty")
    values = np.array([v for v, _ in support], dtype=float)
    probs = np.array([p for _, p in support], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValidationError("probabilities must be nonnegative and sum to 1")
    if np.any((values < 0) | (values > 1)):
        raise ValidationError("support values must lie in [0, 1]")

    def u_at(v: float) -> float:
        x[k] = v
        return utility(config, x, k)

    mean = float(np.clip(probs @ values, 0.0, 1.0))
    expected = math.fsum(p * u_at(v) for v, p in zip(values, probs))
    return u_at(mean) - expected
