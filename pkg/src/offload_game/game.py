"""Domain types and per-player functions of the capacity offload game.

Each of the ``K`` providers splits its power budget between a private,
interference-free band (fraction ``x[k]``) and a shared band in which every
provider interferes with every other one.  All quantities are normalized:
rates are in bits/Hz of total bandwidth, gains are already divided by the
bandwidth.

Gain matrix orientation: ``gain[k, j]`` is the gain from transmitter ``j`` to
receiver ``k`` (row = receiver, column = transmitter).

Player indices are zero-based everywhere in the library.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ValidationError

BANDWIDTH_SUM_TOL = 1e-9
LOG2E = 1.0 / math.log(2.0)

StrategyProfile = np.ndarray
"""A strategy profile is a length-K float array with entries in [0, 1]."""


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def config_violations(alpha, beta, power, gain, noise_density, num_players=None) -> list[str]:
    """Return every invariant violated by the given raw parameters.

    An empty list means the parameters describe a valid game.  Used both by
    :class:`NetworkConfig` and by the scenario-file validator, which wants
    the complete list rather than the first failure.
    """
    problems: list[str] = []
    beta = np.asarray(beta, dtype=float)
    power = np.asarray(power, dtype=float)
    gain = np.asarray(gain, dtype=float)
    if num_players is not None:
        K = num_players
    else:
        K = gain.shape[0] if gain.ndim == 2 else len(beta)

    if not isinstance(K, (int, np.integer)) or K < 1:
        problems.append(f"num_players: must be a positive integer, got {K!r}")
        return problems
    if beta.ndim != 1 or beta.shape[0] != K:
        problems.append(f"beta: expected {K} entries, got shape {beta.shape}")
    if power.ndim != 1 or power.shape[0] != K:
        problems.append(f"power: expected {K} entries, got shape {power.shape}")
    if gain.shape != (K, K):
        problems.append(f"gain: expected a {K}x{K} matrix, got shape {gain.shape}")
    if problems:
        return problems

    values = np.concatenate([[alpha, noise_density], beta, power, gain.ravel()])
    if not np.all(np.isfinite(values)):
        problems.append("non-finite value among the parameters")
        return problems

    if not alpha > 0:
        problems.append(f"alpha: must be > 0, got {alpha!r}")
    for k in np.flatnonzero(~(beta > 0)):
        problems.append(f"beta[{k}]: must be > 0, got {beta[k]!r}")
    for k in np.flatnonzero(~(power > 0)):
        problems.append(f"power[{k}]: must be > 0, got {power[k]!r}")
    for k in range(K):
        if not gain[k, k] > 0:
            problems.append(f"gain[{k}][{k}]: direct gain must be > 0, got {gain[k, k]!r}")
    for k, j in zip(*np.nonzero(gain < 0)):
        if k != j:
            problems.append(f"gain[{k}][{j}]: must be >= 0, got {gain[k, j]!r}")
    if not noise_density > 0:
        problems.append(f"noise_density: must be > 0, got {noise_density!r}")

    total = float(alpha + beta.sum())
    if abs(total - 1.0) > BANDWIDTH_SUM_TOL:
        problems.append(
            f"alpha + sum(beta) = {total!r} deviates from 1 by {total - 1.0:.3g} "
            f"(bandwidth fractions must partition the total bandwidth)"
        )
    return problems


@dataclass(frozen=True, eq=False)
class NetworkConfig:
    """All parameters of a capacity offload game.

    Parameters
    ----------
    alpha : float
        Shared-band fraction of the total bandwidth.
    beta : sequence of float
        Private-band fraction of each provider.
    power : sequence of float
        Power budget of each provider.
    gain : (K, K) array_like
        ``gain[k, j]`` is the normalized gain from transmitter ``j`` to
        receiver ``k``.
    noise_density : float
        Noise power spectral density.
    normalize : bool, optional
        Rescale ``alpha`` and ``beta`` so that they sum to one before
        validation.
    """

    alpha: float
    beta: np.ndarray
    power: np.ndarray
    gain: np.ndarray
    noise_density: float
    normalize: InitVar[bool] = False
    num_players: int = field(init=False)

    def __post_init__(self, normalize: bool) -> None:
        alpha = float(self.alpha)
        beta = np.array(self.beta, dtype=float)
        if normalize:
            total = alpha + beta.sum()
            if not total > 0:
                raise ValidationError("cannot normalize bandwidth fractions summing to <= 0")
            alpha, beta = alpha / total, beta / total
        problems = config_violations(alpha, beta, self.power, self.gain, float(self.noise_density))
        if problems:
            raise ValidationError("invalid network configuration: " + "; ".join(problems))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", _readonly(beta))
        object.__setattr__(self, "power", _readonly(self.power))
        object.__setattr__(self, "gain", _readonly(self.gain))
        object.__setattr__(self, "noise_density", float(self.noise_density))
        object.__setattr__(self, "num_players", int(self.gain.shape[0]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NetworkConfig):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.noise_density == other.noise_density
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.power, other.power)
            and np.array_equal(self.gain, other.gain)
        )

    def __hash__(self) -> int:
        return hash((self.alpha, self.noise_density, self.beta.tobytes(),
                     self.power.tobytes(), self.gain.tobytes()))

    # Derived coefficients, computed once per config.

    @cached_property
    def private_share(self) -> np.ndarray:
        """``beta_k / (alpha + beta_k)``: the best response under zero interference."""
        return _readonly(self.beta / (self.alpha + self.beta))

    @cached_property
    def signal(self) -> np.ndarray:
        """Direct received power at full budget, ``P_k c_kk``."""
        return _readonly(self.power * np.diag(self.gain))

    @cached_property
    def cross(self) -> np.ndarray:
        """``cross[k, j] = P_j c_jk`` for ``j != k``, zero on the diagonal."""
        m = self.gain * self.power[np.newaxis, :]
        np.fill_diagonal(m, 0.0)
        return _readonly(m)


@dataclass(frozen=True)
class PlayerView:
    """What player ``k``'s receiver can measure in the shared band."""

    player: int
    interference: float
    sir: float


def check_profile(config: NetworkConfig, profile) -> np.ndarray:
    """Validate ``profile`` against ``config`` and return it as a float array."""
    x = np.asarray(profile, dtype=float)
    if x.shape != (config.num_players,):
        raise ValidationError(
            f"profile must have shape ({config.num_players},), got {x.shape}"
        )
    if not np.all((x >= 0.0) & (x <= 1.0)):
        raise ValidationError(f"profile entries must lie in [0, 1], got {x.tolist()}")
    return x


def _check_player(config: NetworkConfig, k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise TypeError(f"player index must be an integer, got {k!r}")
    if not 0 <= k < config.num_players:
        raise IndexError(f"player index {k} out of range for {config.num_players} players")
    return int(k)


def _interference_all(config: NetworkConfig, x: np.ndarray) -> np.ndarray:
    return config.cross @ (1.0 - x)


def _unconstrained_all(config: NetworkConfig, x: np.ndarray) -> np.ndarray:
    return config.private_share * (1.0 + _interference_all(config, x) / config.signal)


def best_response_all(config: NetworkConfig, profile) -> np.ndarray:
    """Best responses of all players to the same profile, as one array."""
    x = check_profile(config, profile)
    return np.minimum(_unconstrained_all(config, x), 1.0)


def interference(config: NetworkConfig, profile, k: int) -> float:
    """Aggregate shared-band interference ``sum_{j != k} P_j c_jk (1 - x_j)`` at receiver ``k``."""
    x = check_profile(config, profile)
    k = _check_player(config, k)
    return float(config.cross[k] @ (1.0 - x))


def utility(config: NetworkConfig, profile, k: int) -> float:
    """Achievable rate of player ``k`` in bits/Hz (normalized by total bandwidth)."""
    x = check_profile(config, profile)
    k = _check_player(config, k)
    a, b, n0 = config.alpha, config.beta[k], config.noise_density
    s = config.signal[k]
    i_k = float(config.cross[k] @ (1.0 - x))
    shared = a * math.log2(1.0 + (1.0 - x[k]) * s / (n0 * a + i_k))
    private = b * math.log2(1.0 + x[k] * s / (n0 * b))
    return shared + private


def utility_derivative(config: NetworkConfig, profile, k: int) -> float:
    """Closed-form partial derivative of ``utility`` with respect to ``x[k]``."""
    x = check_profile(config, profile)
    k = _check_player(config, k)
    a, b, n0 = config.alpha, config.beta[k], config.noise_density
    s = config.signal[k]
    i_k = float(config.cross[k] @ (1.0 - x))
    shared_den = n0 * a + i_k + (1.0 - x[k]) * s
    private_den = n0 * b + x[k] * s
    return LOG2E * s * (b / private_den - a / shared_den)


def utility_second_derivative(config: NetworkConfig, profile, k: int) -> float:
    """Second partial derivative of ``utility`` in ``x[k]``; always negative."""
    x = check_profile(config, profile)
    k = _check_player(config, k)
    a, b, n0 = config.alpha, config.beta[k], config.noise_density
    s = config.signal[k]
    i_k = float(config.cross[k] @ (1.0 - x))
    shared_den = n0 * a + i_k + (1.0 - x[k]) * s
    private_den = n0 * b + x[k] * s
    return -LOG2E * s * s * (a / shared_den**2 + b / private_den**2)


def unconstrained_response(config: NetworkConfig, profile, k: int) -> float:
    """Stationary point of ``utility`` in ``x[k]`` before clamping to 1 (may exceed 1)."""
    x = check_profile(config, profile)
    k = _check_player(config, k)
    i_k = float(config.cross[k] @ (1.0 - x))
    return float(config.private_share[k] * (1.0 + i_k / config.signal[k]))


def best_response(config: NetworkConfig, profile, k: int) -> float:
    """Utility-maximizing ``x[k]`` given the other entries of ``profile``.

    Computed from the measured interference, never from the SIR.  The
    result does not depend on ``profile[k]`` and lies in
    ``[beta_k / (alpha + beta_k), 1]``.
    """
    return min(unconstrained_response(config, profile, k), 1.0)


def sir(config: NetworkConfig, profile, k: int) -> float:
    """Shared-band signal-to-interference ratio of player ``k``.

    ``+inf`` whenever the interference is zero, including the 0/0 case
    where player ``k`` itself is silent in the shared band.
    """
    x = check_profile(config, profile)
    k = _check_player(config, k)
    i_k = float(config.cross[k] @ (1.0 - x))
    if i_k == 0.0:
        return math.inf
    return float(config.signal[k] * (1.0 - x[k]) / i_k)


def sir_all(config: NetworkConfig, profile) -> np.ndarray:
    """SIR of every player, same conventions as :func:`sir`."""
    x = check_profile(config, profile)
    i = _interference_all(config, x)
    num = config.signal * (1.0 - x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / i
    out[i == 0.0] = math.inf
    return out


def player_view(config: NetworkConfig, profile, k: int) -> PlayerView:
    return PlayerView(player=_check_player(config, k),
                      interference=interference(config, profile, k),
                      sir=sir(config, profile, k))


def symmetric_config(num_players: int, gain: Sequence[Sequence[float]], *,
                     alpha: float = 0.5, power: float = 1.0,
                     noise_density: float = 1e-2) -> NetworkConfig:
    """Config with the shared band ``alpha`` and equal private bands ``(1 - alpha) / K``."""
    beta = np.full(num_players, (1.0 - alpha) / num_players)
    return NetworkConfig(alpha=alpha, beta=beta, power=np.full(num_players, power),
                         gain=np.asarray(gain, dtype=float), noise_density=noise_density)
