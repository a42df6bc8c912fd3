"""Independent oracles and random-instance generators used across the test suite.

Nothing here calls into the library's formulas: utilities are re-derived
from the rate expression with explicit (transmitter, receiver) indexing.
"""

import math

import numpy as np

from offload_game.game import NetworkConfig


def direct_utility(alpha, beta, power, c, n0, x, k):
    """Rate of player k, with c[(j, k)] = gain from transmitter j to receiver k."""
    K = len(x)
    interf = sum((1 - x[j]) * power[j] * c[(j, k)] for j in range(K) if j != k)
    shared = alpha * math.log2(1 + (1 - x[k]) * power[k] * c[(k, k)] / (n0 * alpha + interf))
    private = beta[k] * math.log2(1 + x[k] * power[k] * c[(k, k)] / (n0 * beta[k]))
    return shared + private


def gains_as_pairs(config):
    """Translate the receiver-major matrix to the (transmitter, receiver) mapping."""
    K = config.num_players
    return {(j, k): float(config.gain[k, j]) for j in range(K) for k in range(K)}


def random_config(rng, K, *, cross_max=2.0, zero_cross=False):
    """Moderately conditioned random game (signal-to-noise ratios at most a few hundred)."""
    alpha = rng.uniform(0.2, 0.7)
    w = rng.uniform(0.5, 1.5, size=K)
    beta = (1 - alpha) * w / w.sum()
    power = rng.uniform(0.5, 2.0, size=K)
    gain = rng.uniform(0.0, cross_max, size=(K, K))
    if zero_cross:
        gain[:] = 0.0
    np.fill_diagonal(gain, rng.uniform(0.5, 2.0, size=K))
    n0 = rng.uniform(0.1, 1.0)
    return NetworkConfig(alpha=alpha, beta=beta, power=power, gain=gain,
                         noise_density=n0, normalize=True)


def two_player_from_multipliers(rng, m_first, m_second):
    """Random 2-player game whose cross-gain ratios are the given multiples of their thresholds.

    ``m_first`` scales c12/c22 against (P2/P1)(alpha+beta1)/beta2 and
    ``m_second`` scales c21/c11 against (P1/P2)(alpha+beta2)/beta1.
    """
    alpha = rng.uniform(0.4, 0.6)
    f = rng.uniform(0.4, 0.6)
    beta = np.array([f, 1 - f]) * (1 - alpha)
    power = rng.uniform(0.5, 2.0, size=2)
    d = rng.uniform(0.5, 2.0, size=2)
    t_first = (power[1] / power[0]) * (alpha + beta[0]) / beta[1]
    t_second = (power[0] / power[1]) * (alpha + beta[1]) / beta[0]
    gain = np.array([[d[0], m_second * t_second * d[0]],
                     [m_first * t_first * d[1], d[1]]])
    return NetworkConfig(alpha=alpha, beta=beta, power=power, gain=gain,
                         noise_density=rng.uniform(0.005, 0.05), normalize=True)


def sample_multiplier(rng):
    """A threshold multiplier bounded away from 1 so grid clusters stay resolvable."""
    if rng.random() < 0.5:
        return rng.uniform(0.1, 0.85)
    return rng.uniform(1.15, 2.0)
