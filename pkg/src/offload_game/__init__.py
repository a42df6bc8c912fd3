"""Capacity offload game: utilities, Nash equilibria and best-response dynamics."""

from .dynamics import (DynamicsTrace, ambrd_step, detect_cycle, run_ambrd,
                       run_smbrd, smbrd_step, two_player_subsequences)
from .equilibrium import (LinearBestResponseSystem, NEKind, TwoPlayerClass,
                          brute_force_ne, build_linear_system,
                          classify_two_player, gershgorin_bound,
                          mixed_strategy_dominance_gap, solve_linear_ne,
                          verify_ne, weak_interference_holds)
from .errors import (ComparisonError, InsufficientHistoryError,
                     OracleBudgetError, RegimeError, UnsupportedDimensionError,
                     ValidationError)
from .experiment import (Dynamic, ExperimentResult, Scenario, catalog,
                         compare_speed, monte_carlo)
from .game import (NetworkConfig, PlayerView, best_response, interference,
                   player_view, sir, unconstrained_response, utility,
                   utility_derivative)

__version__ = "0.1.0"
