"""Joint transmit beamforming and movable-antenna placement for ISAC.

The package optimizes a weighted sum of multi-user rate and radar mutual
information over a beamforming matrix and the positions of a linear
movable-antenna array, plus two baselines and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BisectionError,
    ConvergenceError,
    FlexbeamError,
    InfeasibleGridError,
    InfeasibleRegionError,
    UnsupportedSizeError,
)
from .fp_core import AuxiliaryState, BisectionConfig, QuadraticForm  # noqa: E402
from .metrics import MetricsReport, Weights  # noqa: E402
from .model import ArrayGeometry, PathCluster, Scenario, ScenarioParams, generate_scenario  # noqa: E402
from .position_opt import PositionOptConfig, ProjectionResult  # noqa: E402
from .solver import Algorithm, SolveResult, SolverConfig, SolverError, solve  # noqa: E402

__all__ = [
    "Algorithm",
    "ArrayGeometry",
    "AuxiliaryState",
    "BisectionConfig",
    "BisectionError",
    "ConvergenceError",
    "FlexbeamError",
    "InfeasibleGridError",
    "InfeasibleRegionError",
    "MetricsReport",
    "PathCluster",
    "PositionOptConfig",
    "ProjectionResult",
    "QuadraticForm",
    "Scenario",
    "ScenarioParams",
    "SolveResult",
    "SolverConfig",
    "SolverError",
    "UnsupportedSizeError",
    "Weights",
    "generate_scenario",
    "solve",
]
