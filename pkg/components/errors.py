"""
SMMSE Toolkit - Error Types
===========================
Exception hierarchy shared by the computational components.
"""

import numpy as np


class SmmseError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(SmmseError, ValueError):
    """Argument outside the domain of a function (e.g. log_gamma at z <= 0)"""


class DimensionMismatchError(SmmseError, ValueError):
    """Vector/matrix shapes do not agree"""


class ConfigError(SmmseError, ValueError):
    """Invalid configuration value"""


class ConstructionError(SmmseError, ValueError):
    """A sensing matrix family cannot be built for the requested shape"""


class SingularityError(SmmseError, np.linalg.LinAlgError):
    """Linear system too ill-conditioned to solve"""

    def __init__(self, message, condition=float('inf')):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class InfeasibleError(SmmseError):
    """Measurement vector is not in the range of the sensing matrix"""


class IterationLimitError(SmmseError):
    """Iterative solver stopped at its iteration limit"""

    def __init__(self, message, iterations, primal_residual, dual_residual):
        super().__init__(
            f"{message} after {iterations} iterations "
            f"(primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e})"
        )
        self.iterations = iterations
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
