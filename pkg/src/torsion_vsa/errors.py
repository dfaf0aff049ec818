"""Exception hierarchy shared by the model, solver and simulator."""


class VsaError(Exception):
    """Base class for all package errors."""


class DomainError(VsaError, ValueError):
    """An argument lies outside the domain of a model function."""


class LimitError(VsaError, ValueError):
    """A spring span left its mechanical range (bottom-out or slack spring)."""


class EmptyRangeError(VsaError):
    """A scan never crossed its threshold."""


class NoRootError(VsaError):
    """No equilibrium exists inside the admissible deflection interval."""


class AmbiguousRootError(VsaError):
    """Several equilibria exist; all of them are carried in ``roots``."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = tuple(roots)


class InfeasibleError(VsaError):
    """The landing solver found no pretension meeting its acceptance bounds."""


class SimulationError(VsaError):
    """Base for failures raised while integrating; carries the partial trace."""

    def __init__(self, message, t=None, trace=None):
        super().__init__(message if t is None else f"{message} (t={t:.6f} s)")
        self.t = t
        self.trace = trace


class InstabilityError(SimulationError):
    """Joint velocity exceeded its bound; usually dt is too large."""


class BottomOutError(SimulationError):
    """The leg hit a deflection or kinematic limit."""


class ConfigError(VsaError, ValueError):
    """A run configuration failed to parse or validate."""
