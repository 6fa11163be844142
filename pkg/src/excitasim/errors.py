"""Exception hierarchy shared by the simulation modules."""


class ExcitasimError(Exception):
    """Base class for all package errors."""


class SingularNetwork(ExcitasimError):
    """The stator/network algebraic system has (near) zero determinant."""


class DegenerateOwnAdmittance(ExcitasimError):
    """G1^2 + B1^2 is too small to invert the network relations."""


class NoConvergence(ExcitasimError):
    """Newton iteration for the operating point did not converge."""


class SingularJacobian(ExcitasimError):
    """Newton Jacobian cannot be solved."""


class ZeroActivation(ExcitasimError):
    """No rule fired, so the singleton average is undefined."""


class SimulationError(ExcitasimError):
    """Base for failures raised while integrating a scenario."""


class LossOfSynchronism(SimulationError):
    """Rotor angle left the (-pi, pi) band."""


class Unstable(SimulationError):
    """A state grew beyond the divergence bound."""


class EmptyWindow(ExcitasimError):
    """A metrics window selected no samples."""


class ConfigError(ExcitasimError, ValueError):
    """Configuration failed validation."""


class ParseError(ConfigError):
    """Configuration file is not valid JSON."""
