"""Exception hierarchy. The CLI maps these onto exit codes."""


class KchError(Exception):
    """Base class for all package errors."""


class ConfigError(KchError):
    """Bad or missing configuration (exit code 2)."""


class CompatibilityError(KchError):
    """Initial data violates a start-up compatibility condition (exit code 3)."""


class NumericsError(KchError):
    """Base for runtime numerical failures (exit code 4)."""


class NondegeneracyError(NumericsError):
    """The vertical stretch of the domain map dropped below its floor."""

    def __init__(self, value, node, c_min):
        self.value = value
        self.node = node
        self.c_min = c_min
        super().__init__(
            f"map nondegeneracy violated: d(psi)/dx3 = {value:.6g} <= {c_min} "
            f"at node {node}"
        )


class SmallnessError(NumericsError):
    """A coefficient deviation left the perturbative regime a solver assumes."""


class ConvergenceError(NumericsError):
    """An iterative solver failed to reach its tolerance."""


class CFLError(NumericsError):
    """Advective transport is too fast for the requested time step."""

    def __init__(self, rate, dt, cfl_max):
        self.suggested_dt = cfl_max / rate if rate > 0 else dt
        super().__init__(
            f"CFL violation: speed*dt/spacing = {rate * dt:.3g} > {cfl_max}; "
            f"reduce dt to <= {self.suggested_dt:.3g}"
        )
