"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NoEndemicEquilibrium(DomainError):
    """The endemic equilibrium does not exist (impacted level not positive)."""

    def __init__(self, i_star: float):
        self.i_star = i_star
        super().__init__(
            f"no endemic equilibrium: computed I* = {i_star!r} is not positive"
        )


class BoundInapplicable(DomainError):
    """A positivity bound's denominator is not positive."""


class DivergedError(RuntimeError):
    """An integrator produced a non-finite state."""

    def __init__(self, node: int, trajectory=None):
        self.node = node
        self.trajectory = trajectory
        super().__init__(f"integration diverged at node {node}")


class ConfigError(ValueError):
    """A scenario configuration violates its schema."""
