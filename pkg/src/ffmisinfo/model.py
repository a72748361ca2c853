"""Seven-compartment harmful-information model: parameters, state, vector field.

Compartments, in storage order::

    S_p  willing to vaccinate but open to harmful criticism
    I    impacted by the harmful information
    I_p  impacted, still positive about vaccination
    I_n  impacted, negative about vaccination
    I_c  impacted and confused
    R    overcame the misinformation
    D    denial of vaccination (or death)

The total ``N`` is always the live sum of the seven compartments, so the
component sum of :func:`rhs` is ``Pi - nu * N``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError

COMPARTMENTS = ("S_p", "I", "I_p", "I_n", "I_c", "R", "D")

# order of the rate vector handed to the compiled kernels
RATE_NAMES = (
    "Pi", "beta", "sigma", "nu",
    "gamma1", "gamma2", "gamma3", "gamma4",
    "tau", "tau1", "tau2", "tau3", "tau4",
    "phi1", "phi2",
)


@dataclass(frozen=True)
class ModelParams:
    """Rate constants plus the fractional order ``alpha`` and fractal dimension ``eta``."""

    Pi: float
    beta: float
    sigma: float
    nu: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    tau: float
    tau1: float
    tau2: float
    tau3: float
    tau4: float
    phi1: float
    phi2: float
    alpha: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise DomainError(f"{f.name} must be a real number, got {v!r}")
            object.__setattr__(self, f.name, float(v))
            if not math.isfinite(v):
                raise DomainError(f"{f.name} must be finite, got {v!r}")
        for name in RATE_NAMES:
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0,1], got {self.alpha!r}")
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0,1], got {self.eta!r}")

    def rates(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in RATE_NAMES], dtype=float)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


class State(NamedTuple):
    s_p: float
    i: float
    i_p: float
    i_n: float
    i_c: float
    r: float
    d: float

    @classmethod
    def from_array(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        if x.shape != (7,):
            raise DomainError(f"a state has 7 components, got shape {x.shape}")
        return cls(*(float(v) for v in x))

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    def admissible(self) -> bool:
        return all(v >= 0 for v in self)


@dataclass(frozen=True)
class DerivedRates:
    """Aggregate exit rates ``j1..j5`` and ``a1 = sigma + nu``."""

    j1: float
    j2: float
    j3: float
    j4: float
    j5: float
    a1: float

    @property
    def lam(self) -> float:
        return self.j1


def derived_rates(p: ModelParams) -> DerivedRates:
    return DerivedRates(
        j1=p.gamma1 + p.gamma2 + p.gamma3 + p.gamma4 + p.tau1 + p.nu,
        j2=p.tau3 + p.nu,
        j3=p.tau2 + p.phi1 + p.nu,
        j4=p.tau4 + p.phi2 + p.nu,
        j5=p.tau + p.nu,
        a1=p.sigma + p.nu,
    )


def _vec(state) -> np.ndarray:
    x = np.asarray(state, dtype=float)
    if x.shape != (7,):
        raise DomainError(f"a state has 7 components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("state contains non-finite values")
    return x


def total_population(state) -> float:
    return float(sum(np.asarray(state, dtype=float)))


def _force(p: ModelParams, s, i, n) -> float:
    # beta*S_p*I/N, defined as 0 on the all-empty state
    return 0.0 if n == 0.0 else p.beta * s * i / n


def rhs(p: ModelParams, state) -> np.ndarray:
    """Time derivative of the seven compartments."""
    s, i, ip, i_n, ic, r, d = _vec(state)
    n = s + i + ip + i_n + ic + r + d
    f = _force(p, s, i, n)
    return np.array([
        p.Pi - f - p.sigma * s - p.nu * s,
        f - p.gamma1 * i - p.gamma2 * i - p.gamma3 * i - p.gamma4 * i - p.tau1 * i - p.nu * i,
        p.gamma1 * i - p.tau3 * ip - p.nu * ip,
        p.gamma2 * i - p.tau2 * i_n - p.phi1 * i_n - p.nu * i_n,
        p.gamma3 * i - p.tau4 * ic - p.phi2 * ic - p.nu * ic,
        p.tau1 * i + p.tau2 * i_n + p.tau3 * ip + p.tau4 * ic - p.tau * r - p.nu * r,
        p.sigma * s + p.phi1 * i_n + p.phi2 * ic + p.gamma4 * i + p.tau * r - p.nu * d,
    ])


def gains_losses(p: ModelParams, state) -> tuple[np.ndarray, np.ndarray]:
    """Split each derivative into inflow and outflow, ``rhs = gains - losses``."""
    s, i, ip, i_n, ic, r, d = _vec(state)
    n = s + i + ip + i_n + ic + r + d
    f = _force(p, s, i, n)
    q = derived_rates(p)
    gains = np.array([
        p.Pi,
        f,
        p.gamma1 * i,
        p.gamma2 * i,
        p.gamma3 * i,
        p.tau1 * i + p.tau2 * i_n + p.tau3 * ip + p.tau4 * ic,
        p.sigma * s + p.phi1 * i_n + p.phi2 * ic + p.gamma4 * i + p.tau * r,
    ])
    losses = np.array([
        f + q.a1 * s, q.j1 * i, q.j2 * ip, q.j3 * i_n, q.j4 * ic, q.j5 * r, p.nu * d,
    ])
    return gains, losses


def jacobian(p: ModelParams, state) -> np.ndarray:
    """Analytic 7x7 Jacobian of :func:`rhs`, with ``N`` depending on every slot."""
    x = _vec(state)
    s, i = x[0], x[1]
    n = float(x.sum())
    if n <= 0:
        raise DomainError("jacobian needs a positive total population")
    q = derived_rates(p)
    # gradient of the force of infection beta*S*I/N
    df = np.full(7, -p.beta * s * i / n**2)
    df[0] += p.beta * i / n
    df[1] += p.beta * s / n

    J = np.zeros((7, 7))
    J[0] = -df
    J[0, 0] -= q.a1
    J[1] = df
    J[1, 1] -= q.j1
    J[2, 1], J[2, 2] = p.gamma1, -q.j2
    J[3, 1], J[3, 3] = p.gamma2, -q.j3
    J[4, 1], J[4, 4] = p.gamma3, -q.j4
    J[5, 1], J[5, 2], J[5, 3], J[5, 4], J[5, 5] = p.tau1, p.tau3, p.tau2, p.tau4, -q.j5
    J[6, 0], J[6, 1], J[6, 3], J[6, 4], J[6, 5], J[6, 6] = (
        p.sigma, p.gamma4, p.phi1, p.phi2, p.tau, -p.nu,
    )
    return J


def second_derivative_rhs(p: ModelParams, state) -> np.ndarray:
    """Second time derivative of every compartment along the flow.

    Uses the first derivatives from :func:`rhs` and ``dN/dt = Pi - nu*N``.
    """
    x = _vec(state)
    s, i = x[0], x[1]
    n = float(x.sum())
    if n <= 0:
        raise DomainError("second_derivative_rhs needs a positive total population")
    q = derived_rates(p)
    ds, di, dip, din, dic, dr, dd = rhs(p, x)
    dn = p.Pi - p.nu * n
    # d/dt of beta*S*I/N
    dforce = p.beta * ((ds * i + di * s) * n - dn * s * i) / n**2
    return np.array([
        -q.a1 * ds - dforce,
        dforce - q.j1 * di,
        p.gamma1 * di - q.j2 * dip,
        p.gamma2 * di - q.j3 * din,
        p.gamma3 * di - q.j4 * dic,
        p.tau1 * di + p.tau2 * din + p.tau3 * dip + p.tau4 * dic - q.j5 * dr,
        p.sigma * ds + p.phi1 * din + p.phi2 * dic + p.gamma4 * di + p.tau * dr - p.nu * dd,
    ])
