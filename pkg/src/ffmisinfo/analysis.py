"""Equilibria, threshold numbers, stability, bounds and Lyapunov diagnostics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BoundInapplicable, DomainError, NoEndemicEquilibrium
from .model import (
    COMPARTMENTS,
    ModelParams,
    State,
    derived_rates,
    gains_losses,
    jacobian,
    rhs,
    second_derivative_rhs,
)
from .special import MLEvalPolicy, gamma_fn, mittag_leffler


# --------------------------------------------------------------------------
# equilibria


@dataclass(frozen=True)
class EquilibriumReport:
    point: State
    residual_norm: float
    kind: str  # "DiseaseFree" | "Endemic"
    closed_form_used: bool
    refinement_iterations: int = 0
    seed: State | None = None


def _residual(p, x) -> float:
    return float(np.max(np.abs(rhs(p, x))))


def disease_free_equilibrium(p: ModelParams) -> EquilibriumReport:
    """Steady state with no impacted individuals."""
    if p.nu <= 0:
        raise DomainError("disease-free equilibrium needs nu > 0")
    a1 = p.sigma + p.nu
    point = State(p.Pi / a1, 0.0, 0.0, 0.0, 0.0, 0.0, p.sigma * p.Pi / (a1 * p.nu))
    return EquilibriumReport(point, _residual(p, point), "DiseaseFree", True)


def endemic_closed_form(p: ModelParams) -> State:
    """Closed-form endemic point.

    The textbook expressions (``S_p* = lambda/beta``,
    ``I* = Pi/lambda - (sigma+nu)/beta``, ...) hold for a population
    normalised to ``N = 1``, whose per-capita influx is ``nu``.  They are
    evaluated in that normalisation and rescaled by ``N* = Pi/nu``.

    Raises :class:`NoEndemicEquilibrium` when the impacted level is not
    positive, i.e. when ``R0 <= 1``.
    """
    if p.nu <= 0:
        raise DomainError("endemic equilibrium needs nu > 0")
    q = derived_rates(p)
    n_star = p.Pi / p.nu
    if p.beta <= 0:
        raise NoEndemicEquilibrium(-math.inf)
    # normalised population: influx per capita equals nu
    s = q.j1 / p.beta
    i = p.nu / q.j1 - q.a1 / p.beta
    if not i > 0 or n_star <= 0:
        raise NoEndemicEquilibrium(i * n_star)
    ip = p.gamma1 * i / q.j2
    i_n = p.gamma2 * i / q.j3
    ic = p.gamma3 * i / q.j4
    r = (p.tau1 * i + p.tau2 * i_n + p.tau3 * ip + p.tau4 * ic) / q.j5
    d = (p.sigma * s + p.phi1 * i_n + p.phi2 * ic + p.gamma4 * i + p.tau * r) / p.nu
    return State(*(n_star * v for v in (s, i, ip, i_n, ic, r, d)))


def _newton(p: ModelParams, x0: np.ndarray, tol: float, max_iter: int = 50):
    x = np.array(x0, dtype=float)
    res = _residual(p, x)
    it = 0
    while res > tol and it < max_iter:
        step = np.linalg.solve(jacobian(p, x), rhs(p, x))
        lam = 1.0
        while lam > 1e-8:
            trial = x - lam * step
            if np.all(trial >= 0):
                r_trial = _residual(p, trial)
                if r_trial < res:
                    break
            lam *= 0.5
        else:
            break
        x, res = trial, r_trial
        it += 1
    return x, res, it


def endemic_equilibrium(p: ModelParams) -> EquilibriumReport:
    """Endemic steady state: closed-form seed polished by damped Newton on ``rhs = 0``."""
    seed = endemic_closed_form(p)
    tol = 1e-14 * max(1.0, p.Pi)
    x, res, it = _newton(p, seed.as_array(), tol)
    if x[1] <= 0:
        raise NoEndemicEquilibrium(float(x[1]))
    return EquilibriumReport(State.from_array(x), res, "Endemic", True, it, seed)


# --------------------------------------------------------------------------
# reproduction and strength numbers


@dataclass(frozen=True)
class NGMReport:
    f_matrix: np.ndarray
    v_matrix: np.ndarray
    v_inverse: np.ndarray
    spectral_radius: float


def next_generation_matrices(p: ModelParams) -> NGMReport:
    """New-impact matrix F and transition matrix V on (I, I_p, I_n, I_c) at the disease-free state."""
    if p.sigma + p.nu <= 0:
        raise DomainError("next generation matrix needs sigma + nu > 0")
    q = derived_rates(p)
    if min(q.j1, q.j2, q.j3, q.j4) <= 0:
        raise DomainError("V is singular: every one of j1..j4 must be positive")
    F = np.zeros((4, 4))
    F[0, 0] = p.beta * p.nu / (p.sigma + p.nu)
    V = np.diag([q.j1, q.j2, q.j3, q.j4])
    V[1:, 0] = [-p.gamma1, -p.gamma2, -p.gamma3]
    V_inv = np.linalg.solve(V, np.eye(4))
    rho = float(np.max(np.abs(np.linalg.eigvals(F @ V_inv))))
    return NGMReport(F, V, V_inv, rho)


def reproduction_number(p: ModelParams) -> float:
    q = derived_rates(p)
    den = (p.sigma + p.nu) * q.j1
    if den <= 0:
        raise DomainError("reproduction number needs (sigma + nu) * j1 > 0")
    return p.beta * p.nu / den


def strength_number(p: ModelParams) -> float:
    """Second-derivative analogue of R0 built from the infection term's curvature."""
    if p.Pi <= 0:
        raise DomainError("strength number needs Pi > 0")
    if p.nu <= 0:
        raise DomainError("strength number needs nu > 0")
    q = derived_rates(p)
    if q.j1 <= 0:
        raise DomainError("strength number needs j1 > 0")
    return -2.0 * p.beta * (p.sigma + p.nu) / (p.Pi * (1.0 + p.sigma / p.nu) ** 2 * q.j1)


# --------------------------------------------------------------------------
# local stability at the disease-free state


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    classification: str  # "LocallyStable" | "Unstable"
    threshold_eigenvalue: complex
    unstable_count: int


def stability_spectrum(p: ModelParams) -> StabilityReport:
    e0 = disease_free_equilibrium(p).point
    if sum(e0) <= 0:
        raise DomainError("stability spectrum needs Pi > 0 (empty disease-free state)")
    ev = np.linalg.eigvals(jacobian(p, e0))
    ev = ev[np.lexsort((ev.imag, ev.real))]
    expected = p.beta * p.nu / (p.sigma + p.nu) - derived_rates(p).j1
    thr = complex(ev[np.argmin(np.abs(ev - expected))])
    n_unstable = int(np.sum(ev.real >= 0))
    cls = "LocallyStable" if n_unstable == 0 else "Unstable"
    return StabilityReport(ev, cls, thr, n_unstable)


# --------------------------------------------------------------------------
# sup-norm surrogates, Lipschitz constants


@dataclass(frozen=True)
class SupBounds:
    sup_i: float
    sup_sp: float
    sup_in: float
    sup_ip: float
    sup_ic: float
    sup_r: float
    sup_n: float

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {v!r}")

    @classmethod
    def from_trajectory(cls, y) -> "SupBounds":
        """Column maxima of a ``(nodes, 7)`` array of states."""
        y = np.abs(np.asarray(y, dtype=float))
        m = y.max(axis=0)
        return cls(
            sup_i=float(m[1]), sup_sp=float(m[0]), sup_in=float(m[3]),
            sup_ip=float(m[2]), sup_ic=float(m[4]), sup_r=float(m[5]),
            sup_n=float(np.max(y.sum(axis=1))),
        )


@dataclass(frozen=True)
class LipschitzReport:
    rho: tuple
    rho_bar: tuple
    k_conditions: tuple
    feasible: bool
    notes: tuple = field(default=())


def lipschitz_constants(p: ModelParams, b: SupBounds, epsilon1: float = 0.0) -> LipschitzReport:
    """Growth constants and existence conditions K1..K6 exactly as published.

    ``rho1`` and ``K1`` keep the quartic ``sigma**4`` term of the published
    estimate; ``epsilon1`` is the unspecified extra constant in ``rho7``.
    """
    g2 = p.gamma1**2 + p.gamma2**2 + p.gamma3**2 + p.gamma4**2
    rho = (
        2 * (p.beta**2 * b.sup_i**2 + p.sigma**4 + p.nu**2),
        2 * (p.beta**2 * b.sup_sp**2 + g2 + p.tau1**2 + p.nu**2),
        2 * (p.tau3**2 + p.nu**2),
        2 * (p.tau2**2 + p.phi1**2 + p.nu**2),
        2 * (p.tau4**2 + p.phi2**2 + p.nu**2),
        2 * (p.tau**2 + p.nu**2),
        2 * (p.nu**2 + epsilon1),
    )
    r6 = 2 * (p.tau1**2 * b.sup_i**2 + p.tau2**2 * b.sup_in**2
              + p.tau3**2 * b.sup_ip**2 + p.tau4**2 * b.sup_ic**2)
    r7 = 2 * (p.sigma**2 * b.sup_sp**2 + p.phi1**2 * b.sup_in**2 + p.phi2**2 * b.sup_ic**2
              + p.gamma4**2 * b.sup_i**2 + p.tau**2 * b.sup_r**2)
    rho_bar = (
        1.0,
        rho[1],
        2 * p.gamma1**2 * b.sup_i**2,
        2 * p.gamma2**2 * b.sup_i**2 * b.sup_ic**2,
        2 * p.gamma3**2 * b.sup_i**2,
        r6,
        r7,
    )
    pairs = (
        ("K1", 2 * (p.beta**2 * b.sup_i**2 + p.sigma**4 + p.nu**2), 2 * p.Pi**2),
        ("K2", 2 * (p.tau3**2 + p.nu**2), rho_bar[2]),
        ("K3", 2 * (p.tau2 + p.phi1 + p.nu), rho_bar[3]),
        ("K4", 2 * (p.tau4**2 + p.phi2**2 + p.nu), rho_bar[4]),
        ("K5", 2 * (p.tau**2 + p.nu**2), r6),
        ("K6", 2 * p.nu**2, r7),
    )
    ks = []
    for name, num, den in pairs:
        if den == 0:
            raise DomainError(f"{name} has a zero denominator")
        ks.append(num / den)
    notes = (
        "rho1 and K1 use sigma**4 as published; sigma**2 is the likely intent",
        "K3 and K4 use unsquared rates in their numerators as published",
    )
    return LipschitzReport(tuple(rho), tuple(rho_bar), tuple(ks), max(ks) <= 1.0, notes)


# --------------------------------------------------------------------------
# positivity lower bounds


class OperatorFamily(enum.Enum):
    Classical = "Classical"
    Caputo = "Caputo"
    CaputoFabrizio = "CaputoFabrizio"
    AtanganaBaleanu = "AtanganaBaleanu"
    FFPower = "FFPower"
    FFExponential = "FFExponential"
    FFMittagLeffler = "FFMittagLeffler"


def ab_normalization(alpha: float) -> float:
    """``AB(alpha) = 1 - alpha + alpha / Gamma(alpha)``."""
    return 1.0 - alpha + alpha / gamma_fn(alpha)


def _compartment_index(compartment) -> int:
    if isinstance(compartment, (int, np.integer)):
        if not 0 <= compartment < 7:
            raise DomainError(f"compartment index out of range: {compartment}")
        return int(compartment)
    try:
        return COMPARTMENTS.index(compartment)
    except ValueError:
        raise DomainError(f"unknown compartment {compartment!r}") from None


def decay_rate(p: ModelParams, b: SupBounds, compartment) -> float:
    """Worst-case per-capita exit rate of one compartment."""
    k = _compartment_index(compartment)
    q = derived_rates(p)
    if k == 0:
        if p.beta > 0 and b.sup_n <= 0:
            raise DomainError("sup_n must be positive for the S_p decay rate")
        infection = p.beta * b.sup_i / b.sup_n if p.beta > 0 else 0.0
        return infection + p.sigma + p.nu
    # the R exit rate is tau + nu; D has only natural exit
    return (q.j1, q.j2, q.j3, q.j4, q.j5, p.nu)[k - 1]


def positivity_lower_bound(
    family,
    p: ModelParams,
    bounds: SupBounds,
    compartment,
    initial_value: float,
    t,
    alpha: float | None = None,
    eta: float | None = None,
    *,
    cf_normalization: float = 1.0,
    ab_norm: float | None = None,
    fractal_c: float = 1.0,
    policy: MLEvalPolicy | None = None,
):
    """Lower envelope ``x0 * kernel(t)`` for one compartment under an operator family.

    ``t`` may be a scalar or an array of times ``>= 0``.
    """
    family = OperatorFamily(family) if not isinstance(family, OperatorFamily) else family
    alpha = p.alpha if alpha is None else float(alpha)
    eta = p.eta if eta is None else float(eta)
    if not 0 < alpha <= 1 or not 0 < eta <= 1:
        raise DomainError("alpha and eta must lie in (0,1]")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise DomainError("t must be finite and >= 0")
    lam = decay_rate(p, bounds, compartment)
    F = OperatorFamily
    fractal = fractal_c ** (1.0 - eta) if family in (F.FFPower, F.FFExponential, F.FFMittagLeffler) else 1.0

    if family in (F.CaputoFabrizio, F.FFExponential):
        den = cf_normalization - (1.0 - alpha) * lam
    elif family in (F.AtanganaBaleanu, F.FFMittagLeffler):
        norm = ab_normalization(alpha) if ab_norm is None else ab_norm
        den = norm - (1.0 - alpha) * lam
    else:
        den = None
    if den is not None and den <= 0:
        raise BoundInapplicable(
            f"{family.value} bound for {COMPARTMENTS[_compartment_index(compartment)]}: "
            f"denominator {den!r} is not positive"
        )

    if family is F.Classical:
        kern = np.exp(-lam * t_arr)
    elif family in (F.Caputo, F.FFPower):
        kern = mittag_leffler(alpha, -fractal * lam * t_arr**alpha, policy)
    elif family in (F.CaputoFabrizio, F.FFExponential):
        kern = np.exp(-fractal * alpha * lam * t_arr / den)
    else:
        kern = mittag_leffler(alpha, -fractal * alpha * lam * t_arr**alpha / den, policy)
    out = initial_value * np.asarray(kern, dtype=float)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Lyapunov diagnostics


def _positive_pair(state, equilibrium):
    x = np.asarray(state, dtype=float)
    xs = np.asarray(equilibrium, dtype=float)
    if x.shape != (7,) or xs.shape != (7,):
        raise DomainError("states have 7 components")
    if np.any(x <= 0) or np.any(xs <= 0):
        raise DomainError("Lyapunov diagnostics need strictly positive components")
    return x, xs


def lyapunov_value(p: ModelParams, state, equilibrium) -> float:
    """Sum of Volterra terms ``x - x* - x* log(x/x*)``."""
    x, xs = _positive_pair(state, equilibrium)
    return float(np.sum(x - xs - xs * np.log(x / xs)))


class LyapunovRate(NamedTuple):
    dL_dt: float
    omega: float
    sigma_term: float


def lyapunov_derivative(p: ModelParams, state, equilibrium) -> LyapunovRate:
    """``dL/dt`` along the flow and its split into positive and negative groups.

    ``omega`` collects ``gains + (x*/x) losses`` and ``sigma_term`` collects
    ``(x*/x) gains + losses`` over all compartments, so that
    ``dL/dt = omega - sigma_term``.
    """
    x, xs = _positive_pair(state, equilibrium)
    w = 1.0 - xs / x
    dl = float(np.dot(w, rhs(p, x)))
    g, l = gains_losses(p, x)
    ratio = xs / x
    omega = float(np.sum(g + ratio * l))
    sig = float(np.sum(ratio * g + l))
    return LyapunovRate(dl, omega, sig)


def lyapunov_second_derivative(p: ModelParams, state, equilibrium) -> float:
    x, xs = _positive_pair(state, equilibrium)
    f = rhs(p, x)
    return float(np.sum(xs / x**2 * f**2 + (1.0 - xs / x) * second_derivative_rhs(p, x)))


def global_stability_indicator(state, equilibrium) -> tuple[float, bool]:
    """Left side of the endemic global-stability inequality and whether it is ``<= 0``.

    Evaluated term by term as stated; informational only.
    """
    x, xs = _positive_pair(state, equilibrium)
    s, i, ip, i_n, ic = x[:5]
    ss, is_, ips, ins, ics = xs[:5]
    n, ns = x.sum(), xs.sum()
    val = (
        5.0
        - s * ns / (n * ss)
        - ss / s
        + 2.0 * i / is_
        - ip / ips
        - i_n / ins
        - ic / ics
        - i * ips / (is_ * ips)
        - i * ins / (is_ * ins)
        - i * ics / (is_ * ics)
        + i * ns / (n * is_)
    )
    return float(val), bool(val <= 0)


# --------------------------------------------------------------------------
# second-order wave window


@dataclass(frozen=True)
class WaveWindowReport:
    lower: float
    upper: float
    s_p_current: float
    in_window: bool
    d2i: float
    d2i_kind: str  # "local_maximum" | "local_minimum" | "inflection"
    assumptions_hold: bool  # N > S_p and N > I


def wave_window(p: ModelParams, state) -> WaveWindowReport:
    """Range of ``S_p`` in which the impacted classes can turn over."""
    if p.beta <= 0:
        raise DomainError("wave window needs beta > 0")
    x = np.asarray(state, dtype=float)
    n = float(x.sum())
    if n <= 0:
        raise DomainError("wave window needs a positive total population")
    q = derived_rates(p)
    lower = q.j1**2 / (p.beta * p.sigma + 2 * p.beta * q.j1 + p.beta**2)
    upper = min((q.j1 + q.j2) * n / p.beta, (q.j1 + q.j3) * n / p.beta, (q.j1 + q.j4) * n / p.beta)
    sp = float(x[0])
    d2i = float(second_derivative_rhs(p, x)[1])
    kind = "local_maximum" if d2i < 0 else "local_minimum" if d2i > 0 else "inflection"
    return WaveWindowReport(
        lower, upper, sp, lower < sp < upper, d2i, kind, bool(n > x[0] and n > x[1])
    )


def sign_changes(values) -> list[int]:
    """Indices ``k`` where ``values[k]`` and ``values[k+1]`` have strictly opposite signs."""
    v = np.asarray(values, dtype=float)
    return [int(k) for k in np.nonzero(v[:-1] * v[1:] < 0)[0]]
