"""Gamma and one-parameter Mittag-Leffler functions for real arguments.

``mittag_leffler`` picks one of three evaluation routes per point:

* the Taylor series ``sum z**k / Gamma(1 + alpha*k)`` when the worst
  cancellation (largest term times machine epsilon) stays well under the
  tolerance;
* the large-argument expansion ``-sum_{k>=1} z**(-k) / Gamma(1 - alpha*k)``
  for negative ``z`` once both its smallest term and the exponentially small
  remainder drop below tolerance;
* otherwise the complete-monotonicity integral

      E_a(-x) = sin(a pi)/(a pi) * int_0^inf x exp(-v**(1/a)) / (v**2 + 2 v x cos(a pi) + x**2) dv

  evaluated by adaptive quadrature.

``alpha == 1`` is ``exp`` exactly. Orders in ``(1, 2]`` are served by the
series only and raise ``DomainError`` where it would lose accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MLEvalPolicy:
    """Knobs for :func:`mittag_leffler`.

    ``series_radius`` caps ``|z|`` for the series branch; within it the
    series is still rejected when its cancellation estimate exceeds
    ``target_abs_tol / 100``.
    """

    series_term_cap: int = 250
    series_radius: float = 5.0
    asymptotic_order: int = 40
    target_abs_tol: float = 1e-10

    def __post_init__(self):
        if self.series_term_cap < 1:
            raise DomainError("series_term_cap must be >= 1")
        if not self.target_abs_tol > 0:
            raise DomainError("target_abs_tol must be > 0")
        if not self.series_radius > 0:
            raise DomainError("series_radius must be > 0")
        if self.asymptotic_order < 1:
            raise DomainError("asymptotic_order must be >= 1")


DEFAULT_POLICY = MLEvalPolicy()


def gamma_fn(x: float) -> float:
    """Gamma function for ``x > 0``."""
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"gamma_fn requires a finite x > 0, got {x!r}")
    return math.gamma(x)


def _rgamma(x: float) -> float:
    """1/Gamma(x) for any real x, zero at the poles."""
    if x > 0:
        return math.exp(-math.lgamma(x))
    if x == math.floor(x):
        return 0.0
    # reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
    return math.exp(math.lgamma(1.0 - x)) * math.sin(math.pi * x) / math.pi


def _series(alpha: float, z: float, cap: int):
    """Return (value, cancellation_estimate, converged)."""
    if z == 0.0:
        return 1.0, 0.0, True
    logz = math.log(abs(z))
    neg = z < 0
    total = 0.0
    comp = 0.0
    biggest = 0.0
    small_run = 0
    for k in range(cap):
        mag = math.exp(k * logz - math.lgamma(1.0 + alpha * k))
        term = -mag if (neg and k % 2) else mag
        # Kahan summation
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        biggest = max(biggest, mag)
        if k > 2 and mag <= _EPS * max(abs(total), 1e-300):
            small_run += 1
            if small_run >= 2:
                return total, biggest * _EPS * 4, True
        else:
            small_run = 0
    return total, biggest * _EPS * 4, False


def _asymptotic(alpha: float, z: float, order: int):
    """Large negative z expansion; returns (value, error_estimate)."""
    x = -z
    total = 0.0
    prev = math.inf
    for k in range(1, order + 1):
        term = -((-1.0) ** k) * _rgamma(1.0 - alpha * k) / x**k
        mag = abs(term)
        if mag == 0.0:
            # Gamma pole: the term vanishes but says nothing about the tail
            continue
        if mag > prev:
            break
        total += term
        prev = mag
    # optimal truncation: the error is about the smallest retained term
    err = prev
    # contribution of the nearest Borel-plane singularity
    theta = (1.0 - alpha) * math.pi / alpha
    c = math.cos(theta)
    if c > 0:
        err += (2.0 / alpha) * math.exp(-(x ** (1.0 / alpha)) * c)
    elif alpha > 0.5:
        err = math.inf
    return total, err


def _integral(alpha: float, x: float) -> float:
    """E_alpha(-x) for 0 < alpha < 1, x > 0 via the monotone integral."""
    s = math.sin(alpha * math.pi)
    c = math.cos(alpha * math.pi)
    inv = 1.0 / alpha

    def f(v):
        return x * math.exp(-(v**inv)) / (v * v + 2.0 * v * x * c + x * x)

    # the integrand peaks near v = -x cos(alpha pi) for alpha > 1/2
    peak = max(0.0, -x * c)
    # exp(-v**(1/alpha)) < 1e-300 beyond this point
    vmax = 700.0**alpha
    kw = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    if 0.0 < peak < vmax:
        a, _ = integrate.quad(f, 0.0, peak, **kw)
        b, _ = integrate.quad(f, peak, vmax, **kw)
        val = a + b
    else:
        val, _ = integrate.quad(f, 0.0, vmax, **kw)
    return s / (alpha * math.pi) * val


def _choose(alpha: float, z: float, policy: MLEvalPolicy):
    """Return (branch, value) with value None when it must still be computed."""
    if z == 0.0:
        return "series", 1.0
    if alpha == 1.0:
        return "exp", math.exp(z)
    tol = policy.target_abs_tol
    if z > 0 or alpha > 1.0 or abs(z) <= policy.series_radius:
        val, cancel, ok = _series(alpha, z, policy.series_term_cap)
        if ok and cancel <= tol * 1e-2:
            return "series", val
        if z > 0 or alpha > 1.0:
            raise DomainError(
                f"E_{alpha}({z}) is outside the supported range: the series "
                f"{'did not converge' if not ok else 'loses accuracy'} and "
                "no other branch applies"
            )
    val, err = _asymptotic(alpha, z, policy.asymptotic_order)
    if err <= tol * 1e-2:
        return "asymptotic", val
    return "integral", None


def _ml_scalar(alpha: float, z: float, policy: MLEvalPolicy) -> float:
    _, val = _choose(alpha, z, policy)
    if val is None:
        val = _integral(alpha, -z)
    return val


def mittag_leffler(alpha, z, policy: MLEvalPolicy | None = None):
    """One-parameter Mittag-Leffler function ``E_alpha(z)`` for real ``z``.

    Parameters
    ----------
    alpha : float
        Order in ``(0, 2]``.  Negative ``z`` with large magnitude requires
        ``alpha <= 1``.
    z : float or array_like
        Real argument(s).
    policy : MLEvalPolicy, optional

    Returns
    -------
    float or numpy.ndarray
        Same shape as ``z``.
    """
    policy = policy or DEFAULT_POLICY
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise DomainError(f"alpha must lie in (0, 2], got {alpha!r}")
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("mittag_leffler requires finite arguments")
    if arr.ndim == 0:
        return _ml_scalar(alpha, float(arr), policy)
    if alpha == 1.0:
        return np.exp(arr)
    out = np.empty_like(arr)
    flat = arr.ravel()
    res = out.reshape(-1)
    cache: dict[float, float] = {}
    for i, v in enumerate(flat):
        v = float(v)
        if v not in cache:
            cache[v] = _ml_scalar(alpha, v, policy)
        res[i] = cache[v]
    return out


def ml_branch(alpha: float, z: float, policy: MLEvalPolicy | None = None) -> str:
    """Name of the route ``mittag_leffler`` takes at ``(alpha, z)``."""
    return _choose(float(alpha), float(z), policy or DEFAULT_POLICY)[0]
