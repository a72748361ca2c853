"""Time integration under the three fractal-fractional kernels and classical RK4.

Every fractal-fractional scheme evaluates ``F(t, x) = eta * t**(eta-1) * rhs(x)``
on the uniform grid ``t_k = k h``.  The power-law (FFP) and Mittag-Leffler
(FFM) schemes keep the full history, so a run of ``n`` steps costs
``O(n**2)``; the exponential-kernel scheme (FFE) is a two-step recursion.

The loops run in the compiled extension when it is importable and fall back
to numpy otherwise.  Set ``FFMISINFO_BACKEND=python`` to force the fallback,
or pass ``backend=`` to any integrator.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _pykernels
from .errors import DivergedError, DomainError
from .model import COMPARTMENTS, ModelParams, State
from .special import gamma_fn

try:
    if os.environ.get("FFMISINFO_BACKEND", "").lower() == "python":
        raise ImportError("fallback forced by FFMISINFO_BACKEND")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _compiled is not None else ("python",)


def _impl(backend: str | None):
    name = BACKEND if backend is None else backend
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise DomainError("compiled backend is not available")
        return _compiled
    raise DomainError(f"unknown backend {backend!r}; expected 'cython' or 'python'")


class Kernel(str, enum.Enum):
    Classical = "Classical"
    FFP = "FFP"
    FFE = "FFE"
    FFM = "FFM"


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_k = t0 + k h`` for ``k = 0..n_steps``."""

    h: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise DomainError(f"h must be > 0, got {self.h!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be an integer >= 1, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_t_end(cls, h: float, t_end: float) -> "Grid":
        """Grid reaching ``t_end``; the step count is rounded to the nearest integer."""
        if not (t_end > 0 and h > 0):
            raise DomainError("t_end and h must be > 0")
        return cls(h, max(1, int(round(t_end / h))))

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * self.n_steps


@dataclass(frozen=True)
class Trajectory:
    grid: Grid
    states: np.ndarray  # (n_steps + 1, 7), read-only
    kernel: Kernel
    alpha: float
    eta: float

    @property
    def t(self) -> np.ndarray:
        return self.grid.times[: len(self.states)]

    @property
    def total(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def state(self, k: int) -> State:
        return State.from_array(self.states[k])

    def compartment(self, name: str) -> np.ndarray:
        return self.states[:, COMPARTMENTS.index(name)]


class SchemeWeights(NamedTuple):
    w_cur: float
    w_prev: float


def ff_weights(n: int, j: int, alpha: float) -> SchemeWeights:
    """Product-integration weights pairing ``F(t_j)`` and ``F(t_{j-1})`` in step ``n``."""
    if not 0 <= j <= n:
        raise DomainError(f"need 0 <= j <= n, got j={j}, n={n}")
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0,1], got {alpha!r}")
    k = float(n - j)
    w_cur = (k + 1) ** alpha * (k + alpha + 2) - k**alpha * (k + 2 * alpha + 2)
    w_prev = (k + 1) ** (alpha + 1) - k**alpha * (k + alpha + 1)
    return SchemeWeights(w_cur, w_prev)


def weight_arrays(n_steps: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """``(w_cur, w_prev)`` for every lag ``k = n - j`` in ``0..n_steps``."""
    k = np.arange(n_steps + 1, dtype=float)
    kp = k**alpha
    w_cur = (k + 1) ** alpha * (k + alpha + 2) - kp * (k + 2 * alpha + 2)
    w_prev = (k + 1) ** (alpha + 1) - kp * (k + alpha + 1)
    return w_cur, w_prev


def fractal_factor(t, eta: float, h: float | None = None, t0_rule: str = "first_node"):
    """Chain-rule factor ``eta * t**(eta - 1)`` of differentiation in ``t**eta``.

    The factor is singular at ``t = 0`` when ``eta < 1``.  With
    ``t0_rule="first_node"`` it is evaluated at ``t = h`` there; with
    ``t0_rule="zero"`` it is set to 0.
    """
    if not 0 < eta <= 1:
        raise DomainError(f"eta must lie in (0,1], got {eta!r}")
    if t0_rule not in ("first_node", "zero"):
        raise DomainError(f"t0_rule must be 'first_node' or 'zero', got {t0_rule!r}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be >= 0")
    if eta == 1.0:
        out = np.ones_like(t_arr)
    else:
        pos = t_arr > 0
        out = np.empty_like(t_arr)
        out[pos] = eta * t_arr[pos] ** (eta - 1.0)
        if np.any(~pos):
            if t0_rule == "zero":
                out[~pos] = 0.0
            else:
                if h is None or not h > 0:
                    raise DomainError("the first-node rule at t = 0 needs the step h")
                out[~pos] = eta * h ** (eta - 1.0)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------


def _check_init(init) -> np.ndarray:
    x = np.asarray(init, dtype=float)
    if x.shape != (7,):
        raise DomainError(f"initial state has 7 components, got shape {x.shape}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise DomainError("initial state must be finite and nonnegative")
    return x


def _orders(p: ModelParams, alpha, eta) -> tuple[float, float]:
    alpha = p.alpha if alpha is None else float(alpha)
    eta = p.eta if eta is None else float(eta)
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0,1], got {alpha!r}")
    if not 0 < eta <= 1:
        raise DomainError(f"eta must lie in (0,1], got {eta!r}")
    return alpha, eta


def _finish(y, bad, grid, kernel, alpha, eta) -> Trajectory:
    y.setflags(write=False)
    traj = Trajectory(grid, y, kernel, alpha, eta)
    if bad >= 0:
        raise DivergedError(bad, traj)
    return traj


def integrate_classical(p: ModelParams, init, grid: Grid, *, backend: str | None = None) -> Trajectory:
    """Classical fourth-order Runge-Kutta on the integer-order model."""
    x0 = _check_init(init)
    y, bad = _impl(backend).run_rk4(p.rates(), x0, grid.h, grid.n_steps)
    return _finish(y, bad, grid, Kernel.Classical, 1.0, 1.0)


def _ffconv(p, init, grid, alpha, eta, t0_rule, backend, ab_kernel):
    x0 = _check_init(init)
    alpha, eta = _orders(p, alpha, eta)
    N = grid.n_steps
    a, b = weight_arrays(N, alpha)
    c = a.copy()
    c[1:] -= b[:-1]
    g = gamma_fn(alpha + 2.0)
    ffac = fractal_factor(grid.times, eta, grid.h, t0_rule)
    if ab_kernel:
        ab = 1.0 - alpha + alpha / gamma_fn(alpha)
        lead = (1.0 - alpha) / ab
        coef = alpha * grid.h**alpha / (ab * g)
    else:
        lead = 0.0
        coef = grid.h**alpha / g
    y, bad = _impl(backend).run_ffconv(p.rates(), x0, N, c, b, coef, lead, ffac)
    return _finish(y, bad, grid, Kernel.FFM if ab_kernel else Kernel.FFP, alpha, eta)


def integrate_ffp(
    p: ModelParams,
    init,
    grid: Grid,
    alpha: float | None = None,
    eta: float | None = None,
    *,
    t0_rule: str = "first_node",
    backend: str | None = None,
) -> Trajectory:
    """Power-law kernel scheme.

    ``x[n+1] = x0 + h**a / Gamma(a+2) * sum_{j<=n} (F_j w_cur(n-j) - F_{j-1} w_prev(n-j))``
    with ``F_{-1} = F_0``.  Reduces to two-step Adams-Bashforth at ``a = 1``.
    """
    return _ffconv(p, init, grid, alpha, eta, t0_rule, backend, ab_kernel=False)


def integrate_ffm(
    p: ModelParams,
    init,
    grid: Grid,
    alpha: float | None = None,
    eta: float | None = None,
    *,
    t0_rule: str = "first_node",
    backend: str | None = None,
) -> Trajectory:
    """Mittag-Leffler kernel scheme.

    Adds the local term ``(1-a)/AB(a) * F_n`` to the power-law history sum,
    which is scaled by ``a / AB(a)``.  Identical to :func:`integrate_ffp` at ``a = 1``.
    """
    return _ffconv(p, init, grid, alpha, eta, t0_rule, backend, ab_kernel=True)


def integrate_ffe(
    p: ModelParams,
    init,
    grid: Grid,
    alpha: float | None = None,
    eta: float | None = None,
    *,
    cf_normalization: float = 1.0,
    t0_rule: str = "first_node",
    backend: str | None = None,
) -> Trajectory:
    """Exponential kernel scheme.

    ``x[n+1] = x[n] + (1-a)/M (F_n - F_{n-1}) + a/M (3h/2 F_n - h/2 F_{n-1})``
    with ``F_{-1} = F_0`` and normalisation ``M = cf_normalization``.
    """
    x0 = _check_init(init)
    alpha, eta = _orders(p, alpha, eta)
    if not (math.isfinite(cf_normalization) and cf_normalization > 0):
        raise DomainError("cf_normalization must be > 0")
    ffac = fractal_factor(grid.times, eta, grid.h, t0_rule)
    y, bad = _impl(backend).run_ffe(
        p.rates(), x0, grid.h, grid.n_steps, ffac, alpha, float(cf_normalization)
    )
    return _finish(y, bad, grid, Kernel.FFE, alpha, eta)


def integrate(kernel, p: ModelParams, init, grid: Grid, alpha=None, eta=None, **kw) -> Trajectory:
    """Dispatch on a kernel name (case-insensitive) or :class:`Kernel`."""
    key = kernel.value if isinstance(kernel, Kernel) else str(kernel)
    key = key.lower()
    if key == "classical":
        kw.pop("t0_rule", None)
        kw.pop("cf_normalization", None)
        return integrate_classical(p, init, grid, **kw)
    if key == "ffe":
        return integrate_ffe(p, init, grid, alpha, eta, **kw)
    kw.pop("cf_normalization", None)
    if key == "ffp":
        return integrate_ffp(p, init, grid, alpha, eta, **kw)
    if key == "ffm":
        return integrate_ffm(p, init, grid, alpha, eta, **kw)
    raise DomainError(f"unknown kernel {kernel!r}")
