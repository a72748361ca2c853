"""Pure-Python/numpy integration loops, used when the compiled module is absent.

All loops share one calling convention with the compiled twin in
``_kernels.pyx``: a flat rate vector in ``model.RATE_NAMES`` order, the
initial state, and precomputed per-node fractal factors.  Each returns
``(y, bad)`` where ``y`` has shape ``(n_steps + 1, 7)`` and ``bad`` is the
first node holding a non-finite value, or ``-1``.
"""

from __future__ import annotations

import functools
import math

import numpy as np


def _quiet(fn):
    # overflow is reported through the returned bad-node index instead
    @functools.wraps(fn)
    def wrapper(*args, **kw):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args, **kw)

    return wrapper


def rhs_flat(r, x):
    """Vector field on plain floats; same operation order as the compiled kernel."""
    Pi, beta, sigma, nu, g1, g2, g3, g4, tau, t1, t2, t3, t4, f1, f2 = r
    s, i, ip, i_n, ic, rr, d = x
    n = s + i + ip + i_n + ic + rr + d
    f = 0.0 if n == 0.0 else beta * s * i / n
    return (
        Pi - f - sigma * s - nu * s,
        f - g1 * i - g2 * i - g3 * i - g4 * i - t1 * i - nu * i,
        g1 * i - t3 * ip - nu * ip,
        g2 * i - t2 * i_n - f1 * i_n - nu * i_n,
        g3 * i - t4 * ic - f2 * ic - nu * ic,
        t1 * i + t2 * i_n + t3 * ip + t4 * ic - tau * rr - nu * rr,
        sigma * s + f1 * i_n + f2 * ic + g4 * i + tau * rr - nu * d,
    )


def _finite(x) -> bool:
    return all(math.isfinite(v) for v in x)


@_quiet
def run_rk4(rates, x0, h, n_steps):
    r = tuple(float(v) for v in rates)
    y = np.empty((n_steps + 1, 7))
    x = tuple(float(v) for v in x0)
    y[0] = x
    h2 = 0.5 * h
    h6 = h / 6.0
    for n in range(n_steps):
        k1 = rhs_flat(r, x)
        k2 = rhs_flat(r, [a + h2 * b for a, b in zip(x, k1)])
        k3 = rhs_flat(r, [a + h2 * b for a, b in zip(x, k2)])
        k4 = rhs_flat(r, [a + h * b for a, b in zip(x, k3)])
        x = tuple(
            a + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)
        )
        y[n + 1] = x
        if not _finite(x):
            return y[: n + 2], n + 1
    return y, -1


@_quiet
def run_ffconv(rates, x0, n_steps, c, b, coef, lead, ffac):
    """Product-integration update with full history.

    ``x[n+1] = x0 + lead*F[n] + coef*(sum_j c[n-j] F[j] - b[n] F[0])``
    """
    r = tuple(float(v) for v in rates)
    N = n_steps
    x0 = np.asarray(x0, dtype=float)
    y = np.empty((N + 1, 7))
    F = np.empty((N + 1, 7))
    y[0] = x0
    # c reversed so that the history sum is a contiguous dot product
    crev = np.ascontiguousarray(np.asarray(c, dtype=float)[::-1])
    for n in range(N):
        F[n] = rhs_flat(r, y[n])
        F[n] *= ffac[n]
        acc = crev[N - n:] @ F[: n + 1]
        acc -= b[n] * F[0]
        y[n + 1] = x0 + lead * F[n] + coef * acc
        if not np.all(np.isfinite(y[n + 1])):
            return y[: n + 2], n + 1
    return y, -1


@_quiet
def run_ffe(rates, x0, h, n_steps, ffac, alpha, m_norm):
    """Two-step exponential-kernel update, ``O(n)`` total."""
    r = tuple(float(v) for v in rates)
    y = np.empty((n_steps + 1, 7))
    x = tuple(float(v) for v in x0)
    y[0] = x
    mem = (1.0 - alpha) / m_norm
    w1 = alpha / m_norm * (1.5 * h)
    w0 = alpha / m_norm * (0.5 * h)
    f_prev = None
    for n in range(n_steps):
        fn = tuple(ffac[n] * v for v in rhs_flat(r, x))
        if f_prev is None:
            f_prev = fn
        x = tuple(
            a + mem * (u - v) + (w1 * u - w0 * v) for a, u, v in zip(x, fn, f_prev)
        )
        y[n + 1] = x
        f_prev = fn
        if not _finite(x):
            return y[: n + 2], n + 1
    return y, -1
