"""End-to-end acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL criterion N: ...`` line; the lines are
echoed to stdout and repeated in the pytest terminal summary.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from ffmisinfo import analysis as an
from ffmisinfo.cli import main as cli_main
from ffmisinfo.model import ModelParams, derived_rates, rhs, total_population
from ffmisinfo.presets import DEFAULT_INITIAL, DEFAULT_PRESET, preset_params
from ffmisinfo.solvers import (
    Grid,
    integrate_classical,
    integrate_ffe,
    integrate_ffm,
    integrate_ffp,
)
from ffmisinfo.special import mittag_leffler

from conftest import ACCEPTANCE_LINES, DECAY

UNIT_SP = (1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_mittag_leffler(ml_oracle):
    start = time.perf_counter()
    z = np.linspace(-30.0, 5.0, 1000)
    e1 = np.max(np.abs(mittag_leffler(1.0, z) - np.exp(z)))
    x = np.linspace(0.0, 6.0, 1000)
    e2 = np.max(np.abs(mittag_leffler(2.0, -x * x) - np.cos(x)))
    ef = 0.0
    for key in ("0.5", "0.8"):
        g = ml_oracle["grid"][key]
        zz = np.asarray(g["z"])
        assert zz.min() == -10.0 and zz.max() == 0.0
        ef = max(ef, np.max(np.abs(mittag_leffler(float(key), zz) - np.asarray(g["E"]))))
    wall = time.perf_counter() - start
    ok = e1 <= 1e-10 and e2 <= 1e-9 and ef <= 1e-8 and wall < 5.0
    record(1, ok, f"E1 err {e1:.2e}, E2 err {e2:.2e}, E0.5/E0.8 err {ef:.2e}, {wall:.2f} s")


def _adams_bashforth2(lam, x0, h, n):
    x = np.empty(n + 1)
    x[0] = x0
    f_prev = -lam * x0
    for k in range(n):
        f = -lam * x[k]
        x[k + 1] = x[k] + h * (1.5 * f - 0.5 * f_prev)
        f_prev = f
    return x


def test_criterion_02_integer_order_degeneration():
    start = time.perf_counter()
    p = preset_params(DEFAULT_PRESET)
    grid = Grid.from_t_end(1e-3, 50.0)
    ffp = integrate_ffp(p, DEFAULT_INITIAL, grid, alpha=1.0, eta=1.0).states
    ffm = integrate_ffm(p, DEFAULT_INITIAL, grid, alpha=1.0, eta=1.0).states
    ref = integrate_classical(p, DEFAULT_INITIAL, grid).states
    d_pm = np.max(np.abs(ffp - ffm))
    scale = np.maximum(np.abs(ref), 1e-12)
    r_p = np.max(np.abs(ffp - ref) / scale)
    r_m = np.max(np.abs(ffm - ref) / scale)
    dp = ModelParams(**DECAY)
    n = 50000
    ffe = integrate_ffe(dp, UNIT_SP, Grid(1e-3, n), alpha=1.0, eta=1.0).states[:, 0]
    d_ab = np.max(np.abs(ffe - _adams_bashforth2(dp.sigma + dp.nu, 1.0, 1e-3, n)))
    wall = time.perf_counter() - start
    ok = d_pm <= 1e-12 and r_p <= 1e-3 and r_m <= 1e-3 and d_ab <= 1e-9 and wall < 60.0
    record(2, ok, f"|FFP-FFM| {d_pm:.2e}, rel vs RK4 {r_p:.2e}/{r_m:.2e}, "
                  f"|FFE-AB2| {d_ab:.2e}, {wall:.1f} s")


def test_criterion_03_fractional_decay():
    p = ModelParams(**DECAY, alpha=0.8)
    h = 1e-3
    tr = integrate_ffp(p, UNIT_SP, Grid.from_t_end(h, 5.0), alpha=0.8, eta=1.0)
    lam = p.sigma + p.nu
    worst = 0.0
    for t in (1.0, 2.0, 5.0):
        k = int(round(t / h))
        exact = mittag_leffler(0.8, -lam * t**0.8)
        worst = max(worst, abs(tr.states[k, 0] - exact) / exact)
    record(3, worst <= 0.02, f"max relative error at t=1,2,5 is {worst:.2e}")


def test_criterion_04_conservation():
    p = preset_params(DEFAULT_PRESET)
    tr = integrate_classical(p, DEFAULT_INITIAL, Grid.from_t_end(0.01, 100.0))
    n0 = sum(DEFAULT_INITIAL)
    decay = np.exp(-p.nu * tr.t)
    exact = n0 * decay + p.Pi / p.nu * (1.0 - decay)
    err = np.max(np.abs(tr.total - exact))
    record(4, err <= 1e-6, f"max |N - closed form| = {err:.2e}")


def _bisect(pred, lo, hi, tol=1e-10):
    # pred(lo) is False, pred(hi) is True
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_criterion_05_threshold_behaviour():
    low = preset_params("disease_free")
    tr = integrate_classical(low, DEFAULT_INITIAL, Grid.from_t_end(0.01, 200.0))
    ratio = tr.states[-1, 1] / tr.states[0, 1]

    high = preset_params("endemic")
    eq = an.endemic_equilibrium(high).point
    tr = integrate_classical(high, DEFAULT_INITIAL, Grid.from_t_end(0.01, 300.0))
    final = tr.states[-1]
    resid = np.max(np.abs(rhs(high, final))) / np.max(np.abs(eq))
    dist = np.max(np.abs(final - eq)) / np.max(np.abs(eq))
    i_min = tr.states[:, 1].min()

    beta_r0 = _bisect(lambda b: an.reproduction_number(high.with_(beta=b)) >= 1.0, 0.0, 5.0)
    beta_flip = _bisect(
        lambda b: an.stability_spectrum(high.with_(beta=b)).classification == "Unstable", 0.0, 5.0
    )
    gap = abs(beta_flip - beta_r0)

    ok = (ratio <= 1e-3 and resid <= 1e-6 and dist <= 1e-6 and i_min > 0.05 * eq[1]
          and gap <= 1e-10)
    record(5, ok, f"I(200)/I(0) = {ratio:.2e}; endemic residual {resid:.2e}, distance {dist:.2e}, "
                  f"min I / I* = {i_min / eq[1]:.3f}; flip-vs-R0 beta gap {gap:.1e}")


def _random_params(rng, endemic: bool) -> ModelParams:
    vals = {k: float(rng.uniform(0.01, 0.7)) for k in
            ("sigma", "nu", "gamma1", "gamma2", "gamma3", "gamma4",
             "tau", "tau1", "tau2", "tau3", "tau4", "phi1", "phi2")}
    vals["Pi"] = float(rng.uniform(0.1, 50.0))
    vals["beta"] = 1.0
    p = ModelParams(**vals)
    # rescale transmission so the draw lands on the requested side of the threshold
    target = rng.uniform(1.1, 6.0) if endemic else rng.uniform(0.05, 0.95)
    return p.with_(beta=target / an.reproduction_number(p))


def test_criterion_06_equilibrium_residuals():
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(100):
        p = _random_params(rng, endemic=True)
        scale = max(1.0, p.Pi)
        dfe = an.disease_free_equilibrium(p)
        ee = an.endemic_equilibrium(p)
        for rep in (dfe, ee):
            worst = max(worst, np.max(np.abs(rhs(p, rep.point))) / scale)
    record(6, worst <= 1e-9, f"worst max-abs residual / max(1, Pi) over 100 draws = {worst:.2e}")


def test_criterion_07_reproduction_number():
    rng = np.random.default_rng(7)
    worst = 0.0
    sn_max = -math.inf
    for k in range(100):
        p = _random_params(rng, endemic=bool(k % 2))
        r0 = an.reproduction_number(p)
        ngm = an.next_generation_matrices(p)
        radius = np.max(np.abs(np.linalg.eigvals(ngm.f_matrix @ np.linalg.inv(ngm.v_matrix))))
        worst = max(worst, abs(r0 - radius) / radius)
        sn_max = max(sn_max, an.strength_number(p))
    ok = worst <= 1e-12 and sn_max < 0
    record(7, ok, f"max relative |R0 - rho(FV^-1)| = {worst:.2e}; largest SN = {sn_max:.3e}")


def test_criterion_08_lyapunov():
    p = preset_params("endemic")
    eq = an.endemic_equilibrium(p).point
    at_eq = max(abs(an.lyapunov_value(p, eq, eq)), abs(an.lyapunov_derivative(p, eq, eq).dL_dt))
    h = 1e-3
    tr = integrate_classical(p, DEFAULT_INITIAL, Grid.from_t_end(h, 20.0))
    L = np.array([an.lyapunov_value(p, x, eq) for x in tr.states])
    dL = np.array([an.lyapunov_derivative(p, x, eq).dL_dt for x in tr.states])
    d2L = np.array([an.lyapunov_second_derivative(p, x, eq) for x in tr.states])
    fd1 = (-L[4:] + 8 * L[3:-1] - 8 * L[1:-3] + L[:-4]) / (12 * h)
    fd2 = (-L[4:] + 16 * L[3:-1] - 30 * L[2:-2] + 16 * L[1:-3] - L[:-4]) / (12 * h**2)
    e1 = np.max(np.abs(fd1 - dL[2:-2]))
    e2 = np.max(np.abs(fd2 - d2L[2:-2])) / np.max(np.abs(d2L))
    ok = at_eq <= 1e-10 and e1 <= 1e-6 and e2 <= 1e-4
    record(8, ok, f"|L|,|dL/dt| at E1* {at_eq:.1e}; dL/dt vs FD {e1:.2e}; "
                  f"d2L/dt2 vs FD (relative) {e2:.2e}")


def test_criterion_09_positivity_bounds():
    violations = 0
    for name in ("endemic", "disease_free"):
        p = preset_params(name)
        tr = integrate_classical(p, DEFAULT_INITIAL, Grid.from_t_end(0.01, 100.0))
        sup = an.SupBounds.from_trajectory(tr.states)
        for k in range(7):
            b = an.positivity_lower_bound(an.OperatorFamily.Classical, p, sup, k,
                                          tr.states[0, k], tr.t)
            violations += int(np.sum(tr.states[:, k] < b - 1e-9 * np.maximum(1.0, np.abs(b))))
            bc = an.positivity_lower_bound(an.OperatorFamily.Caputo, p, sup, k,
                                           tr.states[0, k], tr.t, alpha=1.0)
            caputo_gap = np.max(np.abs(bc - b))
            if caputo_gap > 1e-10:
                violations += 1
    record(9, violations == 0, f"{violations} violations; Caputo(alpha=1) equals Classical")


def test_criterion_10_convergence_order():
    p = ModelParams(**DECAY)
    lam = p.sigma + p.nu
    hs = np.array([0.04, 0.02, 0.01, 0.005])
    errs = []
    for h in hs:
        tr = integrate_ffp(p, UNIT_SP, Grid.from_t_end(h, 10.0), alpha=1.0, eta=1.0)
        errs.append(np.max(np.abs(tr.states[:, 0] - np.exp(-lam * tr.t))))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    record(10, abs(slope - 2.0) <= 0.3, f"log-log slope {slope:.3f}")


def test_criterion_11_determinism(tmp_path):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps({
        "kernel": "ffm", "alpha": 0.9, "eta": 0.95, "grid": {"h": 0.05, "t_end": 30},
        "outputs": {"csv_path": "run.csv", "svg_path": "run.svg"},
    }))
    blobs = []
    for _ in range(2):
        code = cli_main(["simulate", "--config", str(cfg)], out=io.StringIO(), err=io.StringIO())
        assert code == 0
        blobs.append(((tmp_path / "run.csv").read_bytes(), (tmp_path / "run.svg").read_bytes()))
        (tmp_path / "run.csv").unlink()
        (tmp_path / "run.svg").unlink()
    same = blobs[0] == blobs[1]
    record(11, same, f"CSV ({len(blobs[0][0])} B) and SVG ({len(blobs[0][1])} B) byte-identical")
