"""Run reports and per-trajectory diagnostics used by the command line."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis as an
from .config import ScenarioConfig
from .errors import DomainError
from .model import COMPARTMENTS
from .solvers import BACKEND, Grid, Trajectory, integrate


def run_scenario(cfg: ScenarioConfig, backend: str | None = None) -> Trajectory:
    grid = Grid.from_t_end(cfg.h, cfg.t_end)
    kw = {"backend": backend}
    if cfg.kernel != "classical":
        kw["t0_rule"] = cfg.t0_rule
    if cfg.kernel == "ffe":
        kw["cf_normalization"] = cfg.cf_normalization
    return integrate(cfg.kernel, cfg.params, cfg.initial, grid, cfg.alpha, cfg.eta, **kw)


def _inapplicable(exc: Exception) -> dict:
    return {"inapplicable": str(exc), "error": type(exc).__name__}


def _guard(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (DomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _inapplicable(exc)


def _state_dict(s) -> dict:
    return dict(zip(COMPARTMENTS, (float(v) for v in s)))


def _equilibrium_dict(rep: an.EquilibriumReport) -> dict:
    out = {
        "kind": rep.kind,
        "point": _state_dict(rep.point),
        "residual_max_abs": rep.residual_norm,
        "refinement_iterations": rep.refinement_iterations,
    }
    if rep.seed is not None:
        out["closed_form_seed"] = _state_dict(rep.seed)
    return out


def _stability_dict(rep: an.StabilityReport) -> dict:
    return {
        "classification": rep.classification,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in rep.eigenvalues],
        "threshold_eigenvalue": [rep.threshold_eigenvalue.real, rep.threshold_eigenvalue.imag],
        "unstable_count": rep.unstable_count,
    }


def _lipschitz_dict(rep: an.LipschitzReport) -> dict:
    return {
        "rho": list(rep.rho),
        "rho_bar": list(rep.rho_bar),
        "K": list(rep.k_conditions),
        "feasible": rep.feasible,
        "notes": list(rep.notes),
    }


def threshold_summary(p) -> dict:
    """R0, strength number, equilibria and local stability for one parameter set."""
    out = {
        "R0": _guard(an.reproduction_number, p),
        "strength_number": _guard(an.strength_number, p),
        "ngm_spectral_radius": _guard(lambda: an.next_generation_matrices(p).spectral_radius),
        "equilibria": {
            "disease_free": _guard(lambda: _equilibrium_dict(an.disease_free_equilibrium(p))),
            "endemic": _guard(lambda: _equilibrium_dict(an.endemic_equilibrium(p))),
        },
        "stability": _guard(lambda: _stability_dict(an.stability_spectrum(p))),
    }
    return out


def compare_bounds(cfg: ScenarioConfig, traj: Trajectory, family=None, rtol: float = 1e-9):
    """Per-node trajectory vs. positivity bound, with SupBounds from the trajectory.

    Returns ``(bounds, violations)`` where ``bounds`` has shape ``(nodes, 7)``
    and ``violations[c]`` counts nodes with ``x < bound - rtol*max(1, |bound|)``.
    A compartment whose bound is inapplicable gets NaN bounds and no count.
    """
    family = an.OperatorFamily(family or cfg.bound_check or an.OperatorFamily.Classical)
    sup = an.SupBounds.from_trajectory(traj.states)
    t = traj.t
    y = traj.states
    bounds = np.full_like(y, np.nan)
    violations: dict[str, int | str] = {}
    for k, name in enumerate(COMPARTMENTS):
        try:
            b = an.positivity_lower_bound(
                family, cfg.params, sup, name, float(y[0, k]), t,
                cf_normalization=cfg.cf_normalization, ab_norm=cfg.ab_normalization,
                fractal_c=cfg.fractal_c, policy=cfg.ml_policy,
            )
        except an.BoundInapplicable as exc:
            violations[name] = f"inapplicable: {exc}"
            continue
        bounds[:, k] = b
        slack = rtol * np.maximum(1.0, np.abs(b))
        violations[name] = int(np.sum(y[:, k] < b - slack))
    return bounds, violations


def lyapunov_columns(p, traj: Trajectory, equilibrium) -> np.ndarray:
    """``(nodes, 3)`` array of L, dL/dt, d2L/dt2; NaN where a component is not positive."""
    out = np.full((len(traj.states), 3), np.nan)
    for n, x in enumerate(traj.states):
        if np.all(x > 0):
            out[n, 0] = an.lyapunov_value(p, x, equilibrium)
            out[n, 1] = an.lyapunov_derivative(p, x, equilibrium).dL_dt
            out[n, 2] = an.lyapunov_second_derivative(p, x, equilibrium)
    return out


def wave_samples(p, traj: Trajectory, count: int = 11) -> list[dict]:
    idx = np.unique(np.round(np.linspace(0, len(traj.states) - 1, count)).astype(int))
    rows = []
    for n in idx:
        r = _guard(an.wave_window, p, traj.states[n])
        if isinstance(r, an.WaveWindowReport):
            r = {
                "t": float(traj.t[n]), "lower": r.lower, "upper": r.upper,
                "S_p": r.s_p_current, "in_window": r.in_window,
                "d2I": r.d2i, "d2I_kind": r.d2i_kind, "assumptions_hold": r.assumptions_hold,
            }
        rows.append(r)
    return rows


@dataclass
class RunReport:
    """Everything ``simulate`` learns about one run, as plain JSON-ready data."""

    scheme: dict
    thresholds: dict
    lipschitz: dict
    wave_window: list
    final_state: dict
    bound_check: dict | None = None
    wall_time_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "scheme": self.scheme,
            "thresholds": self.thresholds,
            "lipschitz": self.lipschitz,
            "wave_window": self.wave_window,
            "final_state": self.final_state,
            "wall_time_s": self.wall_time_s,
        }
        if self.bound_check is not None:
            d["bound_check"] = self.bound_check
        d.update(self.extra)
        return _sanitize(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sanitize(obj):
    """Plain types only; non-finite numbers become an explicit inapplicable marker."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else {"inapplicable": f"non-finite value {v!r}"}
    return obj


def build_run_report(cfg: ScenarioConfig, traj: Trajectory, wall_time: float,
                     backend: str | None = None) -> RunReport:
    p = cfg.params
    scheme = {
        "kernel": traj.kernel.value,
        "alpha": traj.alpha,
        "eta": traj.eta,
        "h": traj.grid.h,
        "n_steps": traj.grid.n_steps,
        "t_end": traj.grid.t_end,
        "backend": backend or BACKEND,
        "t0_rule": cfg.t0_rule,
        "cf_normalization": cfg.cf_normalization,
    }
    sup = an.SupBounds.from_trajectory(traj.states)
    lip = _guard(lambda: _lipschitz_dict(an.lipschitz_constants(p, sup)))
    bc = None
    if cfg.bound_check is not None:
        _, viol = compare_bounds(cfg, traj)
        bc = {"family": cfg.bound_check.value, "violations": viol}
    return RunReport(
        scheme=scheme,
        thresholds=threshold_summary(p),
        lipschitz=lip,
        wave_window=wave_samples(p, traj),
        final_state=_state_dict(traj.states[-1]),
        bound_check=bc,
        wall_time_s=wall_time,
    )


def flatten(d, prefix: str = "") -> list[str]:
    """``key.sub = value`` lines for structured text output."""
    lines = []
    if isinstance(d, dict):
        for k, v in d.items():
            lines += flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(d, list) and d and isinstance(d[0], (dict, list)):
        for i, v in enumerate(d):
            lines += flatten(v, f"{prefix}[{i}]")
    else:
        lines.append(f"{prefix} = {_scalar(d)}")
    return lines


def _scalar(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    return str(v)


__all__ = [
    "RunReport", "build_run_report", "compare_bounds", "flatten", "lyapunov_columns",
    "run_scenario", "threshold_summary", "wave_samples",
]
