"""Trajectory CSV files and static SVG plots.

Both writers are deterministic: identical trajectories give identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError
from .model import COMPARTMENTS
from .solvers import Trajectory

CSV_HEADER = ("t",) + COMPARTMENTS + ("N",)


def _fmt(v: float) -> str:
    # 17 significant digits round-trips every double
    return format(float(v), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per node: ``t,S_p,I,I_p,I_n,I_c,R,D,N`` with LF line endings."""
    path = Path(path)
    y = traj.states
    n_col = y.sum(axis=1)
    lines = [",".join(CSV_HEADER)]
    for t, row, n in zip(traj.t, y, n_col):
        lines.append(",".join([_fmt(t), *map(_fmt, row), _fmt(n)]))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trajectory CSV to {path}: {exc.strerror or exc}") from exc


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(t, states)`` from a file written by :func:`write_trajectory_csv`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_HEADER:
            raise DomainError(f"{path}: unexpected header {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data[:, 0], data[:, 1:8]


# --------------------------------------------------------------------------
# SVG

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#7f7f7f")
_W, _H = 820, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 140, 30, 50
_MAX_POINTS = 1000


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick values covering ``[lo, hi]``."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.floor(lo / step + 1e-9)
    last = math.ceil(hi / step - 1e-9)
    return [round(k * step, 12) for k in range(first, last + 1)]


def _label(v: float) -> str:
    return format(v, ".6g")


def emit_plot_svg(traj: Trajectory, path, selection=None, title: str | None = None) -> None:
    """Write a line plot of the selected compartments over time.

    Parameters
    ----------
    traj : Trajectory
    path : path-like
    selection : sequence of str, optional
        Compartment names; all seven when omitted.
    title : str, optional
    """
    if selection is None:
        selection = COMPARTMENTS
    selection = tuple(selection)
    if not selection:
        raise DomainError("plot selection must name at least one compartment")
    bad = [s for s in selection if s not in COMPARTMENTS]
    if bad:
        raise DomainError(f"unknown compartment(s) in plot selection: {bad}")
    if len(traj.states) == 0:
        raise DomainError("cannot plot an empty trajectory")

    t = traj.t
    n = len(t)
    idx = np.unique(np.round(np.linspace(0, n - 1, min(n, _MAX_POINTS))).astype(int))
    cols = [COMPARTMENTS.index(s) for s in selection]
    data = traj.states[np.ix_(idx, cols)]

    xt = nice_ticks(float(t[0]), float(t[-1]))
    yt = nice_ticks(min(0.0, float(data.min())), float(data.max()))
    x0, x1 = xt[0], xt[-1]
    y0, y1 = yt[0], yt[-1]
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(v):
        return _LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return _TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append(
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    for v in xt:
        x = sx(v)
        out.append(f'<line class="xtick" x1="{x:.2f}" y1="{_TOP + ph}" x2="{x:.2f}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{_TOP + ph + 18}" text-anchor="middle">{_label(v)}</text>')
    for v in yt:
        y = sy(v)
        out.append(f'<line class="ytick" x1="{_LEFT - 5}" y1="{y:.2f}" x2="{_LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">{_label(v)}</text>')
    out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 12}" text-anchor="middle">t</text>')

    for k, name in enumerate(selection):
        color = _PALETTE[COMPARTMENTS.index(name)]
        pts = " ".join(f"{sx(tv):.2f},{sy(yv):.2f}" for tv, yv in zip(t[idx], data[:, k]))
        out.append(
            f'<polyline data-compartment="{name}" fill="none" stroke="{color}" '
            f'stroke-width="1.5" points="{pts}"/>'
        )

    lx = _W - _RIGHT + 15
    for k, name in enumerate(selection):
        color = _PALETTE[COMPARTMENTS.index(name)]
        ly = _TOP + 10 + 18 * k
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
