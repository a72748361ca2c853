"""Illustrative parameter sets.

The rates are chosen inside ``[0.01, 0.7]`` to give one scenario on each side
of the spreading threshold.  They are not fitted to data.

=============  =====  ======
preset         beta   R0
=============  =====  ======
endemic        0.6    1.25
disease_free   0.2    0.4167
=============  =====  ======

All other rates are shared: ``Pi = 1``, ``sigma = 0.05``, ``nu = 0.1``,
``gamma1..3 = 0.05``, ``gamma4 = 0.02``, ``tau = 0.02``, ``tau1..4 = 0.05``,
``phi1 = phi2 = 0.03``.  Then ``j1 = 0.32`` and ``Pi / nu = 10``.
"""

from __future__ import annotations

from .model import ModelParams, State

_SHARED = dict(
    Pi=1.0,
    sigma=0.05,
    nu=0.1,
    gamma1=0.05,
    gamma2=0.05,
    gamma3=0.05,
    gamma4=0.02,
    tau=0.02,
    tau1=0.05,
    tau2=0.05,
    tau3=0.05,
    tau4=0.05,
    phi1=0.03,
    phi2=0.03,
)

PRESETS: dict[str, dict[str, float]] = {
    "endemic": {**_SHARED, "beta": 0.6},
    "disease_free": {**_SHARED, "beta": 0.2},
}

DEFAULT_PRESET = "endemic"

# total 6.5, below the asymptotic population Pi / nu = 10
DEFAULT_INITIAL = State(5.0, 1.0, 0.1, 0.1, 0.1, 0.1, 0.1)


def preset_params(name: str = DEFAULT_PRESET, **overrides) -> ModelParams:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ModelParams(**{**PRESETS[name], **overrides})
