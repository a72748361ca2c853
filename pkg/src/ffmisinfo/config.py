"""Scenario configuration: JSON schema, validation and round-trip serialisation.

A scenario file is a JSON object.  Every key is optional::

    {
      "preset": "endemic",
      "params": {"beta": 0.7, "nu": 0.1},
      "initial": {"S_p": 5, "I": 1, "I_p": 0.1, "I_n": 0.1, "I_c": 0.1, "R": 0.1, "D": 0.1},
      "kernel": "classical",
      "alpha": 1.0,
      "eta": 1.0,
      "grid": {"h": 0.01, "t_end": 100},
      "outputs": {"csv_path": "trajectory.csv", "svg_path": null,
                  "report_path": null, "svg_compartments": null},
      "bound_check": null,
      "ml_policy": {},
      "cf_normalization": 1.0,
      "ab_normalization": null,
      "fractal_c": 1.0,
      "t0_rule": "first_node"
    }

``params`` overrides individual rates of the named preset.  Relative output
paths are resolved against the directory of the scenario file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .analysis import OperatorFamily
from .errors import ConfigError, DomainError
from .model import COMPARTMENTS, RATE_NAMES, ModelParams, State
from .presets import DEFAULT_INITIAL, DEFAULT_PRESET, PRESETS
from .special import MLEvalPolicy

KERNELS = ("classical", "ffp", "ffe", "ffm")
MAX_NODES = 10**7

_TOP_KEYS = {
    "preset", "params", "initial", "kernel", "alpha", "eta", "grid", "outputs",
    "bound_check", "ml_policy", "cf_normalization", "ab_normalization",
    "fractal_c", "t0_rule",
}
_OUTPUT_KEYS = ("csv_path", "svg_path", "report_path", "svg_compartments")


@dataclass(frozen=True)
class Outputs:
    csv_path: str = "trajectory.csv"
    svg_path: str | None = None
    report_path: str | None = None
    svg_compartments: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    initial: State = DEFAULT_INITIAL
    h: float = 0.01
    t_end: float = 100.0
    kernel: str = "classical"
    outputs: Outputs = Outputs()
    bound_check: OperatorFamily | None = None
    ml_policy: MLEvalPolicy = MLEvalPolicy()
    cf_normalization: float = 1.0
    ab_normalization: float | None = None
    fractal_c: float = 1.0
    t0_rule: str = "first_node"
    base_dir: Path = field(default=Path("."), compare=False)

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def eta(self) -> float:
        return self.params.eta

    def resolve(self, path: str | None) -> Path | None:
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _num(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return v


def _positive(value, name: str) -> float:
    v = _num(value, name)
    if v <= 0:
        raise ConfigError(f"{name} must be > 0, got {value!r}")
    return v


def _obj(value, name: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be an object, got {type(value).__name__}")
    return value


def _unknown(d: dict, allowed, where: str) -> None:
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _parse_initial(raw) -> State:
    if isinstance(raw, list):
        if len(raw) != 7:
            raise ConfigError(f"initial must list 7 values, got {len(raw)}")
        vals = [_num(v, f"initial[{k}]") for k, v in enumerate(raw)]
    else:
        raw = _obj(raw, "initial")
        _unknown(raw, COMPARTMENTS, "initial")
        missing = [c for c in COMPARTMENTS if c not in raw]
        if missing:
            raise ConfigError(f"initial is missing {', '.join(missing)}")
        vals = [_num(raw[c], f"initial.{c}") for c in COMPARTMENTS]
    for c, v in zip(COMPARTMENTS, vals):
        if v < 0:
            raise ConfigError(f"initial.{c} must be >= 0, got {v!r}")
    return State(*vals)


def config_from_dict(doc: dict, base_dir: Path | str = ".") -> ScenarioConfig:
    """Validate a decoded scenario document and fill defaults."""
    doc = _obj(doc, "config")
    _unknown(doc, _TOP_KEYS, "config")

    preset = doc.get("preset", DEFAULT_PRESET)
    if preset not in PRESETS:
        raise ConfigError(f"preset must be one of {sorted(PRESETS)}, got {preset!r}")
    raw_params = _obj(doc.get("params", {}), "params")
    _unknown(raw_params, RATE_NAMES, "params")
    values = dict(PRESETS[preset])
    values.update({k: _num(v, f"params.{k}") for k, v in raw_params.items()})
    values["alpha"] = _num(doc.get("alpha", 1.0), "alpha")
    values["eta"] = _num(doc.get("eta", 1.0), "eta")
    try:
        params = ModelParams(**values)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    initial = _parse_initial(doc["initial"]) if "initial" in doc else DEFAULT_INITIAL

    grid = _obj(doc.get("grid", {}), "grid")
    _unknown(grid, ("h", "t_end"), "grid")
    h = _positive(grid.get("h", 0.01), "grid.h")
    t_end = _positive(grid.get("t_end", 100.0), "grid.t_end")
    if t_end / h > MAX_NODES:
        raise ConfigError(f"grid.t_end / grid.h must be <= {MAX_NODES:.0e}, got {t_end / h:.3g}")

    kernel = doc.get("kernel", "classical")
    if not isinstance(kernel, str) or kernel.lower() not in KERNELS:
        raise ConfigError(f"kernel must be one of {', '.join(KERNELS)}, got {kernel!r}")
    kernel = kernel.lower()

    out_raw = _obj(doc.get("outputs", {}), "outputs")
    _unknown(out_raw, _OUTPUT_KEYS, "outputs")
    for key in ("csv_path", "svg_path", "report_path"):
        v = out_raw.get(key)
        if v is not None and not isinstance(v, str):
            raise ConfigError(f"outputs.{key} must be a string or null, got {v!r}")
    sel = out_raw.get("svg_compartments")
    if sel is not None:
        if not isinstance(sel, list) or not sel:
            raise ConfigError("outputs.svg_compartments must be a nonempty list")
        bad = [s for s in sel if s not in COMPARTMENTS]
        if bad:
            raise ConfigError(f"outputs.svg_compartments has unknown compartment(s) {bad}")
        sel = tuple(sel)
    outputs = Outputs(
        csv_path=out_raw.get("csv_path") or "trajectory.csv",
        svg_path=out_raw.get("svg_path"),
        report_path=out_raw.get("report_path"),
        svg_compartments=sel,
    )

    bc = doc.get("bound_check")
    if bc is not None:
        try:
            bc = OperatorFamily(bc)
        except ValueError:
            names = [f.value for f in OperatorFamily]
            raise ConfigError(f"bound_check must be one of {names}, got {bc!r}") from None

    mlp = _obj(doc.get("ml_policy", {}), "ml_policy")
    known = {f.name for f in fields(MLEvalPolicy)}
    _unknown(mlp, known, "ml_policy")
    try:
        policy = MLEvalPolicy(**{
            k: (int(_num(v, f"ml_policy.{k}")) if k in ("series_term_cap", "asymptotic_order")
                else _num(v, f"ml_policy.{k}"))
            for k, v in mlp.items()
        })
    except DomainError as exc:
        raise ConfigError(f"ml_policy: {exc}") from None

    ab = doc.get("ab_normalization")
    t0_rule = doc.get("t0_rule", "first_node")
    if t0_rule not in ("first_node", "zero"):
        raise ConfigError(f"t0_rule must be 'first_node' or 'zero', got {t0_rule!r}")

    return ScenarioConfig(
        params=params,
        initial=initial,
        h=h,
        t_end=t_end,
        kernel=kernel,
        outputs=outputs,
        bound_check=bc,
        ml_policy=policy,
        cf_normalization=_positive(doc.get("cf_normalization", 1.0), "cf_normalization"),
        ab_normalization=None if ab is None else _positive(ab, "ab_normalization"),
        fractal_c=_positive(doc.get("fractal_c", 1.0), "fractal_c"),
        t0_rule=t0_rule,
        base_dir=Path(base_dir),
    )


def parse_config(path) -> ScenarioConfig:
    """Read and validate a JSON scenario file.

    Raises
    ------
    OSError
        The file cannot be read.
    ConfigError
        The document is malformed or violates the schema.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return config_from_dict(doc, base_dir=path.parent)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Explicit document that parses back to an equal config."""
    p = cfg.params
    return {
        "params": {k: getattr(p, k) for k in RATE_NAMES},
        "initial": dict(zip(COMPARTMENTS, cfg.initial)),
        "kernel": cfg.kernel,
        "alpha": p.alpha,
        "eta": p.eta,
        "grid": {"h": cfg.h, "t_end": cfg.t_end},
        "outputs": {
            "csv_path": cfg.outputs.csv_path,
            "svg_path": cfg.outputs.svg_path,
            "report_path": cfg.outputs.report_path,
            "svg_compartments": None if cfg.outputs.svg_compartments is None
            else list(cfg.outputs.svg_compartments),
        },
        "bound_check": None if cfg.bound_check is None else cfg.bound_check.value,
        "ml_policy": {f.name: getattr(cfg.ml_policy, f.name) for f in fields(MLEvalPolicy)},
        "cf_normalization": cfg.cf_normalization,
        "ab_normalization": cfg.ab_normalization,
        "fractal_c": cfg.fractal_c,
        "t0_rule": cfg.t0_rule,
    }


def write_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")


def with_overrides(cfg: ScenarioConfig, **kw) -> ScenarioConfig:
    """Copy with command-line overrides (``kernel``, ``alpha``, ``eta``, ``h``, ``t_end``) re-validated."""
    doc = config_to_dict(cfg)
    for key, value in kw.items():
        if value is None:
            continue
        if key in ("h", "t_end"):
            doc["grid"][key] = value
        elif key in ("kernel", "alpha", "eta"):
            doc[key] = value
        else:
            raise ConfigError(f"unsupported override {key!r}")
    return config_from_dict(doc, base_dir=cfg.base_dir)


__all__ = [
    "KERNELS", "Outputs", "ScenarioConfig", "config_from_dict", "config_to_dict",
    "parse_config", "with_overrides", "write_config",
]
