"""Experiment configuration: flat key-value files, JSON files, CLI overrides.

The flat format is one `key = value` pair per line; `#` starts a comment.
Values are parsed as int, float, bare string, or a comma-separated list of
ints/floats (used for n_grid and gamma_grid). The JSON alternative is an
object with the same keys. CLI flags override file values.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

EXPERIMENTS = ("rate", "regret", "stability", "sparse", "regime", "margin")

RATE_LEARNERS = ("erm", "regularized_erm", "mirror_descent")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str = ""
    distribution: str = ""
    learner: str = ""
    geometry: str = "euclidean"
    loss: str = ""
    n_grid: tuple = ()
    replicates: int = 0
    seed: int = 1234
    out: str = ""
    tol: float = 1e-10
    delta: float = 0.05
    bound_k: float = 1e5
    dim: int = 0
    budget: float = 0.0
    sigma: float = 0.5
    x_scale: float = 5.0
    sparsity_k: int = 4
    noise: float = 0.0
    eta_scale: float = 8.0
    lambda_policy: str = "oracle"
    lbar_mode: str = "exact"
    methods: tuple = ()
    gamma_grid: tuple = ()
    label_noise: float = 0.05
    check_floor_factor: float = math.nan
    check_slope_min: float = math.nan
    check_slope_max: float = math.nan

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["n_grid"] = list(self.n_grid)
        out["gamma_grid"] = list(self.gamma_grid)
        out["methods"] = list(self.methods)
        return out


_TUPLE_FIELDS = {"n_grid", "gamma_grid", "methods"}
_INT_FIELDS = {"replicates", "seed", "dim", "sparsity_k"}
_STR_FIELDS = {
    "experiment", "distribution", "learner", "geometry", "loss", "out",
    "lambda_policy", "lbar_mode",
}


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_kv_text(text: str) -> dict:
    """Parse the flat key-value grammar into a raw dict."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if "," in value:
            raw[key] = [_parse_scalar(v.strip()) for v in value.split(",") if v.strip()]
        else:
            raw[key] = _parse_scalar(value)
    return raw


def config_from_dict(raw: dict) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    cfg = ExperimentConfig()
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {key!r}")
        if key in _TUPLE_FIELDS:
            if not isinstance(value, (list, tuple)):
                value = [value]
            value = tuple(value)
        elif key in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ConfigError(f"{key} must be an integer, got {value}")
            value = int(value)
        elif key in _STR_FIELDS:
            value = str(value)
        else:
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be numeric, got {value!r}") from None
        setattr(cfg, key, value)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """Load a config file; JSON when the content starts with '{', else flat."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("JSON config must be an object")
        return config_from_dict(raw)
    return config_from_dict(parse_kv_text(text))


def apply_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg


_DIST_DEFAULTS = {
    # distribution -> (learner, n_grid, floor factor, slope window)
    "separable": ("mirror_descent", tuple(2**k for k in range(5, 13)), math.nan, (math.nan, -0.85)),
    "hardA": ("erm", tuple(2**k for k in range(4, 11)), 1.0, (-0.65, -0.35)),
    "hardB": ("erm", tuple(2**k for k in range(6, 14)), 0.5, (-0.65, -0.35)),
    "hardC": ("erm", tuple(2**k for k in range(6, 14)), math.nan, (math.nan, math.nan)),
}


def with_defaults(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill experiment-specific defaults into unset fields, then validate."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {cfg.experiment!r}; expected one of {EXPERIMENTS}"
        )
    exp = cfg.experiment
    if exp == "rate":
        if not cfg.distribution:
            cfg.distribution = "separable"
        family = cfg.distribution.split(":", 1)[0]
        if family not in _DIST_DEFAULTS:
            raise ConfigError(f"unknown rate distribution: {cfg.distribution!r}")
        learner, grid, floor, window = _DIST_DEFAULTS[family]
        cfg.learner = cfg.learner or learner
        if cfg.learner not in RATE_LEARNERS:
            raise ConfigError(f"unknown learner: {cfg.learner!r}")
        cfg.n_grid = cfg.n_grid or grid
        cfg.replicates = cfg.replicates or 50
        cfg.dim = cfg.dim or 16
        if math.isnan(cfg.check_floor_factor):
            cfg.check_floor_factor = floor
        if math.isnan(cfg.check_slope_min):
            cfg.check_slope_min = window[0]
        if math.isnan(cfg.check_slope_max):
            cfg.check_slope_max = window[1]
    elif exp == "regret":
        cfg.n_grid = cfg.n_grid or (10, 100, 1000, 10000)
        cfg.replicates = cfg.replicates or 10
        cfg.dim = cfg.dim or 8
        cfg.budget = cfg.budget or 1.0
        cfg.methods = cfg.methods or ("iid_separable", "fixed_adversarial", "adaptive")
        bad = set(cfg.methods) - {"iid_separable", "fixed_adversarial", "adaptive"}
        if bad:
            raise ConfigError(f"unknown regret stream kinds: {sorted(bad)}")
    elif exp == "stability":
        cfg.distribution = cfg.distribution or "hardB:0.1"
        cfg.n_grid = cfg.n_grid or (64,)
        cfg.replicates = cfg.replicates or 200
        cfg.budget = cfg.budget or 1.0 / math.sqrt(2.0)
    elif exp == "sparse":
        cfg.dim = cfg.dim or 256
        cfg.n_grid = cfg.n_grid or tuple(2**k for k in range(7, 13))
        cfg.replicates = cfg.replicates or 20
        cfg.budget = cfg.budget or 2.0 * math.sqrt(cfg.sparsity_k)
        cfg.methods = cfg.methods or ("entropy_md", "entropy_regerm", "l1_erm")
        if math.isnan(cfg.check_slope_max):
            cfg.check_slope_max = -0.85
    elif exp == "regime":
        cfg.dim = cfg.dim or 50
        cfg.n_grid = cfg.n_grid or tuple(2**k for k in range(3, 13))
        cfg.replicates = cfg.replicates or 12
        cfg.budget = cfg.budget or 1.0
        if cfg.lambda_policy not in ("oracle", "formula"):
            raise ConfigError(f"unknown lambda_policy: {cfg.lambda_policy!r}")
    elif exp == "margin":
        cfg.dim = cfg.dim or 10
        cfg.n_grid = cfg.n_grid or (2048,)
        cfg.replicates = cfg.replicates or 1
        cfg.budget = cfg.budget or 1.0
        cfg.gamma_grid = cfg.gamma_grid or (0.05, 0.1, 0.2, 0.4, 0.8)

    if cfg.loss:
        from ..losses import loss_by_name

        try:
            loss_by_name(cfg.loss)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if not cfg.n_grid or any(
        b <= a for a, b in zip(cfg.n_grid, cfg.n_grid[1:])
    ):
        raise ConfigError(f"n_grid must be strictly increasing, got {cfg.n_grid}")
    if any(int(n) != n or n < 1 for n in cfg.n_grid):
        raise ConfigError(f"n_grid entries must be positive integers, got {cfg.n_grid}")
    cfg.n_grid = tuple(int(n) for n in cfg.n_grid)
    if cfg.replicates < 1:
        raise ConfigError(f"replicates must be >= 1, got {cfg.replicates}")
    if not 0 < cfg.delta < 1:
        raise ConfigError(f"delta must lie in (0, 1), got {cfg.delta}")
    return cfg
