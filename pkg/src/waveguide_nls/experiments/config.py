"""Experiment configuration: defaults, normalization and validation.

A config is a JSON object with a versioned ``schema`` field.  Parsing fills
every omitted key from the per-kind defaults, so the normalized form is a
fixed point: ``normalize(normalize(c)) == normalize(c)``.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, asdict
import json
import math

from ..geometry import make_geometry
from ..projectors import check_dyadic

SCHEMA = "waveguide-nls/1"

D3_WAVEGUIDE = [["line", 8.0, 64], ["torus", 1.0, 16], ["torus", 1.0, 16]]
D4_WAVEGUIDE = [["line", 8.0, 64], ["torus", 1.0, 16], ["torus", 1.0, 16], ["torus", 1.0, 16]]
# scale-1 cube; grids are resized per sweep point
SWEEP_GEOMETRY = [["line", 1.0, 16], ["torus", 1.0, 16], ["torus", 1.0, 16]]

GAUSSIAN_DATA = {"profile": "gaussian", "h1_norm": 0.5, "width": [1.5, 0.8, 0.8],
                 "frequency": [0.5, 1.0, 0.0]}

DEFAULTS = {
    "strichartz": {
        "geometry": SWEEP_GEOMETRY,
        "ensemble": 64,
        "sweep": {"N": [2, 4, 8, 16], "p": [4.0]},
        "params": {"time_window": 1.0, "dt_factor": 0.25, "grid": "exact",
                   "precision": "single", "dirichlet": True},
        "tolerances": {"slope_margin": 0.1, "max_slope": None, "endpoint_slack": 0.1},
    },
    "bilinear": {
        "geometry": SWEEP_GEOMETRY,
        "ensemble": 32,
        "sweep": {"N1": [4, 8, 16], "N2": [1, 2]},
        "params": {"T": 0.5, "dt_factor": 0.25, "grid": "exact", "precision": "single",
                   "audit": True},
        "tolerances": {"max_slope": 0.15, "max_audit_constant": 4.0},
    },
    "conservation": {
        "geometry": D3_WAVEGUIDE,
        "equation": {"kappas": [1]},
        "solver": {"dt": 1e-3, "t_final": 1.0, "stride": 10, "padding": 2},
        "params": {"data": GAUSSIAN_DATA, "halving": True},
        "tolerances": {"mass": 1e-10, "energy": 1e-6, "momentum": 1e-8,
                       "ratio_min": 2.5, "ratio_max": 6.0},
    },
    "smalldata": {
        "geometry": D3_WAVEGUIDE,
        "equation": {"kappas": [1, -1]},
        "solver": {"dt": 1e-2, "t_final": 10.0, "stride": 10, "padding": 2},
        "params": {"data": dict(GAUSSIAN_DATA, h1_norm=0.05),
                   "bisect": False, "bisect_t_final": 1.0, "bisect_dt": 1e-3,
                   "bisect_steps": 4, "max_doublings": 10},
        "tolerances": {"growth": 2.0},
    },
    "focusing": {
        # torus-uniform, line-localized data: the flow reduces to the quintic
        # on the line, where negative energy forces collapse; the fine line
        # grid and short step resolve a several-fold rise of max|u|
        "geometry": [["line", 1.0, 512], ["torus", 1.0, 4], ["torus", 1.0, 4]],
        "solver": {"dt": 5e-5, "t_final": 1.0, "stride": 1000, "padding": 2},
        "params": {"data": {"profile": "gaussian", "width": [1.0, None, None],
                            "frequency": None},
                   "amplitudes": [0.5, 0.75, 1.0, 1.25, 1.5, 2.0]},
        "tolerances": {"focus_growth": 5.0, "defocus_growth": 2.0},
    },
    "picard": {
        "geometry": D3_WAVEGUIDE,
        "equation": {"kappas": [1]},
        "sweep": {"sizes": [0.0, 0.05, 0.25, 0.5, 1.0, 2.0, 3.0]},
        "params": {"data": dict(GAUSSIAN_DATA, h1_norm=None), "T": 0.5, "samples": 32,
                   "max_iters": 12, "tol": 1e-13, "padding": 1,
                   "check_size": 0.05, "splitstep_substeps": 16,
                   "large_data": []},
        "tolerances": {"factor": 0.5, "within": 8, "match": 1e-3},
    },
    "tail": {
        "geometry": D3_WAVEGUIDE,
        "equation": {"kappas": [1]},
        "solver": {"dt": 1e-3, "t_final": 0.5, "stride": 10, "padding": 2},
        "params": {"data": {"profile": "gaussian", "h1_norm": 1.0, "width": [2.0, 1.2, 1.2],
                            "frequency": None},
                   "delta": 0.05, "N": None},
        "tolerances": {"tail_factor": 2.0},
    },
}

KINDS = tuple(DEFAULTS)
EQUATION_KINDS = ("conservation", "smalldata", "focusing", "picard", "tail")
COMMON = {"seed": 0, "ensemble": 1, "geometry": None, "equation": {}, "solver": {},
          "sweep": {}, "params": {}, "tolerances": {},
          "output": {"report": "report.json", "csv": "records.csv"}}


class ConfigError(ValueError):
    """Raised with the offending key and the violated constraint."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    schema: str
    kind: str
    geometry: list
    seed: int
    ensemble: int
    equation: dict
    solver: dict
    sweep: dict
    params: dict
    tolerances: dict
    output: dict

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return parse_config(data)

    @property
    def geometry_obj(self):
        return make_geometry(self.geometry)


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "data":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _dyadic_list(key, values):
    if not isinstance(values, list) or not values:
        raise ConfigError(key, "must be a non-empty list")
    out = []
    for v in values:
        try:
            out.append(check_dyadic(v))
        except ValueError:
            raise ConfigError(key, f"N must be dyadic (a power of two), got {v!r}") from None
    return out


def _nyquist_check(key, geom, values, reach=1.0):
    ny = min(geom.nyquist())
    for v in values:
        if v * reach > ny / 2:
            raise ConfigError(key, f"N={v} is beyond Nyquist/2 = {ny / 2:g} of the configured grid")


def _positive(key, v):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
        raise ConfigError(key, f"must be a positive number, got {v!r}")


def parse_config(data) -> ExperimentConfig:
    """Default and validate a config given as a dict, JSON text or file path."""
    if isinstance(data, str):
        if data.lstrip().startswith("{"):
            data = json.loads(data)
        else:
            with open(data) as fh:
                data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError("schema", f"unsupported schema {schema!r}, expected {SCHEMA!r}")
    kind = data.get("kind")
    if kind not in DEFAULTS:
        raise ConfigError("kind", f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    unknown = set(data) - set(COMMON) - {"schema", "kind"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")
    merged = _merge(_merge(COMMON, DEFAULTS[kind]), {k: v for k, v in data.items()
                                                     if k not in ("schema", "kind")})
    merged = {"schema": SCHEMA, "kind": kind, **merged}
    cfg = ExperimentConfig(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    try:
        geom = make_geometry(cfg.geometry)
    except (TypeError, ValueError) as exc:
        raise ConfigError("geometry", str(exc)) from None
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigError("seed", f"must be a nonnegative integer, got {cfg.seed!r}")
    if not isinstance(cfg.ensemble, int) or isinstance(cfg.ensemble, bool) or cfg.ensemble < 1:
        raise ConfigError("ensemble", f"must be a positive integer, got {cfg.ensemble!r}")
    kind = cfg.kind
    if kind in EQUATION_KINDS and geom.d not in (3, 4):
        raise ConfigError("geometry", f"kind {kind!r} needs total dimension 3 or 4, got {geom.d}")
    if kind == "strichartz":
        Ns = _dyadic_list("sweep.N", cfg.sweep.get("N"))
        ps = cfg.sweep.get("p")
        if not isinstance(ps, list) or not ps:
            raise ConfigError("sweep.p", "must be a non-empty list")
        for p in ps:
            _positive("sweep.p", p)
            if p < 2:
                raise ConfigError("sweep.p", f"exponent must be >= 2, got {p}")
        if len(Ns) < 2:
            raise ConfigError("sweep.N", "slope fitting needs at least two N values")
        if cfg.params["grid"] not in ("exact", "fixed"):
            raise ConfigError("params.grid", "must be 'exact' or 'fixed'")
        if cfg.params["grid"] == "fixed":
            _nyquist_check("sweep.N", geom, Ns)
    elif kind == "bilinear":
        N1 = _dyadic_list("sweep.N1", cfg.sweep.get("N1"))
        N2 = _dyadic_list("sweep.N2", cfg.sweep.get("N2"))
        if len(N1) < 2:
            raise ConfigError("sweep.N1", "slope fitting needs at least two N1 values")
        for a in N2:
            if a > min(N1):
                raise ConfigError("sweep.N2", f"need N2 <= N1, got N2={a} > N1={min(N1)}")
        T = cfg.params.get("T")
        _positive("params.T", T)
        if T >= 1:
            raise ConfigError("params.T", f"bilinear window needs 0 < T < 1, got {T}")
        if cfg.params["grid"] not in ("exact", "fixed"):
            raise ConfigError("params.grid", "must be 'exact' or 'fixed'")
        if cfg.params["grid"] == "fixed":
            _nyquist_check("sweep.N1", geom, N1)
    elif kind == "picard":
        sizes = cfg.sweep.get("sizes")
        if not isinstance(sizes, list) or not sizes:
            raise ConfigError("sweep.sizes", "must be a non-empty list")
        T = cfg.params.get("T")
        _positive("params.T", T)
        if T > 1:
            raise ConfigError("params.T", f"Picard window must be <= 1, got {T}")
        for row in cfg.params.get("large_data", []):
            N = row.get("N")
            if N is not None:
                _nyquist_check("params.large_data.N", geom, _dyadic_list("params.large_data.N", [N]))
    elif kind == "tail":
        N = cfg.params.get("N")
        if N is not None:
            _nyquist_check("params.N", geom, _dyadic_list("params.N", [N]))
        _positive("params.delta", cfg.params.get("delta"))
    if kind in ("conservation", "smalldata", "picard", "tail"):
        kappas = cfg.equation.get("kappas")
        if not isinstance(kappas, list) or not kappas or any(k not in (1, -1) for k in kappas):
            raise ConfigError("equation.kappas", "must be a non-empty list of +1/-1")
    if cfg.solver:
        for key in ("dt", "t_final"):
            _positive(f"solver.{key}", cfg.solver.get(key))
        ratio = cfg.solver["t_final"] / cfg.solver["dt"]
        if abs(ratio - round(ratio)) > 1e-8 * ratio:
            raise ConfigError("solver.t_final", "t_final/dt must be an integer")
        if cfg.solver.get("padding") not in (1, 2):
            raise ConfigError("solver.padding", "padding factor must be 1 or 2")
        stride = cfg.solver.get("stride")
        if not isinstance(stride, int) or stride < 1:
            raise ConfigError("solver.stride", "must be a positive integer")


def default_config(kind: str) -> ExperimentConfig:
    return parse_config({"kind": kind})
