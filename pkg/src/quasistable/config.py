"""Run configuration: strict JSON with fixed blocks and defaults."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
import hashlib
import json
import math
from pathlib import Path

from .errors import QuasistableError
from .model import FormFactor, MassQuadrature, ModelParams, kappa_max_for


class ConfigError(QuasistableError, ValueError):
    """Malformed or inconsistent configuration; the message names the field."""


@dataclass(frozen=True)
class QuadratureBlock:
    panels: int = 24
    order: int = 20
    kappa_max: float | None = None
    refinement: int = 2
    vacuum_panels: int = 12
    vacuum_order: int = 16


@dataclass(frozen=True)
class SolverBlock:
    tol: float = 1e-12
    max_iter: int = 60
    seeds: tuple[complex, ...] = (complex(1.0, -0.05), complex(0.9, -0.01), complex(1.1, -0.02),
                                  complex(1.0, 0.0), complex(1.2, -0.1))
    continuation: str = "second-sheet"
    vacuum_tol: float = 1e-6
    vacuum_A: float = 0.0


@dataclass(frozen=True)
class ScanBlock:
    s_min: float = 0.3
    s_max: float = 3.0
    points: int = 271
    t_max: float = 20.0
    t_points: int = 201
    q0: tuple[float, ...] = (1.0, 2.0)


@dataclass(frozen=True)
class OutputBlock:
    dir: str = "out"
    precision: int = 17


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    quadrature: QuadratureBlock = field(default_factory=QuadratureBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    scan: ScanBlock = field(default_factory=ScanBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def quad(self) -> MassQuadrature:
        q = self.quadrature
        kmax = q.kappa_max if q.kappa_max is not None else kappa_max_for(self.model)
        return MassQuadrature(kmax, q.panels, q.order)

    def to_json(self) -> dict:
        out = asdict(self)
        out["solver"]["seeds"] = [[z.real, z.imag] for z in self.solver.seeds]
        out["scan"]["q0"] = list(self.scan.q0)
        return out

    def digest(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


_MODEL_KEYS = {"M", "m", "tau", "beta", "form_factor"}
_FF_KEYS = {"family", "power", "cutoff", "amplitude"}


def _check_keys(block: dict, allowed, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    for k in block:
        if k not in allowed:
            raise ConfigError(f"{where}.{k}: unknown key")


def _number(v, where: str, positive: bool = False, allow_zero: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    if positive and not (v > 0 or (allow_zero and v == 0)):
        raise ConfigError(f"{where}: must be {'non-negative' if allow_zero else 'positive'}, got {v!r}")
    return float(v)


def _integer(v, where: str, minimum: int = 1) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{where}: expected an integer >= {minimum}, got {v!r}")
    return v


def _text(v, where: str) -> str:
    if not isinstance(v, str) or not v:
        raise ConfigError(f"{where}: expected a non-empty string")
    return v


def _complex(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(_number(v, where))
    if isinstance(v, list) and len(v) == 2:
        return complex(_number(v[0], where), _number(v[1], where))
    raise ConfigError(f"{where}: expected a number or [re, im]")


def _model(d: dict) -> ModelParams:
    _check_keys(d, _MODEL_KEYS, "model")
    base = ModelParams()
    kw = {}
    for k in ("M", "m", "tau"):
        if k in d:
            kw[k] = _number(d[k], f"model.{k}", positive=True)
    if "beta" in d:
        kw["beta"] = _number(d["beta"], "model.beta")
    ff = FormFactor()
    if "form_factor" in d:
        f = d["form_factor"]
        _check_keys(f, _FF_KEYS, "model.form_factor")
        fk = {}
        if "family" in f:
            if f["family"] != "threshold-gaussian":
                raise ConfigError(f"model.form_factor.family: unknown family {f['family']!r}")
            fk["family"] = f["family"]
        if "power" in f:
            fk["power"] = _integer(f["power"], "model.form_factor.power")
        for k in ("cutoff", "amplitude"):
            if k in f:
                fk[k] = _number(f[k], f"model.form_factor.{k}", positive=True)
        ff = FormFactor(**{**asdict(ff), **fk})
    return ModelParams(**{"M": base.M, "m": base.m, "tau": base.tau, "beta": base.beta, **kw}, form_factor=ff)


def _block(cls, d: dict, name: str, conv: dict):
    _check_keys(d, set(conv), name)
    kw = {k: conv[k](v, f"{name}.{k}") for k, v in d.items()}
    return cls(**kw)


def _opt_positive(v, where):
    return None if v is None else _number(v, where, positive=True)


def parse_config(data: dict) -> RunConfig:
    """Build a RunConfig from parsed JSON; any problem raises ConfigError."""
    _check_keys(data, {"model", "quadrature", "solver", "scan", "output"}, "config")
    model = _model(data.get("model", {}))
    quad = _block(QuadratureBlock, data.get("quadrature", {}), "quadrature", {
        "panels": _integer, "order": lambda v, w: _integer(v, w, 2), "kappa_max": _opt_positive,
        "refinement": lambda v, w: _integer(v, w, 2), "vacuum_panels": _integer,
        "vacuum_order": lambda v, w: _integer(v, w, 2)})

    def seeds(v, w):
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{w}: expected a non-empty list")
        return tuple(_complex(x, f"{w}[{i}]") for i, x in enumerate(v))

    def continuation(v, w):
        if v not in ("second-sheet", "second-sheet-mirror"):
            raise ConfigError(f"{w}: expected 'second-sheet' or 'second-sheet-mirror'")
        return v

    solver = _block(SolverBlock, data.get("solver", {}), "solver", {
        "tol": lambda v, w: _number(v, w, positive=True), "max_iter": _integer, "seeds": seeds,
        "continuation": continuation, "vacuum_tol": lambda v, w: _number(v, w, positive=True),
        "vacuum_A": _number})

    def q0(v, w):
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{w}: expected a non-empty list")
        vals = tuple(_number(x, f"{w}[{i}]") for i, x in enumerate(v))
        if any(x < 1.0 for x in vals):
            raise ConfigError(f"{w}: q0 must be >= 1")
        return vals

    scan = _block(ScanBlock, data.get("scan", {}), "scan", {
        "s_min": lambda v, w: _number(v, w, positive=True), "s_max": lambda v, w: _number(v, w, positive=True),
        "points": lambda v, w: _integer(v, w, 2), "t_max": lambda v, w: _number(v, w, positive=True),
        "t_points": lambda v, w: _integer(v, w, 2), "q0": q0})
    if scan.s_max <= scan.s_min:
        raise ConfigError("scan.s_max: must exceed scan.s_min")

    def precision(v, w):
        p = _integer(v, w)
        if p > 17:
            raise ConfigError(f"{w}: at most 17 digits")
        return p

    output = _block(OutputBlock, data.get("output", {}), "output", {
        "dir": _text, "precision": precision})
    if solver.tol < 1e-12:
        raise ConfigError("solver.tol: must be >= 1e-12")
    return RunConfig(model, quad, solver, scan, output)


def _reject_constant(name: str):
    raise ConfigError(f"config: non-finite constant {name} not allowed")


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data)
