"""Batch front-end.

    quasistable <command> [--config PATH] [--out DIR] [--seeds s1,s2,...] [--threads N]

Exit codes: 0 success, 1 I/O or configuration error, 2 numerical failure,
3 identity-suite failure.
"""
from __future__ import annotations

import argparse
from concurrent.futures import ThreadPoolExecutor
import math
import os
from pathlib import Path
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from .config import ConfigError, RunConfig, load_config
from .errors import ConvergenceError, DomainError, IllConditioned, SingularityError, WindingError
from .kinematics import FourVector, VelocityVector
from .model import Location, ModelParams, SheetPoint, green
from .resonance import GamowState, PoleResult, find_pole, gamow_amplitude, smatrix, width_convention_gap
from .semigroup import PoincareElement, WaveGrid, act, compose, gamow_transform, in_causal_semigroup
from .vacuum import solve_f2, solve_f3, tail_ratio, vacuum_quadrature, vacuum_residuals, VacuumKernels
from .verify import run_suite

COMMANDS = ("verify", "greens", "poles", "decay", "vacuum", "semigroup-demo")
THREADS_ENV = "QUASISTABLE_THREADS"
NUMERIC_ERRORS = (ConvergenceError, SingularityError, WindingError, IllConditioned, DomainError)


class NumericFailure(Exception):
    """A command ran but its numerics did not deliver; exit code 2."""


class SuiteFailure(Exception):
    """An identity check exceeded its tolerance; exit code 3."""


# ---- output -----------------------------------------------------------------

def _fmt(x: float, digits: int) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}g}"


def _json(obj, digits: int, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {_json(obj[k], digits, indent + 1)}' for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _json(v, digits, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _fmt(x, digits) if math.isfinite(x) else f'"{_fmt(x, digits)}"'
    if isinstance(obj, (complex, np.complexfloating)):
        return _json([obj.real, obj.imag], digits, indent)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_json(path: Path, obj, cfg: RunConfig) -> None:
    path.write_text(_json({"config_sha256": cfg.digest(), **obj}, cfg.output.precision) + "\n", encoding="utf-8")


def write_csv(path: Path, header: list[str], rows, cfg: RunConfig) -> None:
    d = cfg.output.precision
    lines = [f"# config_sha256={cfg.digest()}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v, d) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---- commands ---------------------------------------------------------------

def _pole_dict(p: PoleResult) -> dict:
    return {
        "s_R": p.s_R, "residue": p.residue, "M_R": p.M_R, "Gamma_R": p.Gamma_R,
        "Mbar_R": p.Mbar_R, "Gammabar_R": p.Gammabar_R, "lifetime": p.lifetime,
        "width_convention_gap": width_convention_gap(p), "iterations": p.iterations,
        "converged": p.converged, "final_residual": p.final_residual, "sheet": p.sheet,
        "decaying": bool(p.Gamma_R > 0),
    }


def _continuation(cfg: RunConfig) -> Location:
    return Location.SECOND_SHEET if cfg.solver.continuation == "second-sheet" else Location.SECOND_SHEET_MIRROR


def _hunt(cfg: RunConfig, seeds, threads: int) -> list[tuple[complex, PoleResult | None, str]]:
    quad = cfg.quad()
    loc = _continuation(cfg)

    def one(seed):
        try:
            return seed, find_pole(cfg.model, quad, seed, cfg.solver.tol, cfg.solver.max_iter, loc), ""
        except NUMERIC_ERRORS as exc:
            return seed, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, seeds))


def _cluster(found: list[PoleResult], radius: float = 1e-8) -> list[PoleResult]:
    out: list[PoleResult] = []
    for p in found:
        if all(abs(p.s_R - q.s_R) > radius for q in out):
            out.append(p)
    return out


def cmd_verify(cfg: RunConfig, out: Path, threads: int, seeds) -> None:
    checks = run_suite(cfg.model, cfg.quad())
    report = {"checks": [{"name": c.name, "residual": c.residual, "tol": c.tol, "passed": c.passed}
                         for c in checks],
              "all_passed": all(c.passed for c in checks)}
    write_json(out / "verify.json", report, cfg)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise SuiteFailure("identity checks failed: " + ", ".join(failed))


def cmd_greens(cfg: RunConfig, out: Path, threads: int, seeds) -> None:
    p = cfg.model
    sc = cfg.scan
    if sc.s_min <= p.threshold:
        raise ConfigError(f"scan.s_min: must exceed the threshold 4m^2 = {p.threshold!r}")
    quad = cfg.quad()
    grid = np.linspace(sc.s_min, sc.s_max, sc.points)

    def row(s):
        g = green(p, SheetPoint.upper(float(s)), quad)
        sm = smatrix(p, quad, SheetPoint.upper(float(s)))
        return (s, g.real, g.imag, abs(g) ** 2, sm.real, sm.imag)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(row, grid))
    write_csv(out / "greens.csv", ["s", "re_G_plus", "im_G_plus", "abs2_G_plus", "re_S", "im_S"], rows, cfg)


def cmd_poles(cfg: RunConfig, out: Path, threads: int, seeds) -> None:
    results = _hunt(cfg, seeds, threads)
    found = [r for _, r, _ in results if r is not None]
    report = {
        "continuation": cfg.solver.continuation,
        "runs": [{"seed": s, **({"pole": _pole_dict(r)} if r else {"error": e})} for s, r, e in results],
        "poles": [_pole_dict(r) for r in _cluster(found)],
    }
    write_json(out / "poles.json", report, cfg)
    if not found:
        raise NumericFailure("no seed converged to a pole")


def _first_decaying(cfg: RunConfig, seeds, threads: int) -> PoleResult:
    results = _hunt(cfg, seeds, threads)
    found = [r for _, r, _ in results if r is not None]
    if not found:
        raise NumericFailure("no seed converged to a pole")
    for r in found:
        if r.Gamma_R > 0:
            return r
    raise NumericFailure(f"the pole at s = {found[0].s_R!r} does not decay (Gamma_R <= 0)")


def cmd_decay(cfg: RunConfig, out: Path, threads: int, seeds) -> None:
    pole = _first_decaying(cfg, seeds, threads)
    ts = np.linspace(0.0, cfg.scan.t_max, cfg.scan.t_points)
    rows = []
    for q0 in cfg.scan.q0:
        state = GamowState(pole.s_R, VelocityVector(0.0, 0.0, math.sqrt(q0 * q0 - 1.0)))
        for t in ts:
            amp = gamow_amplitude(state, float(t))
            prob = abs(amp) ** 2
            rows.append((q0, t, prob, math.log(prob), math.exp(-pole.Gamma_R * q0 * t)))
    write_csv(out / "decay.csv", ["q0", "t", "survival", "log_survival", "exp_minus_Gamma_q0_t"], rows, cfg)
    write_json(out / "decay.json", {"pole": _pole_dict(pole)}, cfg)


def cmd_vacuum(cfg: RunConfig, out: Path, threads: int, seeds) -> None:
    p = cfg.model
    quad = vacuum_quadrature(p, cfg.quadrature.vacuum_panels, cfg.quadrature.vacuum_order)
    s2 = solve_f2(p, quad, cfg.solver.vacuum_A, tol=None)
    s3 = solve_f3(p, quad, s2, tol=None)
    kern = VacuumKernels(s2.kappa, s2.mu, s2.values, s3.values, cfg.solver.vacuum_A, s2.residual,
                         s3.residual, s3.asymmetry, quad)
    res = vacuum_residuals(p, quad, kern)
    write_csv(out / "vacuum_f2.csv", ["kappa", "mu", "re_f2", "im_f2"],
              zip(kern.kappa, kern.mu, kern.f2.real, kern.f2.imag), cfg)
    rows = ((kern.mu[k], kern.mu[i], kern.f3[k, i].real, kern.f3[k, i].imag)
            for k in range(kern.mu.size) for i in range(kern.mu.size))
    write_csv(out / "vacuum_f3.csv", ["mu_first", "mu_second", "re_f3", "im_f3"], rows, cfg)
    tol = cfg.solver.vacuum_tol
    report = {
        "nodes": int(kern.mu.size), "A": kern.A,
        "residual_f2": kern.residual_f2, "residual_f3": kern.residual_f3,
        "asymmetry_f3": kern.asymmetry_f3, "condition_f2": s2.condition,
        "conditions_minus": list(res["minus"]), "conditions_plus": list(res["plus"]),
        "tail_ratio_f2": tail_ratio(p, kern), "tol": tol,
        "converged": bool(kern.residual_f2 <= tol and kern.residual_f3 <= tol),
    }
    write_json(out / "vacuum.json", report, cfg)
    if not report["converged"]:
        raise NumericFailure(f"vacuum residuals {kern.residual_f2:.3g}, {kern.residual_f3:.3g} above {tol:.3g}")


def _demo_grid() -> WaveGrid:
    q1 = np.linspace(-0.3, 0.3, 4)
    q2 = np.linspace(-0.3, 0.3, 4)
    q3 = np.linspace(-3.0, 3.0, 1601)
    s = np.array([0.5, 1.0, 2.0])

    def psi(a, b, c, s):
        return np.exp(-(a * a + b * b + c * c)) * (1.0 + 0.3j * c) / (s + 1j)

    return WaveGrid.from_function(psi, q1, q2, q3, s, "-", 0.25)


def composition_error() -> float:
    """act(act(psi, g1), g2) against act(psi, g2 g1) on the demo grid."""
    wg = _demo_grid()
    g1 = PoincareElement((0.0, 0.0, 0.1), (0.0, 0.0, 0.0), FourVector(0.5, 0.0, 0.0, 0.2))
    g2 = PoincareElement((0.0, 0.0, -0.15), (0.0, 0.0, 0.0), FourVector(0.7, 0.0, 0.0, -0.3))
    mid_axes = (wg.q1, wg.q2, np.linspace(-2.5, 2.5, 800))
    final_axes = (wg.q1, wg.q2, np.linspace(-1.5, 1.5, 61))
    two = act(act(wg, g1, targets=mid_axes), g2, targets=final_axes)
    one = act(wg, compose(g2, g1), targets=final_axes)
    return float(np.max(np.abs(two.psi - one.psi)))


def random_causal(rng: np.random.Generator) -> PoincareElement:
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    a0 = rng.uniform(0.0, 5.0)
    a = FourVector(a0, *(a0 * rng.uniform(0.0, 1.0) * d))
    return PoincareElement(tuple(rng.uniform(-1.0, 1.0, 3)), tuple(rng.uniform(-1.0, 1.0, 3)), a)


def cmd_semigroup_demo(cfg: RunConfig, out: Path, threads: int, seeds) -> None:
    rng = np.random.default_rng(7)
    comp = composition_error()
    try:
        pole = _first_decaying(cfg, seeds, threads)
        s_r, source = pole.s_R, "find_pole"
    except NumericFailure as exc:
        s_r, source = complex(1.0, -0.05) ** 2, f"fixed (1 - 0.05i)^2; {exc}"
    state = GamowState(s_r, VelocityVector(0.2, -0.1, 0.3))
    worst = 0.0
    for _ in range(100):
        g = random_causal(rng)
        _, phase = gamow_transform(state, g)
        worst = max(worst, abs(phase))
    back = PoincareElement(a=FourVector(1.0, 0.0, 0.0, 0.0)).inverse()
    report = {
        "composition_error": comp, "composition_tol": 1e-9,
        "gamow_s_R": s_r, "gamow_source": source, "max_phase_modulus": worst,
        "inverse_in_semigroup": in_causal_semigroup(back),
    }
    write_json(out / "semigroup.json", report, cfg)


HANDLERS = {
    "verify": cmd_verify, "greens": cmd_greens, "poles": cmd_poles, "decay": cmd_decay,
    "vacuum": cmd_vacuum, "semigroup-demo": cmd_semigroup_demo,
}


# ---- entry point ------------------------------------------------------------

def _parse_seeds(text: str) -> tuple[complex, ...]:
    try:
        vals = tuple(complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"--seeds: cannot parse {text!r} as complex numbers") from None
    if not vals:
        raise ConfigError("--seeds: empty list")
    return vals


def _threads(arg: int | None) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            return 1
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}: expected an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError(f"--threads: must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasistable",
                                 description="Relativistic Friedrichs model: poles, decay, vacuum kernels")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration (defaults if omitted)")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--seeds", help="comma-separated complex seeds, e.g. 1-0.05j,0.9-0.01j")
    ap.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV})")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        threads = _threads(args.threads)
        seeds = _parse_seeds(args.seeds) if args.seeds else cfg.solver.seeds
        out = Path(args.out or cfg.output.dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"--out: cannot create {out}: {exc.strerror}") from None
        # one BLAS thread per solve keeps every sum in a fixed order
        with threadpool_limits(limits=1):
            HANDLERS[args.command](cfg, out, threads, seeds)
    except (ConfigError, OSError) as exc:
        print(f"quasistable: error: {exc}", file=sys.stderr)
        return 1
    except NumericFailure as exc:
        print(f"quasistable: numerical failure: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"quasistable: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except SuiteFailure as exc:
        print(f"quasistable: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
