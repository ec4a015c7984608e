"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 solver did not converge,
3 an applicable extreme-quantile check failed.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import asymptotics as asy
from .datafiles import atomic_write, curve_csv, fmt, read_points
from .measure import DEFAULT_SEED, EXAMPLE_NAMES, builtin_example, tail_integral
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, Status, solve_quantile, uniqueness_diagnosis

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_CHECK_FAILED = 0, 1, 2, 3

PROFILE_RADII = [10.0 ** k for k in range(7)]
DEFAULT_SWEEP = "0.001:0.001:0.999"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input: str
    alphas: List[float]
    direction: Optional[np.ndarray]
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = DEFAULT_SEED
    output_format: str = "json"
    output: Optional[str] = None

    @property
    def scalar_alpha(self) -> float:
        if len(self.alphas) != 1:
            raise UsageError("a single --alpha value is required")
        return self.alphas[0]


def parse_alphas(spec: str) -> List[float]:
    """``"0.3"`` or ``"start:step:end"`` (end included when hit exactly)."""
    try:
        parts = [Decimal(p.strip()) for p in spec.split(":")]
    except InvalidOperation:
        raise UsageError(f"bad alpha spec {spec!r}") from None
    if len(parts) == 1:
        values = [parts[0]]
    elif len(parts) == 3:
        start, step, end = parts
        if step <= 0:
            raise UsageError("sweep step must be positive")
        count = int((end - start) / step) + 1
        values = [start + k * step for k in range(max(count, 0))]
    else:
        raise UsageError(f"bad alpha spec {spec!r}; use a number or start:step:end")
    out = [float(v) for v in values]
    if not out:
        raise UsageError("empty alpha sweep")
    if any(not 0.0 <= a < 1.0 for a in out):
        raise UsageError("alpha values must lie in [0, 1)")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise UsageError("alpha sweep must be strictly increasing")
    return out


def parse_vector(spec: str, name: str = "vector") -> np.ndarray:
    try:
        v = np.array([float(x) for x in spec.split(",")])
    except ValueError:
        raise UsageError(f"bad {name} {spec!r}; expected comma-separated numbers") from None
    if not np.all(np.isfinite(v)):
        raise UsageError(f"{name} must be finite")
    return v


def parse_direction(spec: str) -> np.ndarray:
    v = parse_vector(spec, "direction")
    n = np.linalg.norm(v)
    if n == 0.0:
        raise UsageError("direction must be nonzero")
    return v / n


def default_seed() -> int:
    env = os.environ.get("GEOQUANT_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"GEOQUANT_SEED must be an integer, got {env!r}") from None


def load_measure(source: str, seed: int):
    if source in EXAMPLE_NAMES:
        return builtin_example(source, seed)
    try:
        return read_points(source)
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{source}: {exc}") from exc


def emit(text: str, output: Optional[str]) -> None:
    if output:
        try:
            atomic_write(output, text)
        except OSError as exc:
            raise UsageError(f"cannot write {output}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _vec(x):
    return [float(c) for c in x]


def _check_direction(P, u):
    if u is None:
        raise UsageError("--direction is required")
    if u.shape[0] != P.dim:
        raise UsageError(f"direction has {u.shape[0]} coordinates, data has {P.dim}")
    return u


def cmd_quantile(cfg: RunConfig) -> int:
    P = load_measure(cfg.input, cfg.seed)
    u = _check_direction(P, cfg.direction)
    alpha = cfg.scalar_alpha
    sol = solve_quantile(P, alpha, u, tol=cfg.tol, max_iter=cfg.max_iter)
    if cfg.output_format == "csv":
        curve = asy.quantile_curve(P, u, [alpha], tol=cfg.tol, max_iter=cfg.max_iter)
        text = curve_csv(curve, P.dim)
    else:
        text = _dump({
            "alpha": alpha,
            "direction": _vec(u),
            "mu": _vec(sol.mu),
            "objective": sol.objective,
            "residual": sol.residual,
            "iterations": sol.iterations,
            "status": sol.status.value,
            "atom_hit": sol.atom_hit,
            "uniqueness": sol.uniqueness.value,
            "interval": [_vec(e) for e in sol.interval] if sol.interval else None,
        })
    emit(text, cfg.output)
    return EXIT_NONCONVERGED if sol.status is Status.MAX_ITER else EXIT_OK


def cmd_curve(cfg: RunConfig) -> int:
    P = load_measure(cfg.input, cfg.seed)
    u = _check_direction(P, cfg.direction)
    curve = asy.quantile_curve(P, u, cfg.alphas, tol=cfg.tol, max_iter=cfg.max_iter)
    emit(curve_csv(curve, P.dim), cfg.output)
    ok = sum(p.status is not Status.MAX_ITER for p in curve)
    return EXIT_OK if ok >= 0.99 * len(curve) else EXIT_NONCONVERGED


def _checks_json(checks: asy.SurrogateChecks) -> dict:
    return {
        "applies": checks.applies,
        "passed": checks.passed,
        "ratio_ok": checks.ratio_ok,
        "monotone_ok": checks.monotone_ok,
        "order_ok": checks.order_ok,
        "final_angle_ok": checks.final_angle_ok,
        "norm_999": checks.norm_999,
        "data_radius": checks.data_radius,
        "angles": {"0.5": checks.angle_5, "0.9": checks.angle_9, "0.999": checks.angle_999},
    }


def cmd_check(cfg: RunConfig) -> int:
    P = load_measure(cfg.input, cfg.seed)
    u = _check_direction(P, cfg.direction)
    curve = asy.quantile_curve(P, u, cfg.alphas, tol=cfg.tol, max_iter=cfg.max_iter)
    div = asy.divergence_check(P, u, cfg.alphas, curve=curve)
    dirn = asy.direction_check(P, u, cfg.alphas, curve=curve)
    checks = asy.surrogate_checks(P, u, curve)
    profile = asy.alpha_one_descent_profile(P, u, PROFILE_RADII)
    values = [p.value for p in profile]
    profile_ok = all(b <= a for a, b in zip(values, values[1:])) and abs(profile[-1].gap) < 1e-3

    report = {
        "hypothesis": div.hypothesis.value,
        "applies": div.applies,
        "divergence": {
            "monotone_tail": div.monotone_tail,
            "norm_at_max_alpha": div.norm_at_max_alpha,
            "data_radius": div.data_radius,
            "ratio": div.ratio,
            "ratio_ok": checks.ratio_ok,
            "monotone_ok": checks.monotone_ok,
        },
        "direction": {
            "final_angle": dirn.final_angle,
            "decreasing_tail": dirn.decreasing_tail,
            "angles": {"0.5": checks.angle_5, "0.9": checks.angle_9, "0.999": checks.angle_999},
            "order_ok": checks.order_ok,
            "final_angle_ok": checks.final_angle_ok,
        },
        "alpha_one": {
            "i_u_P": -tail_integral(P, u),
            "final_gap": profile[-1].gap,
            "profile": [{"r": p.r, "value": p.value, "gap": p.gap} for p in profile],
            "monotone_ok": profile_ok,
        },
        "passed": (checks.passed or not checks.applies) and profile_ok,
    }
    emit(_dump(report), cfg.output)
    if not checks.applies:
        return EXIT_OK
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_depth(cfg: RunConfig, point: np.ndarray) -> int:
    P = load_measure(cfg.input, cfg.seed)
    if point.shape[0] != P.dim:
        raise UsageError(f"point has {point.shape[0]} coordinates, data has {P.dim}")
    emit(fmt(asy.spatial_depth(P, point)) + "\n", cfg.output)
    return EXIT_OK


def figure1_filename(name: str, j: int) -> str:
    return f"example_{name}_j{j}.csv"


def cmd_figure1(seed: int, outdir, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> int:
    """Write the 16 curves (4 examples x 4 directions) plus ``manifest.json``."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {outdir}: {exc}") from exc
    alphas = asy.figure1_alphas()
    manifest = {
        "seed": seed,
        "alphas": {"start": 0.001, "step": 0.001, "end": 0.999, "count": len(alphas)},
        "examples": {},
    }
    for name in EXAMPLE_NAMES:
        P = builtin_example(name, seed)
        median = solve_quantile(P, 0.0, asy.figure1_direction(0), tol=tol, max_iter=max_iter)
        entry = {
            "points": [_vec(z) for z in P.points],
            "weights": _vec(P.weights),
            "spatial_median": _vec(median.mu),
            "median_interval": [_vec(e) for e in median.interval] if median.interval else None,
            "curves": [],
        }
        for j in range(4):
            u = asy.figure1_direction(j)
            curve = asy.quantile_curve(P, u, alphas, tol=tol, max_iter=max_iter)
            fname = figure1_filename(name, j)
            emit(curve_csv(curve, P.dim), str(outdir / fname))
            entry["curves"].append({
                "j": j,
                "direction": _vec(u),
                "file": fname,
                "checks": _checks_json(asy.surrogate_checks(P, u, curve)),
            })
        manifest["examples"][name] = entry
    emit(_dump(manifest), str(outdir / "manifest.json"))
    return EXIT_OK


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", choices=EXAMPLE_NAMES, help="built-in example a, b, c or d")
    src.add_argument("--input", help="CSV or JSON point file")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--seed", type=int, default=None, help="seed for example a/b (default: $GEOQUANT_SEED or %d)" % DEFAULT_SEED)
    p.add_argument("--output", "-o", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoquant", description="Spatial quantiles of empirical measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quantile", help="compute one spatial quantile")
    _add_source(q)
    q.add_argument("--alpha", required=True)
    q.add_argument("--direction", required=True)
    q.add_argument("--format", choices=("json", "csv"), default="json")
    _add_solver(q)

    c = sub.add_parser("curve", help="sweep alpha and write a CSV curve")
    _add_source(c)
    c.add_argument("--alpha", required=True, help="start:step:end")
    c.add_argument("--direction", required=True)
    _add_solver(c)

    k = sub.add_parser("check", help="extreme-quantile diagnostics as JSON")
    _add_source(k)
    k.add_argument("--alpha", default=DEFAULT_SWEEP, help=f"sweep (default {DEFAULT_SWEEP})")
    k.add_argument("--direction", required=True)
    _add_solver(k)

    d = sub.add_parser("depth", help="spatial depth of a point")
    _add_source(d)
    d.add_argument("--point", required=True)
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--output", "-o")

    f = sub.add_parser("figure1", help="the 16 example curves plus a manifest")
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--outdir", required=True)
    f.add_argument("--tol", type=float, default=DEFAULT_TOL)
    f.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    return parser


def _config(args) -> RunConfig:
    seed = args.seed if args.seed is not None else default_seed()
    alpha = getattr(args, "alpha", None)
    direction = getattr(args, "direction", None)
    return RunConfig(
        input=args.example or args.input,
        alphas=parse_alphas(alpha) if alpha is not None else [],
        direction=parse_direction(direction) if direction is not None else None,
        tol=getattr(args, "tol", DEFAULT_TOL),
        max_iter=getattr(args, "max_iter", DEFAULT_MAX_ITER),
        seed=seed,
        output_format=getattr(args, "format", "csv"),
        output=args.output,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "figure1":
            seed = args.seed if args.seed is not None else default_seed()
            return cmd_figure1(seed, args.outdir, tol=args.tol, max_iter=args.max_iter)
        cfg = _config(args)
        if args.command == "quantile":
            return cmd_quantile(cfg)
        if args.command == "curve":
            return cmd_curve(cfg)
        if args.command == "check":
            return cmd_check(cfg)
        return cmd_depth(cfg, parse_vector(args.point, "point"))
    except (UsageError, ValueError) as exc:
        print(f"geoquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
