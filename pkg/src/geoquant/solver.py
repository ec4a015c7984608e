"""Computing spatial quantiles of empirical measures.

Generic measures are handled by a damped Weiszfeld-type fixed point. Each
step minimizes the quadratic majorizer of the objective at the current
iterate, so the objective never increases in exact arithmetic; damping only
guards against round-off. Measures carried by a line whose direction is
``+-u`` (or any line when ``alpha = 0``) reduce to univariate weighted
quantiles, where the minimizer may be a whole segment.
"""

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .measure import EmpiricalMeasure, LineStructure, _check_unit, detect_line
from .objective import objective_value, subgradient

__all__ = [
    "Status",
    "Uniqueness",
    "Diagnosis",
    "QuantileSolution",
    "LineQuantile",
    "Certificate",
    "search_radius",
    "univariate_quantile_on_line",
    "uniqueness_diagnosis",
    "optimality_certificate",
    "solve_quantile",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000

_RADIUS_MARGIN = 0.01
_SNAP = 1e-13  # relative distance at which an iterate is treated as sitting on an atom
_NEAR = 1e-6  # relative distance below which a certified atom is taken directly
_ESCAPE = 1e-6
_LEVEL_TIE = 1e-12
_EPS = np.finfo(float).eps


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    REDUCED = "reduced_to_univariate"


class Uniqueness(str, enum.Enum):
    UNIQUE = "unique"
    NON_UNIQUE_INTERVAL = "non_unique_interval"
    UNKNOWN = "unknown"


class Diagnosis(str, enum.Enum):
    UNIQUE_NOT_ON_LINE = "unique_not_on_line"
    UNIQUE_ALPHA_POSITIVE_OFF_DIRECTION = "unique_alpha_positive_off_direction"
    POSSIBLY_NON_UNIQUE_LINE_DIRECTION = "possibly_non_unique_line_direction"
    POSSIBLY_NON_UNIQUE_MEDIAN_ON_LINE = "possibly_non_unique_median_on_line"
    SINGLE_ATOM = "single_atom"


@dataclass(frozen=True)
class QuantileSolution:
    mu: np.ndarray
    objective: float
    residual: float
    iterations: int
    status: Status
    atom_hit: bool
    uniqueness: Uniqueness
    interval: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.status is not Status.MAX_ITER


class LineQuantile(NamedTuple):
    lo: np.ndarray
    hi: np.ndarray
    canonical: np.ndarray


class Certificate(NamedTuple):
    certified: bool
    residual: float


def search_radius(P: EmpiricalMeasure, alpha: float) -> float:
    """Radius of a ball around the origin containing every minimizer.

    Outside ``||mu|| > 2 R0 / (1 - alpha)`` with ``R0`` the largest support
    norm, ``O(mu) >= (1 - alpha)||mu|| - 2 R0 > 0 = O(0)``.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return 2.0 * P.radius() / (1.0 - alpha) * (1.0 + _RADIUS_MARGIN)


def _direction_sign(line: LineStructure, u: np.ndarray, tol: float = 1e-9) -> int:
    """+1 or -1 if ``u`` is parallel to the line direction, else 0."""
    if line.direction is None:
        return 0
    for s in (1, -1):
        if np.linalg.norm(u - s * line.direction) <= tol:
            return s
    return 0


def univariate_quantile_on_line(
    P: EmpiricalMeasure, z0, u_star, alpha: float, sign: int = 1, tol: float = 1e-9
) -> LineQuantile:
    """Minimizers of the objective restricted to the line ``z0 + lambda u*``.

    With ``lambda_i = u*'(z_i - z0)`` these are the weighted quantiles of the
    ``lambda_i`` at cumulative level ``(1 + sign*alpha)/2``: either a single
    atom or the segment between two consecutive atoms. Endpoints are returned
    as the exact support points.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    z0 = np.asarray(z0, dtype=float)
    u_star = _check_unit(u_star, "u_star")
    rel = P.points - z0
    lam = rel @ u_star
    perp = np.linalg.norm(rel - np.outer(lam, u_star), axis=1)
    if perp.max() > tol * max(P.spread(), 1.0):
        raise ValueError("P is not concentrated on the given line")

    order = np.argsort(lam, kind="stable")
    w = P.weights[order]
    cum = np.array([math.fsum(w[: k + 1]) for k in range(w.size)])
    level = 0.5 * (1.0 + sign * alpha)
    k = int(np.argmax(cum >= level - _LEVEL_TIE))
    lo = P.points[order[k]]
    if abs(cum[k] - level) <= _LEVEL_TIE and k + 1 < w.size:
        hi = P.points[order[k + 1]]
    else:
        hi = lo
    return LineQuantile(lo.copy(), hi.copy(), 0.5 * (lo + hi))


def uniqueness_diagnosis(
    P: EmpiricalMeasure, alpha: float, u, line: Optional[LineStructure] = None
) -> Diagnosis:
    """Classify whether the quantile is guaranteed unique.

    Not on a line: unique. On a line and ``alpha = 0``: the median may be a
    segment. On a line parallel to ``u``: may be a segment. On a line in any
    other direction with ``alpha > 0``: unique.
    """
    u = _check_unit(u)
    if line is None:
        line = detect_line(P)
    if line.degenerate_single_atom:
        return Diagnosis.SINGLE_ATOM
    if not line.on_line:
        return Diagnosis.UNIQUE_NOT_ON_LINE
    if alpha == 0.0:
        return Diagnosis.POSSIBLY_NON_UNIQUE_MEDIAN_ON_LINE
    if _direction_sign(line, u):
        return Diagnosis.POSSIBLY_NON_UNIQUE_LINE_DIRECTION
    return Diagnosis.UNIQUE_ALPHA_POSITIVE_OFF_DIRECTION


def optimality_certificate(P: EmpiricalMeasure, alpha: float, u, mu, tol: float = DEFAULT_TOL) -> Certificate:
    """Check ``0`` in the subdifferential: ``||smooth_part(mu)|| <= P[{mu}] + tol``."""
    res = subgradient(P, alpha, u, mu).residual
    return Certificate(res <= tol, res)


def _solution(P, alpha, u, mu, iterations, status, uniqueness, interval=None):
    mu = np.asarray(mu, dtype=float)
    return QuantileSolution(
        mu=mu,
        objective=objective_value(P, alpha, u, mu),
        residual=subgradient(P, alpha, u, mu).residual,
        iterations=iterations,
        status=status,
        atom_hit=P.atom_mass(mu) > 0.0,
        uniqueness=uniqueness,
        interval=interval,
    )


def _reduce(P, alpha, u, line, sign):
    if line.degenerate_single_atom:
        return _solution(P, alpha, u, P.points[0], 0, Status.REDUCED, Uniqueness.UNIQUE)
    lq = univariate_quantile_on_line(P, line.base, line.direction, alpha, sign)
    if np.array_equal(lq.lo, lq.hi):
        return _solution(P, alpha, u, lq.lo, 0, Status.REDUCED, Uniqueness.UNIQUE)
    return _solution(
        P, alpha, u, lq.canonical, 0, Status.REDUCED,
        Uniqueness.NON_UNIQUE_INTERVAL, interval=(lq.lo, lq.hi),
    )


class _Iterate(NamedTuple):
    x: np.ndarray
    dist: np.ndarray
    f: float
    grad: np.ndarray
    gnorm: float
    slack: float


def _better(a: _Iterate, b: _Iterate) -> bool:
    """Lower objective; gradient norm breaks ties at round-off level."""
    if a.f < b.f - b.slack:
        return True
    return a.f <= b.f + b.slack and a.gnorm < b.gnorm


def _anderson(hist_x, hist_r, x, r, depth):
    """Anderson-extrapolated next iterate of ``x -> x + r``, or None."""
    if depth <= 0:
        return None
    hist_x.append(x.copy())
    hist_r.append(r.copy())
    if len(hist_x) > depth + 1:
        del hist_x[0], hist_r[0]
    if len(hist_x) < 2:
        return None
    dX = np.diff(np.array(hist_x), axis=0).T
    dR = np.diff(np.array(hist_r), axis=0).T
    gamma, *_ = np.linalg.lstsq(dR, r, rcond=None)
    out = x + r - (dX + dR) @ gamma
    return out if np.all(np.isfinite(out)) else None


def solve_quantile(
    P: EmpiricalMeasure,
    alpha: float,
    u,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start=None,
    line: Optional[LineStructure] = None,
    anderson: int = 3,
) -> QuantileSolution:
    """Compute the spatial quantile of order ``alpha`` in direction ``u``.

    Parameters
    ----------
    P : EmpiricalMeasure
    alpha : float in [0, 1)
    u : unit vector
    tol : float
        Target distance from the origin to the subdifferential. The
        subgradient is an average of unit vectors, so this is scale-free.
    max_iter : int
    warm_start : array-like, optional
        Starting iterate; defaults to the weighted mean.
    line : LineStructure, optional
        Precomputed :func:`detect_line` result for ``P``.
    anderson : int
        History depth of Anderson extrapolation of the fixed-point map; 0
        gives the plain damped iteration. An extrapolated point replaces
        the plain step only if it scores better on the objective (or, at
        round-off level, on the gradient norm).

    Returns
    -------
    QuantileSolution
        ``status`` is ``max_iter`` if the tolerance was not reached; the last
        (lowest-objective) iterate is returned in that case.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    u = _check_unit(u)
    if u.shape[0] != P.dim:
        raise ValueError("direction dimension does not match the measure")
    if line is None:
        line = detect_line(P)

    if line.degenerate_single_atom:
        return _reduce(P, alpha, u, line, 1)
    if line.on_line:
        sign = _direction_sign(line, u)
        if sign or alpha == 0.0:
            return _reduce(P, alpha, u, line, sign or 1)

    pts, w = P.points, P.weights
    norms = P.norms()
    scale = P.spread()
    mu = P.mean() if warm_start is None else np.array(warm_start, dtype=float)
    if mu.shape != (P.dim,):
        raise ValueError("warm_start has the wrong dimension")

    def evaluate(x):
        dist = np.linalg.norm(pts - x, axis=1)
        f = float(w @ (dist - norms)) - alpha * float(u @ x)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = w @ ((x - pts) / dist[:, None]) - alpha * u
        slack = 8.0 * _EPS * (float(w @ (dist + norms)) + abs(alpha * float(u @ x)))
        return _Iterate(x, dist, f, grad, float(np.linalg.norm(grad)), slack)

    cur = evaluate(mu)
    hist_x, hist_r = [], []
    it = 0
    while it < max_iter:
        it += 1
        k = int(np.argmin(cur.dist))
        if cur.dist[k] <= _NEAR * scale:
            g = subgradient(P, alpha, u, pts[k])
            if g.contains_zero():
                return _solution(P, alpha, u, pts[k], it, Status.CONVERGED, Uniqueness.UNIQUE)
            if cur.dist[k] <= _SNAP * scale:
                gs = g.smooth_part
                cur = evaluate(pts[k] - _ESCAPE * scale * gs / np.linalg.norm(gs))
                hist_x.clear()
                hist_r.clear()
                continue

        if cur.gnorm <= tol and subgradient(P, alpha, u, cur.x).residual <= tol:
            return _solution(P, alpha, u, cur.x, it, Status.CONVERGED, Uniqueness.UNIQUE)

        inv = w / cur.dist
        step = (inv @ pts + alpha * u) / inv.sum() - cur.x
        best = evaluate(cur.x + step)
        for _ in range(30):
            if best.f <= cur.f + cur.slack:
                break
            step *= 0.5
            best = evaluate(cur.x + step)

        accel = _anderson(hist_x, hist_r, cur.x, step, anderson)
        if accel is not None:
            trial = evaluate(accel)
            if _better(trial, best):
                best = trial
        # Slow modes (next to an atom, or far out where the cloud looks
        # collinear) are underestimated by the majorizer; probe longer steps.
        for _ in range(60):
            trial = evaluate(cur.x + 2.0 * (best.x - cur.x))
            if not _better(trial, best):
                break
            best = trial
        cur = best

    return _solution(P, alpha, u, cur.x, it, Status.MAX_ITER, Uniqueness.UNIQUE)
