"""Extreme-quantile sweeps and their finite-sample diagnostics.

As ``alpha -> 1`` spatial quantiles leave every compact set and their
direction ``mu/||mu||`` tends to ``u``, unless ``P`` sits on a line parallel
to ``u``. The functions here sample that behaviour along an increasing grid
of orders and report it; nothing is asserted.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .measure import EmpiricalMeasure, _check_unit, detect_line
from .objective import _normalize_rows, alpha_one_infimum, objective_value
from .solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Diagnosis,
    Status,
    solve_quantile,
    uniqueness_diagnosis,
)

__all__ = [
    "TrajectoryPoint",
    "DivergenceReport",
    "DirectionReport",
    "ProfilePoint",
    "SurrogateChecks",
    "angle_to",
    "quantile_curve",
    "divergence_check",
    "direction_check",
    "spatial_depth",
    "alpha_one_descent_profile",
    "surrogate_checks",
    "figure1_alphas",
    "figure1_direction",
]

# Below this the quantile already lies on the half-line R+ u (by symmetry);
# angle orderings are then vacuous.
ANGLE_FLOOR = 1e-9

_SILENT = (Diagnosis.POSSIBLY_NON_UNIQUE_LINE_DIRECTION, Diagnosis.SINGLE_ATOM)


@dataclass(frozen=True)
class TrajectoryPoint:
    alpha: float
    mu: np.ndarray
    norm: float
    w: Optional[np.ndarray]
    angle_to_u: float
    residual: float
    objective: float
    status: Status
    at_origin: bool = False


class ProfilePoint(NamedTuple):
    r: float
    value: float
    gap: float


@dataclass(frozen=True)
class DivergenceReport:
    hypothesis: Diagnosis
    applies: bool
    monotone_tail: bool
    norm_at_max_alpha: float
    data_radius: float
    ratio: float


@dataclass(frozen=True)
class DirectionReport:
    hypothesis: Diagnosis
    applies: bool
    angles: List[float]
    final_angle: float
    decreasing_tail: bool


def figure1_alphas() -> np.ndarray:
    """Orders .001, .002, ..., .999."""
    return np.arange(1, 1000) / 1000.0


def figure1_direction(j: int) -> np.ndarray:
    return np.array([math.cos(math.pi * j / 6.0), math.sin(math.pi * j / 6.0)])


def angle_to(x, u) -> float:
    """Angle in [0, pi] between ``x`` and ``u``; pi when ``x = 0``.

    Uses ``atan2(|x_perp|, x.u)``, which stays accurate near 0 where
    ``arccos`` loses half the digits.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    n = float(np.linalg.norm(x))
    if n == 0.0:
        return math.pi
    w = x / n
    along = float(w @ u)
    across = float(np.linalg.norm(w - along * u))
    return math.atan2(across, along)


def _check_alphas(alphas) -> np.ndarray:
    a = np.asarray(alphas, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError("alphas must be non-empty")
    if np.any(a < 0.0) or np.any(a >= 1.0):
        raise ValueError("alphas must lie in [0, 1)")
    if np.any(np.diff(a) <= 0):
        raise ValueError("alphas must be strictly increasing")
    return a


def quantile_curve(
    P: EmpiricalMeasure,
    u,
    alphas: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: bool = True,
) -> List[TrajectoryPoint]:
    """Quantiles along an increasing grid of orders in one direction.

    Each solve is seeded with the previous solution unless ``warm_start``
    is False. A point that fails to converge keeps ``status = max_iter`` and
    the sweep carries on.
    """
    u = _check_unit(u)
    alphas = _check_alphas(alphas)
    line = detect_line(P)
    out = []
    prev = None
    for a in alphas:
        sol = solve_quantile(P, float(a), u, tol=tol, max_iter=max_iter, warm_start=prev, line=line)
        if warm_start:
            prev = sol.mu
        norm = float(np.linalg.norm(sol.mu))
        out.append(
            TrajectoryPoint(
                alpha=float(a),
                mu=sol.mu,
                norm=norm,
                w=sol.mu / norm if norm > 0 else None,
                angle_to_u=angle_to(sol.mu, u),
                residual=sol.residual,
                objective=sol.objective,
                status=sol.status,
                at_origin=norm == 0.0,
            )
        )
    return out


def _hypothesis(P, u):
    # The limits concern alpha -> 1, so classify at a positive order.
    diag = uniqueness_diagnosis(P, 0.5, u)
    return diag, diag not in _SILENT


def divergence_check(P: EmpiricalMeasure, u, alphas, curve=None) -> DivergenceReport:
    """Summarize how far the quantiles travel as ``alpha`` grows.

    ``monotone_tail`` asks whether norms are non-decreasing over the second
    half of the sweep. ``applies`` is False when ``P`` lies on a line
    parallel to ``u``, where no divergence is expected.
    """
    u = _check_unit(u)
    alphas = _check_alphas(alphas)
    if curve is None:
        curve = quantile_curve(P, u, alphas)
    diag, applies = _hypothesis(P, u)
    norms = np.array([p.norm for p in curve])
    tail = norms[len(norms) // 2:]
    radius = P.radius()
    final = float(norms[-1])
    return DivergenceReport(
        hypothesis=diag,
        applies=applies,
        monotone_tail=_non_decreasing(tail),
        norm_at_max_alpha=final,
        data_radius=radius,
        ratio=final / radius if radius > 0 else math.inf,
    )


def _non_decreasing(x) -> bool:
    x = np.asarray(x)
    # Slack covers the solver's positional error, not genuine decreases.
    return bool(np.all(np.diff(x) >= -1e-9 * (1.0 + np.abs(x[:-1]))))


def direction_check(P: EmpiricalMeasure, u, alphas, curve=None) -> DirectionReport:
    u = _check_unit(u)
    alphas = _check_alphas(alphas)
    if curve is None:
        curve = quantile_curve(P, u, alphas)
    diag, applies = _hypothesis(P, u)
    angles = [p.angle_to_u for p in curve]
    mid = angles[len(angles) // 2]
    return DirectionReport(
        hypothesis=diag,
        applies=applies,
        angles=angles,
        final_angle=angles[-1],
        decreasing_tail=angles[-1] < mid,
    )


def spatial_depth(P: EmpiricalMeasure, z) -> float:
    """``1 - ||sum_{z_i != z} w_i (z - z_i)/||z - z_i||| |``.

    Equals ``1 - alpha`` at any quantile of order ``alpha`` that is not an
    atom.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (P.dim,):
        raise ValueError("point dimension does not match the measure")
    diff = z - P.points
    away = np.any(diff != 0.0, axis=1)
    if not np.any(away):
        return 1.0
    units = _normalize_rows(diff[away])
    wu = P.weights[away, None] * units
    mean = np.array([math.fsum(wu[:, j]) for j in range(P.dim)])
    return 1.0 - float(np.linalg.norm(mean))


def alpha_one_descent_profile(P: EmpiricalMeasure, u, radii) -> List[ProfilePoint]:
    """Order-one objective along ``r u`` and its gap to the infimum."""
    u = _check_unit(u)
    radii = np.asarray(radii, dtype=float).reshape(-1)
    if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and increasing")
    inf = alpha_one_infimum(P, u)
    out = []
    for r in radii:
        value = objective_value(P, 1.0, u, r * u)
        out.append(ProfilePoint(float(r), value, value - inf))
    return out


@dataclass(frozen=True)
class SurrogateChecks:
    """Finite-order stand-ins for the divergence and direction limits.

    ``ratio_ok``: ``||mu_.999|| > 10 * max_i ||z_i||``.
    ``monotone_ok``: norms non-decreasing for ``alpha`` in [0.9, 0.999].
    ``order_ok``: ``angle(.999) < angle(.9) < angle(.5)``, or all three
    below :data:`ANGLE_FLOOR`.
    ``final_angle_ok``: ``angle(.999) < 0.1``.
    """

    applies: bool
    hypothesis: Diagnosis
    norm_999: float
    data_radius: float
    angle_5: float
    angle_9: float
    angle_999: float
    ratio_ok: bool
    monotone_ok: bool
    order_ok: bool
    final_angle_ok: bool

    @property
    def divergence_ok(self) -> bool:
        return self.ratio_ok and self.monotone_ok

    @property
    def direction_ok(self) -> bool:
        return self.order_ok and self.final_angle_ok

    @property
    def passed(self) -> bool:
        return (not self.applies) or (self.divergence_ok and self.direction_ok)


def _at(curve, alpha):
    return min(curve, key=lambda p: abs(p.alpha - alpha))


def surrogate_checks(P: EmpiricalMeasure, u, curve: List[TrajectoryPoint]) -> SurrogateChecks:
    """Evaluate the extreme-order checks on a sweep that reaches 0.999.

    The sweep should contain the orders 0.5, 0.9 and 0.999; the closest
    available order is used for each.
    """
    u = _check_unit(u)
    diag, applies = _hypothesis(P, u)
    p5, p9, p999 = _at(curve, 0.5), _at(curve, 0.9), _at(curve, 0.999)
    tail = [p.norm for p in curve if p.alpha >= 0.9 - 1e-12]
    radius = P.radius()
    a5, a9, a999 = p5.angle_to_u, p9.angle_to_u, p999.angle_to_u
    aligned = max(a5, a9, a999) < ANGLE_FLOOR
    return SurrogateChecks(
        applies=applies,
        hypothesis=diag,
        norm_999=p999.norm,
        data_radius=radius,
        angle_5=a5,
        angle_9=a9,
        angle_999=a999,
        ratio_ok=p999.norm > 10.0 * radius,
        monotone_ok=len(tail) > 0 and _non_decreasing(tail),
        order_ok=aligned or (a999 < a9 < a5),
        final_angle_ok=a999 < 0.1,
    )
