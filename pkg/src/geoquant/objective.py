"""The spatial-quantile objective and its first-order structure.

For a measure ``P`` with atoms ``z_i`` and masses ``w_i`` the objective is

    O(mu) = sum_i w_i (||z_i - mu|| - ||z_i|| - alpha u'mu),

convex in ``mu``. Sums over the support go through :func:`math.fsum` so that
equalities between objective values hold to the last bit where they should.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .measure import EmpiricalMeasure, _check_unit, detect_line, tail_integral

__all__ = [
    "QuantileIndex",
    "Subgradient",
    "LineDerivative",
    "objective_value",
    "subgradient",
    "directional_derivative",
    "line_directional_derivative",
    "alpha_one_infimum",
    "t_integral",
]


@dataclass(frozen=True)
class QuantileIndex:
    """Order ``alpha`` in [0, 1) and unit direction ``u``."""

    alpha: float
    u: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        object.__setattr__(self, "u", _check_unit(self.u))

    @property
    def gamma(self) -> np.ndarray:
        """The same index as a point of the open unit ball."""
        return self.alpha * self.u


class Subgradient(NamedTuple):
    """Subdifferential at ``mu``: the ball of radius ``atom_mass`` around ``smooth_part``."""

    smooth_part: np.ndarray
    atom_mass: float

    def contains_zero(self, tol: float = 0.0) -> bool:
        return float(np.linalg.norm(self.smooth_part)) <= self.atom_mass + tol

    @property
    def residual(self) -> float:
        """Distance from the origin to the subdifferential."""
        return max(float(np.linalg.norm(self.smooth_part)) - self.atom_mass, 0.0)


class LineDerivative(NamedTuple):
    value: float
    s_P: float
    atom_at_zero: float
    v0: np.ndarray
    m: float


def _check_alpha(alpha, closed=True):
    upper_ok = alpha <= 1.0 if closed else alpha < 1.0
    if not (0.0 <= alpha and upper_ok):
        interval = "[0, 1]" if closed else "[0, 1)"
        raise ValueError(f"alpha must lie in {interval}, got {alpha}")


def _fsum_vec(rows: np.ndarray) -> np.ndarray:
    """Column-wise compensated sum of a 2-D array."""
    return np.array([math.fsum(rows[:, j]) for j in range(rows.shape[1])])


def _unit_vectors(P: EmpiricalMeasure, mu: np.ndarray):
    """Unit vectors ``(mu - z_i)/||mu - z_i||`` over atoms different from ``mu``."""
    diff = mu - P.points
    away = np.any(P.points != mu, axis=1)
    units = _normalize_rows(diff[away])
    return units, P.weights[away], float(P.weights[~away].sum())


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    # Rescale first so that tiny (subnormal) differences do not underflow.
    x = x / np.abs(x).max(axis=1, keepdims=True)
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def objective_value(P: EmpiricalMeasure, alpha: float, u, mu) -> float:
    """Evaluate ``O(mu)``; ``alpha = 1`` is accepted for limit diagnostics."""
    _check_alpha(alpha)
    u = _check_unit(u)
    mu = np.asarray(mu, dtype=float)
    dist = np.linalg.norm(P.points - mu, axis=1)
    terms = P.weights * (dist - P.norms())
    return math.fsum(np.append(terms, -alpha * float(u @ mu)))


def subgradient(P: EmpiricalMeasure, alpha: float, u, mu) -> Subgradient:
    _check_alpha(alpha)
    u = _check_unit(u)
    mu = np.asarray(mu, dtype=float)
    units, w, atom = _unit_vectors(P, mu)
    if units.shape[0]:
        smooth = _fsum_vec(w[:, None] * units) - alpha * u
    else:
        smooth = -alpha * u
    return Subgradient(smooth, atom)


def directional_derivative(P: EmpiricalMeasure, alpha: float, u, mu, v) -> float:
    """One-sided derivative ``lim_{h->0+} (O(mu + h v) - O(mu)) / h``."""
    u = _check_unit(u)
    v = _check_unit(v, "v")
    g = subgradient(P, alpha, u, mu)
    # Atom contributes ||-h v|| / h = mass, independent of the direction.
    return math.fsum([*(g.smooth_part * v), g.atom_mass])


def line_directional_derivative(
    P: EmpiricalMeasure, alpha: float, u, mu_star, v, line=None, tol: float = 1e-9
) -> LineDerivative:
    """Directional derivative at a point of the line carrying ``P``.

    With ``Lambda = u*'(Z - mu*)`` the derivative in direction ``v`` is
    ``P[Lambda = 0] - v'(s u* + alpha u)`` where ``s = E[sign(Lambda)]``. Also
    returns the steepest direction ``v0`` and its slope ``m``; the point
    ``mu*`` minimizes the objective exactly when ``m >= 0``.

    Raises
    ------
    ValueError
        If ``P`` is not concentrated on a line with a defined direction,
        ``mu_star`` is off that line, or ``s u* + alpha u`` vanishes.
    """
    _check_alpha(alpha)
    u = _check_unit(u)
    v = _check_unit(v, "v")
    mu_star = np.asarray(mu_star, dtype=float)
    if line is None:
        line = detect_line(P, tol)
    if not line.on_line or line.direction is None:
        raise ValueError("P is not concentrated on a line with a defined direction")
    u_star = line.direction
    off = mu_star - line.base
    off = off - (off @ u_star) * u_star
    if np.linalg.norm(off) > max(tol * P.spread(), 1e-12):
        raise ValueError("mu_star does not lie on the line carrying P")

    at_zero = np.all(P.points == mu_star, axis=1)
    lam = (P.points - mu_star) @ u_star
    signs = np.where(at_zero, 0.0, np.sign(lam))
    s_P = math.fsum(P.weights * signs)
    atom = float(P.weights[at_zero].sum())

    drift = s_P * u_star + alpha * u
    value = math.fsum([atom, *(-v * drift)])
    size = float(np.linalg.norm(drift))
    if size == 0.0:
        raise ValueError("steepest direction undefined: s_P u* + alpha u = 0")
    return LineDerivative(value, s_P, atom, drift / size, atom - size)


def alpha_one_infimum(P: EmpiricalMeasure, u) -> float:
    """Infimum of the order-one objective, ``-sum_i w_i (||z_i|| + u'z_i)``.

    It is approached along ``r u`` as ``r`` grows. Non-attainment is only
    guaranteed when ``P`` is not carried by a line with direction ``u``.
    """
    return -tail_integral(P, u)


def t_integral(P: EmpiricalMeasure, m: float, r: float) -> float:
    """``sum_i w_i ||z_i|| / sqrt((||z_i|| - r)^2 + m r ||z_i||)`` for ``0 < m < 2``."""
    if not 0.0 < m < 2.0:
        raise ValueError(f"m must lie in (0, 2), got {m}")
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    nz = P.norms()
    terms = P.weights * nz / np.sqrt((nz - r) ** 2 + m * r * nz)
    return math.fsum(terms)
