"""Finite weighted probability measures on R^d.

An :class:`EmpiricalMeasure` is a point cloud with positive weights summing
to one. Duplicate points are merged at construction so that the mass of an
atom ``P[{z}]`` is a single well-defined number.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "EmpiricalMeasure",
    "LineStructure",
    "from_points",
    "detect_line",
    "tail_integral",
    "builtin_example",
    "lcg_uniform",
    "EXAMPLE_NAMES",
    "DEFAULT_SEED",
]

EXAMPLE_NAMES = ("a", "b", "c", "d")
DEFAULT_SEED = 1

# Knuth's MMIX multiplier/increment.
_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407
_MASK64 = (1 << 64) - 1
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted atoms ``points[i]`` with mass ``weights[i]``.

    Build instances with :func:`from_points`; the constructor assumes its
    inputs are already merged and normalized. Arrays are read-only.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.size

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def radius(self) -> float:
        """Largest distance from the origin to a support point."""
        return float(self.norms().max())

    def center(self) -> np.ndarray:
        """Center of the bounding box of the support."""
        return 0.5 * (self.points.min(axis=0) + self.points.max(axis=0))

    def spread(self) -> float:
        """Largest distance from the bounding-box center to a support point.

        Unlike :meth:`radius`, this does not change under translation.
        """
        return float(np.linalg.norm(self.points - self.center(), axis=1).max())

    def mean(self) -> np.ndarray:
        return np.array(
            [math.fsum(self.weights * self.points[:, j]) for j in range(self.dim)]
        )

    def atom_mass(self, mu) -> float:
        """Mass at ``mu``; exact coordinate match against the merged support."""
        hit = np.all(self.points == np.asarray(mu, dtype=float), axis=1)
        return float(self.weights[hit].sum())

    def shift(self, c) -> "EmpiricalMeasure":
        return from_points(self.points + np.asarray(c, dtype=float), self.weights)

    def transform(self, matrix) -> "EmpiricalMeasure":
        """Image of the measure under the linear map ``z -> matrix @ z``."""
        return from_points(self.points @ np.asarray(matrix, dtype=float).T, self.weights)


@dataclass(frozen=True)
class LineStructure:
    on_line: bool
    base: Optional[np.ndarray] = None
    direction: Optional[np.ndarray] = None
    degenerate_single_atom: bool = False
    max_residual: float = 0.0


def from_points(points, weights=None) -> EmpiricalMeasure:
    """Build a measure from a point cloud, merging duplicate points.

    Parameters
    ----------
    points : array-like of shape (n, d)
    weights : array-like of shape (n,), optional
        Positive masses, normalized to sum to one. Uniform if omitted.

    Raises
    ------
    ValueError
        On empty input, ragged or non-finite coordinates, or a nonpositive
        weight.
    """
    try:
        pts = np.array(points, dtype=float)
    except ValueError as exc:
        raise ValueError("points must all have the same dimension") from exc
    if pts.size == 0:
        raise ValueError("at least one point is required")
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise ValueError("points must be a list of d-vectors")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    n = pts.shape[0]

    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise ValueError(f"got {w.shape[0]} weights for {n} points")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")

    # Keep first-occurrence order so construction is stable.
    uniq, first, inverse = np.unique(pts, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    groups = rank[inverse.reshape(-1)]
    merged = [[] for _ in range(order.size)]
    for g, wi in zip(groups, w):
        merged[g].append(wi)
    total = math.fsum(w)
    mass = np.array([math.fsum(m) / total for m in merged])
    return EmpiricalMeasure(uniq[order].copy(), mass)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > 1e-14:
            return v if x > 0 else -v
    return v


def detect_line(P: EmpiricalMeasure, tol: float = 1e-9) -> LineStructure:
    """Decide whether the support of ``P`` lies on a single line.

    The best-fitting line through the support centroid comes from the top
    right-singular vector of the centered support. The verdict is positive
    when every support point is within ``tol`` times the largest distance
    to the centroid of that line, or within coordinate round-off of it. Two
    points always lie on a line. The reported base point is the point of the
    line closest to the origin.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if P.size == 1:
        return LineStructure(True, base=P.points[0].copy(), degenerate_single_atom=True)

    c = P.points.mean(axis=0)
    X = P.points - c
    _, _, vt = np.linalg.svd(X, full_matrices=False)
    v = vt[0] / np.linalg.norm(vt[0])
    # Snap round-off so axis-aligned lines report exact directions.
    v[np.abs(v) < 1e-15] = 0.0
    v = _canonical_sign(v / np.linalg.norm(v))

    resid = X - np.outer(X @ v, v)
    max_resid = float(np.linalg.norm(resid, axis=1).max())
    scale = float(np.linalg.norm(X, axis=1).max())
    # Coordinates carry rounding error relative to their own magnitude, so
    # residuals below that level cannot tell lines apart.
    floor = 64.0 * _EPS * P.radius()
    if P.size > 2 and max_resid > max(tol * scale, floor):
        return LineStructure(False, max_residual=max_resid)
    base = c - (c @ v) * v
    return LineStructure(True, base=base, direction=v, max_residual=max_resid)


def _check_unit(u, name="u", tol=1e-9) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if abs(np.linalg.norm(u) - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector (norm {np.linalg.norm(u):.3g})")
    return u


def tail_integral(P: EmpiricalMeasure, u) -> float:
    """Return ``sum_i w_i (||z_i|| + u'z_i)``, always nonnegative.

    Its negative is the infimum of the order-one objective in direction
    ``u``.
    """
    u = _check_unit(u)
    if u.shape[0] != P.dim:
        raise ValueError("direction dimension does not match the measure")
    terms = P.weights * (P.norms() + P.points @ u)
    return max(math.fsum(terms), 0.0)


def lcg_uniform(seed: int, n: int) -> np.ndarray:
    """Draw ``n`` uniforms on [0, 1) from a 64-bit linear congruential generator.

    ``state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64``,
    starting from ``state = seed mod 2**64``. Each draw advances the state once
    and returns its top 53 bits divided by ``2**53``. Pure integer arithmetic,
    so results are bit-identical on every platform.
    """
    state = int(seed) & _MASK64
    out = np.empty(n)
    for i in range(n):
        state = (_LCG_A * state + _LCG_C) & _MASK64
        out[i] = (state >> 11) / float(1 << 53)
    return out


def builtin_example(name: str, seed: int = DEFAULT_SEED) -> EmpiricalMeasure:
    """The four planar point patterns used to illustrate extreme quantiles.

    ``a``: four points uniform on ``[-2, 2]^2`` drawn with :func:`lcg_uniform`
    (draws consumed as x1, y1, x2, y2, ...); ``b``: the same points projected
    onto the horizontal axis; ``c``: vertices of an equilateral triangle at
    angles ``2*pi*i/3``; ``d``: the rectangle vertices ``(+-2, +-1)``.
    """
    if name in ("a", "b"):
        pts = (-2.0 + 4.0 * lcg_uniform(seed, 8)).reshape(4, 2)
        if name == "b":
            pts[:, 1] = 0.0
    elif name == "c":
        theta = 2.0 * np.pi * np.arange(1, 4) / 3.0
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
    elif name == "d":
        pts = np.array([[2.0, 1.0], [2.0, -1.0], [-2.0, 1.0], [-2.0, -1.0]])
    else:
        raise ValueError(f"unknown example {name!r}; expected one of {EXAMPLE_NAMES}")
    return from_points(pts)
