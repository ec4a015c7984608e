import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geoquant import (
    Diagnosis,
    Status,
    Uniqueness,
    builtin_example,
    from_points,
    objective_value,
    optimality_certificate,
    search_radius,
    solve_quantile,
    subgradient,
    uniqueness_diagnosis,
    univariate_quantile_on_line,
)
from oracles import grid_minimum, grid_slack, objective_direct, rotation, weighted_quantile_interval

# Positional accuracy of a converged solve. The residual bound ``tol`` is on
# the gradient, so the error in mu is about tol / curvature, which is large
# when the objective is flat (alpha near 1).
MU_TOL = 1e-7


def unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def random_instance(rng, max_points=6, max_alpha=0.95):
    n = int(rng.integers(1, max_points + 1))
    pts = rng.uniform(-3, 3, size=(n, 2))
    w = rng.uniform(0.1, 1.0, size=n)
    return from_points(pts, w), float(rng.uniform(0, max_alpha)), unit(rng.uniform(0, 2 * math.pi))


def test_search_radius():
    unit_ball = from_points([[0.6, 0.8], [-1, 0], [0, 0.5]])
    assert search_radius(unit_ball, 0.0) == pytest.approx(2.02)
    corner = from_points([[2, 2], [-1, 0]])
    assert search_radius(corner, 0.999) == pytest.approx(2 * 2 * math.sqrt(2) * 1000 * 1.01)
    assert search_radius(from_points([[0, 0]]), 0.7) == 0.0
    with pytest.raises(ValueError):
        search_radius(corner, 1.0)


def test_non_unique_interval(five_line):
    sol = solve_quantile(five_line, 0.6, [1, 0])
    assert sol.status is Status.REDUCED
    assert sol.uniqueness is Uniqueness.NON_UNIQUE_INTERVAL
    lo, hi = sol.interval
    assert lo.tolist() == [1.0, 0.0] and hi.tolist() == [2.0, 0.0]
    assert sol.mu.tolist() == [1.5, 0.0]
    assert sol.objective == pytest.approx(-0.4, abs=1e-12)
    for e in (lo, hi, 0.3 * lo + 0.7 * hi):
        assert objective_value(five_line, 0.6, [1, 0], e) == pytest.approx(sol.objective, abs=1e-10)
    assert optimality_certificate(five_line, 0.6, [1, 0], [1.5, 0]).certified


def test_five_line_other_direction(five_line):
    sol = solve_quantile(five_line, 0.6, [-1, 0])
    assert [e.tolist() for e in sol.interval] == [[-2.0, 0.0], [-1.0, 0.0]]


def test_unique_on_line_atom(three_line):
    sol = solve_quantile(three_line, 0.2, [0, 1])
    assert sol.status is Status.CONVERGED
    assert sol.atom_hit and sol.uniqueness is Uniqueness.UNIQUE
    assert np.allclose(sol.mu, [0, 0], atol=1e-6)


def test_leaves_line_when_margin_negative(three_line):
    sol = solve_quantile(three_line, 0.5, [0, 1])
    assert sol.status is Status.CONVERGED and not sol.atom_hit
    assert sol.mu[0] == pytest.approx(0, abs=1e-8) and sol.mu[1] > 0.1
    # Stationarity in y: 1/3 + (2/3) y / sqrt(1 + y^2) = 1/2.
    assert sol.mu[1] == pytest.approx(1 / math.sqrt(15), abs=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.99])
def test_dirac(alpha):
    P = from_points([[3, 4]])
    sol = solve_quantile(P, alpha, unit(1.1))
    assert sol.mu.tolist() == [3.0, 4.0] and sol.residual == 0.0


def test_rectangle_median():
    sol = solve_quantile(builtin_example("d"), 0.0, unit(0.7))
    assert np.allclose(sol.mu, 0, atol=1e-10)
    assert optimality_certificate(builtin_example("d"), 0.0, [1, 0], [0, 0]).residual == 0.0


def test_triangle_vertex_quantile():
    # Frozen from the grid oracle: the vertex (1, 0) is optimal at alpha=.5.
    sol = solve_quantile(builtin_example("c"), 0.5, [1, 0])
    assert sol.atom_hit and sol.mu == pytest.approx([1, 0], abs=1e-15)
    assert sol.objective == pytest.approx(2 / math.sqrt(3) - 1.5, abs=1e-14)


def test_univariate_examples(five_line):
    z0, us = np.zeros(2), np.array([1.0, 0.0])
    q = univariate_quantile_on_line(five_line, z0, us, 0.6, 1)
    assert q.lo.tolist() == [1, 0] and q.hi.tolist() == [2, 0] and q.canonical.tolist() == [1.5, 0]
    q = univariate_quantile_on_line(five_line, z0, us, 0.0, 1)
    assert q.lo.tolist() == q.hi.tolist() == [0, 0]
    q = univariate_quantile_on_line(five_line, z0, us, 0.6, -1)
    assert q.lo.tolist() == [-2, 0] and q.hi.tolist() == [-1, 0]
    with pytest.raises(ValueError):
        univariate_quantile_on_line(builtin_example("c"), z0, us, 0.5)
    with pytest.raises(ValueError):
        univariate_quantile_on_line(five_line, z0, us, 0.5, sign=0)


@given(
    st.lists(st.integers(-6, 6), min_size=1, max_size=8),
    st.lists(st.integers(1, 4), min_size=8, max_size=8),
    st.sampled_from([0.0, 0.1, 0.2, 0.25, 0.5, 0.6, 0.75, 0.9]),
    st.sampled_from([1, -1]),
)
def test_univariate_matches_brute_force(xs, ws, alpha, sign):
    P = from_points([[x, 0.0] for x in xs], ws[: len(xs)])
    q = univariate_quantile_on_line(P, [0, 0], [1, 0], alpha, sign)
    lo, hi = weighted_quantile_interval(P.points[:, 0], P.weights, (1 + sign * alpha) / 2)
    assert (q.lo[0], q.hi[0]) == (lo, hi)


def test_alpha_zero_line_reduces_to_median_interval():
    P = from_points([[0, 0], [1, 1], [2, 2], [3, 3]])
    sol = solve_quantile(P, 0.0, unit(2.0))
    assert sol.status is Status.REDUCED and sol.uniqueness is Uniqueness.NON_UNIQUE_INTERVAL
    assert [e.tolist() for e in sol.interval] == [[1, 1], [2, 2]]


def test_off_direction_line_is_unique():
    b = builtin_example("b")
    sol = solve_quantile(b, 0.5, [0, 1])
    assert sol.status is Status.CONVERGED and sol.uniqueness is Uniqueness.UNIQUE
    assert abs(sol.mu[1]) > 0


def test_diagnosis():
    a, b = builtin_example("a"), builtin_example("b")
    for alpha in (0.0, 0.5):
        assert uniqueness_diagnosis(a, alpha, unit(0.4)) is Diagnosis.UNIQUE_NOT_ON_LINE
    assert uniqueness_diagnosis(b, 0.5, [0, 1]) is Diagnosis.UNIQUE_ALPHA_POSITIVE_OFF_DIRECTION
    assert uniqueness_diagnosis(b, 0.5, [1, 0]) is Diagnosis.POSSIBLY_NON_UNIQUE_LINE_DIRECTION
    assert uniqueness_diagnosis(b, 0.5, [-1, 0]) is Diagnosis.POSSIBLY_NON_UNIQUE_LINE_DIRECTION
    assert uniqueness_diagnosis(b, 0.0, [0, 1]) is Diagnosis.POSSIBLY_NON_UNIQUE_MEDIAN_ON_LINE
    assert uniqueness_diagnosis(from_points([[1, 1]]), 0.5, [0, 1]) is Diagnosis.SINGLE_ATOM


def test_validation(five_line):
    for kwargs in ({"alpha": 1.0}, {"alpha": -0.1}, {"tol": 0.0}, {"u": [1, 1]}, {"u": [1, 0, 0]}):
        args = {"P": five_line, "alpha": 0.5, "u": [1, 0], **kwargs}
        with pytest.raises(ValueError):
            solve_quantile(**args)
    with pytest.raises(ValueError):
        solve_quantile(builtin_example("c"), 0.5, [1, 0], warm_start=[1, 2, 3])


def test_max_iter_reported():
    sol = solve_quantile(builtin_example("a"), 0.99, [1, 0], max_iter=2)
    assert sol.status is Status.MAX_ITER and not sol.ok and sol.iterations == 2


def test_grid_oracle_sample(rng):
    for _ in range(15):
        P, a, u = random_instance(rng)
        sol = solve_quantile(P, a, u)
        assert sol.ok
        R = search_radius(P, a)
        if R == 0:
            continue
        best, argmins, h = grid_minimum(P.points, P.weights, a, u, R)
        assert sol.objective <= best + grid_slack(a, h)


def test_certificate_soundness(rng):
    for _ in range(30):
        P, a, u = random_instance(rng)
        sol = solve_quantile(P, a, u)
        cert = optimality_certificate(P, a, u, sol.mu)
        assert cert.certified
        delta = rng.normal(size=(100, 2))
        delta *= 1e-3 * max(P.spread(), 1e-3) / np.linalg.norm(delta, axis=1, keepdims=True)
        f = objective_direct(P.points, P.weights, a, u, sol.mu + delta)
        assert np.all(sol.objective <= f + 1e-12)


def test_converged_residual_and_ball(rng):
    for _ in range(40):
        P, a, u = random_instance(rng, max_alpha=0.99)
        sol = solve_quantile(P, a, u, tol=1e-10)
        assert sol.ok
        if sol.status is Status.CONVERGED:
            assert sol.residual <= 1e-10
        centered = P.shift(-P.center())
        assert np.linalg.norm(sol.mu - P.center()) <= search_radius(centered, a)


def test_translation_equivariance(rng):
    for _ in range(30):
        P, a, u = random_instance(rng, max_alpha=0.9)
        c = rng.uniform(-5, 5, size=2)
        s0 = solve_quantile(P, a, u)
        s1 = solve_quantile(P.shift(c), a, u)
        assert s1.mu == pytest.approx(s0.mu + c, abs=MU_TOL * (1 + np.linalg.norm(c)))


def test_rotation_equivariance(rng):
    for _ in range(30):
        P, a, u = random_instance(rng, max_alpha=0.9)
        Q = rotation(rng.uniform(0, 2 * math.pi))
        s0 = solve_quantile(P, a, u)
        s1 = solve_quantile(P.transform(Q), a, Q @ u)
        assert s1.mu == pytest.approx(Q @ s0.mu, abs=MU_TOL)


def test_warm_start_irrelevant_to_answer(rng):
    P, a, u = random_instance(rng)
    ref = solve_quantile(P, a, u).mu
    for start in rng.uniform(-20, 20, size=(5, 2)):
        assert solve_quantile(P, a, u, warm_start=start).mu == pytest.approx(ref, abs=MU_TOL)


def test_anderson_off_gives_same_answer():
    P = builtin_example("a")
    s0 = solve_quantile(P, 0.9, unit(0.5))
    s1 = solve_quantile(P, 0.9, unit(0.5), anderson=0, max_iter=100000)
    assert s1.ok and s1.mu == pytest.approx(s0.mu, abs=1e-6)


def test_higher_dimension():
    rng = np.random.default_rng(3)
    P = from_points(rng.normal(size=(30, 5)))
    u = rng.normal(size=5)
    u /= np.linalg.norm(u)
    sol = solve_quantile(P, 0.7, u)
    assert sol.status is Status.CONVERGED
    assert subgradient(P, 0.7, u, sol.mu).residual <= 1e-10
