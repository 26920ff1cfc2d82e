import numpy as np
import pytest

from varsample.exceptions import DimensionMismatchError, InputError, TrackingError
from varsample.fritzjohn import (FritzJohnFamily, FritzJohnSystem, ParameterHomotopy, at_t, build_fritz_john)
from varsample.homotopy import (StraightLineHomotopy, dedup_endpoints, newton_refine, solve_total_degree,
                                total_degree_start, track_path, track_paths)
from varsample.model import PathStatus, TrackerConfig
from varsample.parser import load_example, parse


def _sorted_real(points):
    return sorted(tuple(np.round(np.real(p.u), 8)) for p in points)


# ============ Tracking ============

def test_total_degree_start_solutions():
    """Start system has prod(d_i) solutions, all exact"""
    sys = parse("vars: x y\nx^2 + y^2 - 5\nx*y - 2\n")
    start, starts = total_degree_start(sys, seed=1)
    assert start.path_count == 4
    assert len(starts) == 4
    for u in starts:
        np.testing.assert_allclose(start.evaluate(u), 0.0, atol=1e-12)


def test_total_degree_start_rejects_non_square():
    """Non-square systems are refused"""
    with pytest.raises(InputError):
        total_degree_start(load_example("circle"))


def test_solve_total_degree_finds_all_intersections():
    """Four real intersections of a circle and a hyperbola"""
    sys = parse("vars: x y\nx^2 + y^2 - 5\nx*y - 2\n")
    solutions = solve_total_degree(sys, seed=3)
    assert _sorted_real(solutions) == [(-2.0, -1.0), (-1.0, -2.0), (1.0, 2.0), (2.0, 1.0)]
    for p in solutions:
        assert p.status == PathStatus.CONVERGED
        assert p.residual <= TrackerConfig().endpoint_tol


def test_solve_total_degree_drops_solutions_at_infinity():
    """Paths going to infinity are not reported"""
    # two of the four Bezout paths go to infinity
    sys = parse("vars: x y\nx^2 - 1\nx*y - 1\n")
    solutions = solve_total_degree(sys, seed=5)
    assert _sorted_real(solutions) == [(-1.0, -1.0), (1.0, 1.0)]


def test_track_paths_preserves_order_with_workers():
    """Results come back in start order with a worker pool"""
    sys = parse("vars: x\nx^3 - 2*x + 1\n")
    start, starts = total_degree_start(sys, seed=2)
    H = StraightLineHomotopy(sys, start)
    serial = track_paths(H, starts, workers=1)
    parallel = track_paths(H, starts, workers=2)
    assert [p.start_index for p in parallel] == [0, 1, 2]
    for a, b in zip(serial, parallel):
        np.testing.assert_allclose(a.u, b.u, atol=1e-9)


def test_track_path_rejects_bad_start():
    """A start that is not a t=1 solution raises"""
    sys = parse("vars: x\nx^2 - 2\n")
    start, _ = total_degree_start(sys, seed=0)
    with pytest.raises(TrackingError):
        track_path(StraightLineHomotopy(sys, start), np.array([5.0 + 5j]))


def test_newton_refine_singular():
    """Singular Jacobian ends refinement with singular status"""
    sys = parse("vars: x\nx^2\n")
    result = newton_refine(sys, np.array([0.0]), tol=1e-12)
    assert result.status == PathStatus.SINGULAR


def test_dedup_endpoints():
    """Duplicate endpoints collapse to one"""
    sys = parse("vars: x\nx^2 - 1\n")
    points = solve_total_degree(sys, seed=0)
    assert len(dedup_endpoints(points + points)) == 2


def test_linear_homotopy_reaches_target_root():
    """u - 1 deforms to u - 2 and lands on 2"""
    start = parse("vars: u\nu - 1\n")
    target = parse("vars: u\nu - 2\n")
    end = track_path(StraightLineHomotopy(target, start), np.array([1.0 + 0j]))
    assert end.status == PathStatus.CONVERGED
    assert abs(end.u[0] - 2.0) <= 1e-10


def test_gamma_twisted_quadratic_reaches_both_roots():
    """u^2 - 1 deforms to u^2 - 4 and lands on +-2"""
    start = parse("vars: u\nu^2 - 1\n")
    target = parse("vars: u\nu^2 - 4\n")
    H = StraightLineHomotopy(target, start, gamma=np.exp(0.9j))
    ends = track_paths(H, [np.array([1.0 + 0j]), np.array([-1.0 + 0j])])
    assert all(p.status == PathStatus.CONVERGED for p in ends)
    assert sorted(round(float(np.real(p.u[0])), 10) for p in ends) == [-2.0, 2.0]
    assert max(abs(np.imag(p.u[0])) for p in ends) <= 1e-10


def test_newton_refine_square_root_of_two():
    """Newton from 1.4 converges to sqrt(2)"""
    result = newton_refine(parse("vars: u\nu^2 - 2\n"), np.array([1.4]), tol=1e-12)
    assert result.status == PathStatus.CONVERGED
    assert result.residual <= 1e-12
    assert result.u[0] == pytest.approx(np.sqrt(2), abs=1e-12)


def test_newton_refine_keeps_exact_root():
    """An exact root is returned untouched"""
    result = newton_refine(parse("vars: u\nu^2 - 4\n"), np.array([2.0]), tol=1e-12)
    assert result.u[0] == 2.0
    assert result.residual == 0.0
    assert result.iterations == 0


def test_track_path_starts_at_max_step():
    """A straight path takes max_step strides from the start"""
    start = parse("vars: u\nu - 1\n")
    target = parse("vars: u\nu - 2\n")
    end = track_path(StraightLineHomotopy(target, start), np.array([1.0 + 0j]), TrackerConfig(max_step=0.25))
    assert end.steps == 4
    assert end.rejections == 0


# ============ Fritz John systems ============

def test_fritz_john_needs_square_reduction():
    """Overdetermined input must be randomized first"""
    with pytest.raises(DimensionMismatchError):
        FritzJohnFamily(load_example("twisted_cubic_cone"))


def test_fritz_john_degrees_follow_gradient_degree():
    """Stationarity degrees follow the gradient degrees"""
    family = FritzJohnFamily(load_example("quartic_v1"))
    assert family.size == 2 * 3 - 2 + 1
    assert family.degrees == [4, 4, 4, 4, 1]


def test_fritz_john_jacobian_matches_finite_differences():
    """Jacobian and t-derivative agree with central differences"""
    sys = load_example("circle")
    G = build_fritz_john(sys, [0.3, -0.2], seed=4)
    rng = np.random.default_rng(1)
    u = rng.standard_normal(G.size) + 1j * rng.standard_normal(G.size)
    t = 0.4
    jac = G.jacobian(u, t)
    h = 1e-7
    for j in range(G.size):
        e = np.zeros(G.size, dtype=complex)
        e[j] = h
        column = (G.evaluate(u + e, t) - G.evaluate(u - e, t)) / (2 * h)
        np.testing.assert_allclose(jac[:, j], column, atol=1e-6)
    np.testing.assert_allclose(G.dt(u, t), (G.evaluate(u, t + h) - G.evaluate(u, t - h)) / (2 * h), atol=1e-6)


def test_parameter_homotopy_derivative():
    """Parameter direction derivative agrees with central differences"""
    sys = load_example("circle")
    family = FritzJohnFamily(sys)
    a = build_fritz_john(sys, [0.1, 0.2], seed=1)
    b = build_fritz_john(sys, [1.5, -0.4], seed=2)
    H = ParameterHomotopy(family, a.params, b.params, t=1.0)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(family.size) + 1j * rng.standard_normal(family.size)
    h = 1e-7
    numeric = (H.evaluate(u, 0.5 + h) - H.evaluate(u, 0.5 - h)) / (2 * h)
    np.testing.assert_allclose(H.dt(u, 0.5), numeric, atol=1e-6)


def test_fritz_john_critical_points_of_circle():
    """Both critical points of the distance to the circle are found"""
    sys = load_example("circle")
    G = build_fritz_john(sys, [0.6, 0.0], seed=9)
    square = at_t(G, 1.0)
    stage_one = solve_total_degree(square, seed=0)
    assert len(stage_one) == 2
    endpoints = track_paths(G, [p.u for p in stage_one])
    xs = sorted(round(float(np.real(p.u[0])), 8) for p in endpoints if p.converged)
    assert xs == [-1.0, 1.0]


def test_critical_polynomials_are_real_and_homogeneous():
    """Critical equations vanish at a known critical point"""
    sys = load_example("circle")
    G = FritzJohnSystem(sys, [0.5, 0.5], np.ones(2), np.zeros(1))
    polys = G.critical_polynomials()
    assert len(polys) == 3
    assert G.var_names() == ["x1", "x2", "lambda0", "lambda1"]
    # x on the circle with lambda0 (x - y) + lambda1 * 2x = 0
    x = np.array([1 / np.sqrt(2), 1 / np.sqrt(2)])
    lam0 = 1.0
    lam1 = -lam0 * (1 - 0.5 * np.sqrt(2)) / 2
    u = np.concatenate([x, [lam0, lam1]])
    for p in polys:
        assert p.evaluate(u) == pytest.approx(0.0, abs=1e-12)


def test_fritz_john_combined_evaluation_matches_separate_calls():
    """Single-pass residual and Jacobian equal the separate ones"""
    sys = load_example("torus")
    G = build_fritz_john(sys, [0.3, -0.2, 0.9, 0.1], seed=6)
    rng = np.random.default_rng(2)
    u = rng.standard_normal(G.size) + 1j * rng.standard_normal(G.size)
    values, jac = G.evaluate_and_jacobian(u, 0.3)
    np.testing.assert_allclose(values, G.evaluate(u, 0.3), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(jac, G.jacobian(u, 0.3), rtol=1e-13, atol=1e-13)
    H = ParameterHomotopy(G.family, build_fritz_john(sys, [1, 1, 1, 1], seed=1).params, G.params)
    values, jac = H.evaluate_and_jacobian(u, 0.4)
    np.testing.assert_allclose(values, H.evaluate(u, 0.4), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(jac, H.jacobian(u, 0.4), rtol=1e-13, atol=1e-13)
