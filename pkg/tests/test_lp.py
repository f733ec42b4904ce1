import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nrm_lab import errors
from nrm_lab.lp import (LpProblem, dlp_value, enumerate_vertices_oracle, solve_bounded_lp,
                        solve_dlp)

from conftest import MULTI_BOM, multi_resource, two_class


def lp(r, A, beta, u):
    return LpProblem(np.array(r, float), np.array(A, float), np.array(beta, float), np.array(u, float))


DEGENERATE = lp([2, 1], [[1, 1]], [1], [1, 1])
MULTI = lp([10, 3, 6, 1, 2], MULTI_BOM, [1, 1, 1, 1], [1] * 5)


def test_degenerate_example(backend):
    sol = solve_bounded_lp(DEGENERATE, backend=backend)
    np.testing.assert_array_equal(sol.x_star, [1, 0])
    assert sol.objective_value == 2
    assert sol.binding_rows == {0}
    assert sol.at_bound == ("upper", "lower")


def test_multi_resource_example(backend):
    # frozen from enumerate_vertices_oracle
    x, v = enumerate_vertices_oracle(MULTI)
    np.testing.assert_allclose(x, [1, 0, 0, 0, 1], atol=1e-12)
    assert v == pytest.approx(12)
    sol = solve_bounded_lp(MULTI, backend=backend)
    np.testing.assert_allclose(sol.x_star, [1, 0, 0, 0, 1], atol=1e-12)
    assert sol.objective_value == pytest.approx(12, rel=1e-12)


def test_zero_rhs(backend):
    sol = solve_bounded_lp(lp([2, 1], [[1, 1]], [0], [1, 1]), backend=backend)
    np.testing.assert_array_equal(sol.x_star, [0, 0])
    assert sol.objective_value == 0
    assert enumerate_vertices_oracle(lp([2, 1], [[1, 1]], [0], [1, 1]))[1] == 0


def test_dlp_values():
    assert dlp_value(two_class(2, 1.0, 1000)) == pytest.approx(2000)
    assert dlp_value(multi_resource(1000)) == pytest.approx(12000)
    zero = two_class(2, 0.0, 1000)
    assert dlp_value(zero) == 0
    np.testing.assert_array_equal(solve_dlp(zero).x_star, [0, 0])


def test_oracle_guard():
    big = lp(np.ones(7), np.ones((1, 7)), [1], np.ones(7))
    with pytest.raises(errors.TooLarge):
        enumerate_vertices_oracle(big)


def test_problem_validation():
    with pytest.raises(errors.DimensionMismatch):
        lp([1, 1], [[1, 1, 1]], [1], [1, 1])
    with pytest.raises(errors.ParameterOutOfRange):
        lp([1, 1], [[1, 1]], [-1], [1, 1])


def test_iteration_guard(backend):
    x, status, it = backend.solve_lp([1.0, 1.0], [[1.0, 1.0]], [1.0], [1.0, 1.0], 1e-9, 1)
    assert status == backend.STATUS_ITERATION_LIMIT
    assert it == 1


def test_numerical_failure_carries_iterations():
    class Stuck:
        @staticmethod
        def solve_lp(*args):
            return [0.0, 0.0], 1, 77

    with pytest.raises(errors.NumericalFailure) as info:
        solve_bounded_lp(DEGENERATE, backend=Stuck)
    assert info.value.iterations == 77
    assert "77 iterations" in str(info.value)


def test_json_dumps():
    sol = solve_bounded_lp(DEGENERATE)
    assert json.loads(sol.to_json())["x_star"] == [1.0, 0.0]
    assert json.loads(DEGENERATE.to_json())["upper"] == [1.0, 1.0]


def random_lp(rng, n, m):
    A = rng.integers(0, 3, size=(m, n)).astype(float)
    r = np.round(rng.uniform(0.1, 2.0, size=n), 3)
    beta = np.round(rng.uniform(0.1, 2.0, size=m), 3)
    u = np.round(rng.uniform(0.1, 2.0, size=n), 3)
    return lp(r, A, beta, u)


def check_feasible(p, x, tol=1e-7):
    assert np.all(x >= -tol) and np.all(x <= p.upper + tol)
    assert np.all(p.constraints @ x <= p.rhs + tol)


def test_oracle_equivalence_sample(rng, backend):
    for _ in range(200):
        p = random_lp(rng, rng.integers(1, 5), rng.integers(1, 4))
        sol = solve_bounded_lp(p, backend=backend)
        _, v = enumerate_vertices_oracle(p)
        assert abs(sol.objective_value - v) <= 1e-6
        check_feasible(p, sol.x_star)
        assert sol.objective_value == pytest.approx(float(p.objective @ sol.x_star), rel=1e-9)


small_lp = st.integers(1, 4).flatmap(lambda n: st.integers(1, 3).flatmap(lambda m: st.builds(
    lp,
    st.lists(st.integers(1, 20).map(lambda k: k / 10), min_size=n, max_size=n),
    st.lists(st.lists(st.integers(0, 2), min_size=n, max_size=n), min_size=m, max_size=m),
    st.lists(st.integers(0, 20).map(lambda k: k / 10), min_size=m, max_size=m),
    st.lists(st.integers(1, 20).map(lambda k: k / 10), min_size=n, max_size=n),
)))


@settings(max_examples=150, deadline=None)
@given(p=small_lp)
def test_oracle_equivalence_property(p):
    sol = solve_bounded_lp(p)
    assert abs(sol.objective_value - enumerate_vertices_oracle(p)[1]) <= 1e-6
    check_feasible(p, sol.x_star)


@settings(max_examples=100, deadline=None)
@given(p=small_lp, row=st.integers(0, 2), extra=st.floats(0, 3))
def test_monotone_in_rhs(p, row, extra):
    row = row % p.m
    beta = p.rhs.copy()
    beta[row] += extra
    bigger = lp(p.objective, p.constraints, beta, p.upper)
    assert solve_bounded_lp(bigger).objective_value >= solve_bounded_lp(p).objective_value - 1e-9


@settings(max_examples=100, deadline=None)
@given(p=small_lp, c=st.sampled_from([0.25, 0.5, 2.0, 3.0, 10.0]))
def test_scale_covariance(p, c):
    base = solve_bounded_lp(p)
    scaled = solve_bounded_lp(lp(p.objective * c, p.constraints, p.rhs, p.upper))
    np.testing.assert_allclose(scaled.x_star, base.x_star, atol=1e-12)
    assert scaled.objective_value == pytest.approx(c * base.objective_value, rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(p=small_lp)
def test_backends_bit_identical(p):
    from nrm_lab._backend import compiled_kernels, python_kernels
    ck = compiled_kernels()
    if ck is None:
        pytest.skip("compiled kernels not built")
    a = ck.solve_lp(p.objective, p.constraints, p.rhs, p.upper)
    b = python_kernels.solve_lp(p.objective, p.constraints, p.rhs, p.upper)
    assert a == b


def test_deterministic(rng):
    p = random_lp(rng, 4, 3)
    first = solve_bounded_lp(p)
    for _ in range(5):
        np.testing.assert_array_equal(solve_bounded_lp(p).x_star, first.x_star)


def test_degenerate_cycling_stress(backend):
    # many identical columns and tight rows: every pivot after the first is degenerate
    n, m = 6, 4
    p = lp(np.ones(n), np.ones((m, n)), np.zeros(m), np.ones(n))
    sol = solve_bounded_lp(p, backend=backend)
    assert sol.objective_value == 0
