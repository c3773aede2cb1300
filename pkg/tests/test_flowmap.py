"""Integrator, Cauchy-Green tensors, and FTLE tests against analytic oracles."""

import math
import random

import numpy as np
import pytest

from ilekoop.errors import DomainError
from ilekoop.expr import parse_polynomial
from ilekoop.families import make_transformed_family
from ilekoop.flowmap import (
    IntegratorConfig,
    cauchy_green,
    flow_endpoint,
    ftle,
    ftle_field,
    integrate,
    saddle_cauchy_green,
    saddle_ftle,
)
from ilekoop.strain import Grid2D, strain_rates
from ilekoop.vectorfield import VectorField2D, analytic_saddle_flow

CFG = IntegratorConfig(step=1e-3)


def test_integrate_saddle_endpoint():
    traj = integrate(VectorField2D.saddle(), (1.0, 0.0), 1.0, CFG)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == 1.0
    x, y = traj.states[-1]
    assert abs(x - math.e) < 1e-10
    assert y == 0.0


def test_integrate_zero_time():
    traj = integrate(VectorField2D.saddle(), (0.4, 0.2), 0.0, CFG)
    assert traj.times == [0.0]
    assert traj.states == [(0.4, 0.2)]


def test_integrate_partial_final_step():
    t = 0.12345
    traj = integrate(VectorField2D.saddle(), (1.0, 0.3), t, CFG)
    assert traj.times[-1] == t
    exact = analytic_saddle_flow((1.0, 0.3), t)
    assert traj.states[-1] == pytest.approx(exact, rel=1e-11)


def test_integrate_transformed_first_coordinate():
    lam = -1.0
    f = make_transformed_family(lam, [-1.0])
    end = flow_endpoint(f, (1.0, 0.0), 1.0, CFG)
    assert abs(end[0] - math.exp(lam * 0.5)) < 1e-9


def test_integrate_backward_matches_analytic():
    end = flow_endpoint(VectorField2D.saddle(), (0.7, 0.5), -0.8, CFG)
    exact = analytic_saddle_flow((0.7, 0.5), -0.8)
    assert end == pytest.approx(exact, rel=1e-11)


def test_trajectory_times_strictly_monotone():
    f = VectorField2D.saddle()
    for t in (0.0123, -0.0123):
        traj = integrate(f, (0.5, 0.2), t, IntegratorConfig(step=5e-3))
        diffs = [b - a for a, b in zip(traj.times, traj.times[1:])]
        assert all(d > 0 for d in diffs) or all(d < 0 for d in diffs)
        assert traj.times[-1] == t
        assert len(traj.times) == len(traj.states)


def test_integrate_step_budget():
    with pytest.raises(ValueError):
        integrate(VectorField2D.saddle(), (1.0, 0.0), 1e7, IntegratorConfig(step=1e-3))


def test_integrate_domain_exit():
    # Backward flow pushes |y| toward 1; far enough back it leaves the domain.
    with pytest.raises(DomainError):
        integrate(VectorField2D.saddle(), (0.0, 0.999999), -20.0, IntegratorConfig(step=1e-2))


def test_integrate_finite_time_blowup():
    from ilekoop.errors import NumericalError

    f = VectorField2D.polynomial(parse_polynomial("1 + x^2"), parse_polynomial("0"))
    with pytest.raises(NumericalError):
        integrate(f, (0.0, 0.0), 2.0, IntegratorConfig(step=1e-3))


def test_rk4_fourth_order_on_saddle():
    pt, t = (1.0, 0.5), 1.0
    exact = analytic_saddle_flow(pt, t)

    def err(step):
        end = flow_endpoint(VectorField2D.saddle(), pt, t, IntegratorConfig(step=step))
        return math.hypot(end[0] - exact[0], end[1] - exact[1])

    e1, e2 = err(0.02), err(0.01)
    assert e1 / e2 >= 12.0


def test_cauchy_green_saddle_axis():
    c = cauchy_green(VectorField2D.saddle(), (1.0, 0.0), -0.5, 1e-5, CFG)
    assert c.sxx == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert c.syy == pytest.approx(math.exp(1.0), abs=1e-6)
    assert c.sxy == pytest.approx(0.0, abs=1e-6)


def test_cauchy_green_identity_at_zero_time():
    c = cauchy_green(VectorField2D.saddle(), (0.3, 0.2), 0.0, 1e-5, CFG)
    assert c.sxx == pytest.approx(1.0, abs=1e-9)
    assert c.syy == pytest.approx(1.0, abs=1e-9)
    assert c.sxy == pytest.approx(0.0, abs=1e-9)


def test_cauchy_green_matches_saddle_oracle():
    rng = random.Random(37)
    f = VectorField2D.saddle()
    for _ in range(25):
        pt = (rng.uniform(-2, 2), rng.uniform(-0.8, 0.8))
        t = rng.uniform(-0.8, -0.1)
        got = cauchy_green(f, pt, t, 1e-5, CFG)
        want = saddle_cauchy_green(pt, t)
        assert got.sxx == pytest.approx(want.sxx, abs=1e-5)
        assert got.syy == pytest.approx(want.syy, abs=1e-5)
        assert got.sxy == pytest.approx(0.0, abs=1e-5)


def test_cauchy_green_positive_semidefinite():
    rng = random.Random(41)
    fields = [
        VectorField2D.saddle(),
        make_transformed_family(1.0, [0.5]),
        VectorField2D.polynomial(parse_polynomial("x*y"), parse_polynomial("y - x^2")),
    ]
    for f in fields:
        for _ in range(15):
            pt = (rng.uniform(-1, 1), rng.uniform(-0.7, 0.7))
            t = rng.uniform(-0.5, 0.5) or 0.25
            c = cauchy_green(f, pt, t, 1e-5, CFG)
            lo, _ = c.eigenvalues()
            assert lo >= -1e-10


def test_ftle_saddle_axis_value():
    val = ftle(VectorField2D.saddle(), (1.0, 0.0), -0.5, 1e-5, CFG)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_ftle_small_time_near_rate():
    val = ftle(VectorField2D.saddle(), (1.0, 0.5), -0.01, 1e-5, CFG)
    assert val == pytest.approx(0.25, abs=0.05)


def test_ftle_linear_field_any_time():
    f = VectorField2D.polynomial(parse_polynomial("x"), parse_polynomial("-y"))
    for t in (0.7, -0.4, 1.5):
        assert ftle(f, (0.2, -0.1), t, 1e-5, CFG) == pytest.approx(1.0, abs=1e-8)


def test_ftle_rejects_zero_time():
    with pytest.raises(ValueError):
        ftle(VectorField2D.saddle(), (0.0, 0.0), 0.0, 1e-5, CFG)


def test_ftle_matches_saddle_formula():
    rng = random.Random(43)
    f = VectorField2D.saddle()
    for _ in range(30):
        pt = (rng.uniform(-2, 2), rng.uniform(-0.7, 0.7))
        got = ftle(f, pt, -0.5, 1e-5, CFG)
        assert got == pytest.approx(saddle_ftle(pt, -0.5), abs=1e-5)


def test_ftle_field_small_time_limit():
    grid = Grid2D(-1.0, 1.0, 21, -0.75, 0.75, 21)
    sf = ftle_field(VectorField2D.saddle(), grid, -0.05, 1e-5, CFG)
    ys = grid.ys()
    worst = 0.0
    for iy in range(grid.ny):
        expected = 1.0 - 3.0 * ys[iy] * ys[iy]
        worst = max(worst, float(np.max(np.abs(sf.values[iy] - expected))))
    assert worst <= 0.15


def test_ftle_field_error_shrinks_with_time():
    grid = Grid2D(-0.5, 0.5, 5, 0.45, 0.55, 5)
    f = VectorField2D.saddle()

    def max_err(t):
        sf = ftle_field(f, grid, t, 1e-5, CFG)
        ys = grid.ys()
        return max(
            float(np.max(np.abs(sf.values[iy] - saddle_ftle((0.0, ys[iy]), t))))
            for iy in range(grid.ny)
        )

    # error against the instantaneous limit is linear in |t|
    def limit_err(t):
        sf = ftle_field(f, grid, t, 1e-5, CFG)
        ys = grid.ys()
        return max(
            float(np.max(np.abs(sf.values[iy] - (1.0 - 3.0 * ys[iy] ** 2))))
            for iy in range(grid.ny)
        )

    assert max_err(-0.05) < 1e-6  # finite-difference FTLE tracks the formula
    assert limit_err(-0.025) <= 0.65 * limit_err(-0.05)


def test_ftle_field_symmetric_in_y():
    grid = Grid2D(-1.0, 1.0, 7, -0.5, 0.5, 9)
    sf = ftle_field(VectorField2D.saddle(), grid, -0.1, 1e-5, CFG)
    assert np.allclose(sf.values, sf.values[::-1], rtol=0, atol=1e-12)


def test_ftle_field_threads_bitwise_identical():
    grid = Grid2D(-1.0, 1.0, 13, -0.6, 0.6, 11)
    a = ftle_field(VectorField2D.saddle(), grid, -0.1, 1e-5, CFG, threads=1)
    b = ftle_field(VectorField2D.saddle(), grid, -0.1, 1e-5, CFG, threads=4)
    assert np.array_equal(a.values, b.values)
    # polynomial fields run through the array polynomial evaluator
    f = make_transformed_family(-1.0, [-0.5])
    cfg = IntegratorConfig(step=1e-2)
    a = ftle_field(f, grid, -0.5, 1e-5, cfg, threads=1)
    b = ftle_field(f, grid, -0.5, 1e-5, cfg, threads=5)
    assert np.array_equal(a.values, b.values)


def test_ftle_to_rate_limit_linear_in_time():
    f = VectorField2D.saddle()
    pt = (0.3, 0.5)
    s1, _ = strain_rates(f, *pt)
    errs = [abs(ftle(f, pt, t, 1e-5, CFG) + s1) for t in (-0.08, -0.04, -0.02)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.35)
