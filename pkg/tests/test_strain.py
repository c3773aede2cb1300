"""Strain rates, grid sampling, and ridge/trench extraction."""

import io
import math
import random

import numpy as np
import pytest

from ilekoop.expr import parse_polynomial
from ilekoop.families import QuadraticParams, make_quadratic_family, make_transformed_family
from ilekoop.strain import (
    Grid2D,
    ScalarField,
    extract_extremal_set,
    rate_field,
    strain_rates,
    strain_tensor,
    write_csv,
    write_pgm,
)
from ilekoop.vectorfield import VectorField2D

from test_vectorfield import cubic_example_field


def test_saddle_rates_midheight():
    s1, s2 = strain_rates(VectorField2D.saddle(), 2.0, 0.5)
    assert s1 == pytest.approx(-0.25, abs=1e-15)
    assert s2 == pytest.approx(1.0, abs=1e-15)


def test_rigid_rotation_has_zero_strain():
    f = VectorField2D.polynomial(parse_polynomial("-y"), parse_polynomial("x"))
    for x, y in [(0.0, 0.0), (1.0, 2.0), (-0.3, 0.7)]:
        assert strain_rates(f, x, y) == (0.0, 0.0)


def test_quadratic_family_repulsion_value():
    f = make_quadratic_family(QuadraticParams(1.0, 1.0))
    _, s2 = strain_rates(f, 1.0, 0.0)
    assert s2 == pytest.approx(2.0, abs=1e-14)


def test_rate_ordering_and_trace():
    rng = random.Random(23)
    fields = [
        VectorField2D.saddle(),
        cubic_example_field(),
        make_quadratic_family(QuadraticParams(-1.2, 0.4)),
    ]
    for f in fields:
        for _ in range(50):
            x, y = rng.uniform(-1, 1), rng.uniform(-0.9, 0.9)
            s1, s2 = strain_rates(f, x, y)
            j = f.jacobian(x, y)
            assert s1 <= s2
            assert s1 + s2 == pytest.approx(j.a11 + j.a22, abs=1e-12)


def test_rates_invariant_under_added_rotation():
    rng = random.Random(29)
    base_p = parse_polynomial("x*y - 2*y")
    base_q = parse_polynomial("x^2 + y^2")
    f = VectorField2D.polynomial(base_p, base_q)
    for _ in range(20):
        omega = rng.uniform(-3, 3)
        g = VectorField2D.polynomial(
            base_p + omega * parse_polynomial("-y"), base_q + omega * parse_polynomial("x")
        )
        x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
        a = strain_rates(f, x, y)
        b = strain_rates(g, x, y)
        assert a[0] == pytest.approx(b[0], abs=1e-12)
        assert a[1] == pytest.approx(b[1], abs=1e-12)


def test_shear_free_rates_are_diagonal_entries():
    # With no shear the diagonal entries are the eigenvalues; ordering is
    # whichever of du/dx, dv/dy is smaller at the point.
    rng = random.Random(31)
    f = make_quadratic_family(QuadraticParams(0.8, 0.5))
    for _ in range(50):
        x, y = rng.uniform(-2, 2), rng.uniform(-2, 2)
        j = f.jacobian(x, y)
        s1, s2 = strain_rates(f, x, y)
        lo, hi = sorted((j.a11, j.a22))
        assert s1 == pytest.approx(lo, abs=1e-12)
        assert s2 == pytest.approx(hi, abs=1e-12)


def test_strain_tensor_symmetry():
    t = strain_tensor(cubic_example_field(), 0.4, -0.2)
    lo, hi = t.eigenvalues()
    assert lo <= hi


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2D(0.0, 1.0, 1, 0.0, 1.0, 5)
    with pytest.raises(ValueError):
        Grid2D(1.0, 0.0, 5, 0.0, 1.0, 5)


def test_saddle_rate_field_minimum_on_axis():
    grid = Grid2D(-1.0, 1.0, 11, -0.75, 0.75, 11)
    sf = rate_field(VectorField2D.saddle(), grid, "s1")
    assert sf.min() == pytest.approx(-1.0, abs=1e-14)
    # minimum attained exactly on the y = 0 row
    row = sf.values[5]
    assert np.all(np.abs(row + 1.0) < 1e-14)


def test_saddle_rate_field_symmetric_in_y():
    # dyadic spacing so the +y and -y rows carry exactly mirrored coordinates
    grid = Grid2D(-1.0, 1.0, 9, -0.5, 0.5, 9)
    sf = rate_field(VectorField2D.saddle(), grid, "s1")
    assert np.array_equal(sf.values, sf.values[::-1])


def test_cubic_example_rate_field_minimum_on_line():
    # Keep the grid where dQ/dy is the smaller diagonal entry.
    grid = Grid2D(0.1, 0.9, 33, 0.1, 0.9, 33)
    sf = rate_field(cubic_example_field(), grid, "s1")
    assert sf.min() >= -1e-12
    ys, xs = np.meshgrid(grid.ys(), grid.xs(), indexing="ij")
    expected = ((xs + ys) - 1.0) ** 2
    assert np.max(np.abs(sf.values - expected)) < 1e-12


def test_rate_field_threads_bitwise_identical():
    grid = Grid2D(-1.0, 1.0, 40, -0.7, 0.7, 37)
    a = rate_field(VectorField2D.saddle(), grid, "s1", threads=1)
    b = rate_field(VectorField2D.saddle(), grid, "s1", threads=4)
    assert np.array_equal(a.values, b.values)
    f = cubic_example_field()
    a = rate_field(f, grid, "s2", threads=1)
    b = rate_field(f, grid, "s2", threads=5)
    assert np.array_equal(a.values, b.values)


def test_extract_trench_on_cubic_example():
    grid = Grid2D(0.1, 0.9, 41, 0.1, 0.9, 41)
    sf = rate_field(cubic_example_field(), grid, "s1")
    cell = math.hypot(grid.dx, grid.dy)
    hits = extract_extremal_set(sf, "trench", grad_tol=3.5 * cell, curv_tol=1e-6)
    assert hits
    xs, ys = grid.xs(), grid.ys()
    for ix, iy in hits:
        assert abs(xs[ix] + ys[iy] - 1.0) / math.sqrt(2.0) <= cell


def test_extract_trench_transformed_cubic():
    f = make_transformed_family(-1.0, [-1.0])
    grid = Grid2D(-0.5, 0.5, 41, -1.0, 1.0, 21)
    sf = rate_field(f, grid, "s1")
    hits = extract_extremal_set(sf, "trench", grad_tol=3.0 * grid.dx, curv_tol=1e-6)
    assert hits
    xs = grid.xs()
    for ix, _ in hits:
        assert abs(xs[ix]) <= grid.dx


def test_extract_ridge():
    grid = Grid2D(0.1, 0.9, 31, 0.1, 0.9, 31)
    ys, xs = np.meshgrid(grid.ys(), grid.xs(), indexing="ij")
    sf = ScalarField(grid, -(((xs + ys) - 1.0) ** 2))
    cell = math.hypot(grid.dx, grid.dy)
    hits = extract_extremal_set(sf, "ridge", grad_tol=4.0 * cell, curv_tol=1e-6)
    assert hits
    for ix, iy in hits:
        assert abs(grid.xs()[ix] + grid.ys()[iy] - 1.0) / math.sqrt(2.0) <= cell


def test_extract_constant_field_empty():
    grid = Grid2D(0.0, 1.0, 5, 0.0, 1.0, 5)
    sf = ScalarField(grid, np.ones((5, 5)))
    assert extract_extremal_set(sf, "trench") == []
    assert extract_extremal_set(sf, "ridge") == []


def test_extract_needs_three_nodes():
    grid = Grid2D(0.0, 1.0, 2, 0.0, 1.0, 5)
    sf = ScalarField(grid, np.zeros((5, 2)))
    with pytest.raises(ValueError):
        extract_extremal_set(sf, "trench")


def test_extract_sorted_row_major():
    grid = Grid2D(0.1, 0.9, 21, 0.1, 0.9, 21)
    sf = rate_field(cubic_example_field(), grid, "s1")
    hits = extract_extremal_set(sf, "trench", grad_tol=0.5, curv_tol=1e-6)
    assert hits == sorted(hits, key=lambda p: (p[1], p[0]))


def test_csv_format():
    grid = Grid2D(0.0, 1.0, 2, 0.0, 1.0, 2)
    sf = ScalarField(grid, np.array([[0.0, 0.25], [0.5, 1.0]]))
    buf = io.StringIO()
    write_csv(sf, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 5
    assert lines[1] == "0,0,0"
    assert lines[2] == "1,0,0.25"
    assert lines[3] == "0,1,0.5"


def test_pgm_format():
    grid = Grid2D(0.0, 1.0, 2, 0.0, 1.0, 2)
    sf = ScalarField(grid, np.array([[0.0, 0.25], [0.5, 1.0]]))
    buf = io.StringIO()
    write_pgm(sf, buf)
    lines = buf.getvalue().splitlines()
    assert lines[:3] == ["P2", "2 2", "255"]
    # top row corresponds to ymax
    assert lines[3] == "128 255"
    assert lines[4] == "0 64"


def test_scalar_field_rejects_nonfinite():
    grid = Grid2D(0.0, 1.0, 2, 0.0, 1.0, 2)
    with pytest.raises(ValueError):
        ScalarField(grid, np.array([[0.0, np.inf], [0.0, 0.0]]))
