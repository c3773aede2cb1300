"""Rate-of-strain tensor, attraction/repulsion rates, and grid sampling.

The symmetric part of the velocity gradient has two real eigenvalues; the
smaller one (s1) is the attraction rate and the larger one (s2) the
repulsion rate.  Both come from closed forms, so no general eigensolver is
involved.  Grids are sampled into ScalarField values that can be written as
CSV or PGM; grid evaluation may be chunked across threads and is
bit-reproducible for any thread count because every node is computed by the
same elementwise operations.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .vectorfield import VectorField2D


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric 2x2 tensor (sxx, sxy, syy)."""

    sxx: float
    sxy: float
    syy: float

    def eigenvalues(self) -> tuple[float, float]:
        """(min, max) eigenvalue pair, via the closed-form quadratic."""
        mean = 0.5 * (self.sxx + self.syy)
        d = self.sxx - self.syy
        rad = 0.5 * math.sqrt(d * d + 4.0 * self.sxy * self.sxy)
        return (mean - rad, mean + rad)


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular grid; node (ix, iy) sits at (xs()[ix], ys()[iy])."""

    xmin: float
    xmax: float
    nx: int
    ymin: float
    ymax: float
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("grid bounds must satisfy xmin < xmax and ymin < ymax")

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.ymax - self.ymin) / (self.ny - 1)

    def xs(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.nx)

    def ys(self) -> np.ndarray:
        return np.linspace(self.ymin, self.ymax, self.ny)


@dataclass
class ScalarField:
    """Values sampled on a grid; ``values[iy, ix]`` matches node (ix, iy)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise ValueError("value array shape does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scalar field contains non-finite values")

    def min(self) -> float:
        return float(np.min(self.values))

    def max(self) -> float:
        return float(np.max(self.values))


def strain_tensor(f: VectorField2D, x: float, y: float) -> SymTensor2:
    """Symmetric part of the velocity gradient at a point."""
    j = f.jacobian(x, y)
    return SymTensor2(j.a11, 0.5 * (j.a12 + j.a21), j.a22)


def strain_rates(f: VectorField2D, x: float, y: float) -> tuple[float, float]:
    """Attraction and repulsion rates (s1, s2) at a point; s1 <= s2 and
    s1 + s2 equals the divergence."""
    j = f.jacobian(x, y)
    mean = 0.5 * (j.a11 + j.a22)
    d = j.a11 - j.a22
    shear = j.a12 + j.a21
    rad = 0.5 * math.sqrt(d * d + shear * shear)
    return (mean - rad, mean + rad)


def _row_chunks(ny: int, threads: int) -> list[tuple[int, int]]:
    threads = max(1, int(threads))
    bounds = [round(ny * i / threads) for i in range(threads + 1)]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def _run_chunks(chunks, worker, threads: int):
    if threads <= 1 or len(chunks) <= 1:
        for chunk in chunks:
            worker(chunk)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, chunk) for chunk in chunks]
        for fut in futures:
            fut.result()


def rate_field(f: VectorField2D, grid: Grid2D, which: str = "s1", threads: int = 1) -> ScalarField:
    """Sample s1 or s2 on the grid.

    Per-node computation is pure, so the output is identical for any thread
    count (chunks only slice the row range; every elementwise operation is
    exactly rounded and position-independent).
    """
    if which not in ("s1", "s2"):
        raise ValueError("which must be 's1' or 's2'")
    xs = grid.xs()
    ys = grid.ys()
    out = np.empty((grid.ny, grid.nx))

    def worker(chunk):
        r0, r1 = chunk
        yv, xv = np.meshgrid(ys[r0:r1], xs, indexing="ij")
        a11, a12, a21, a22 = f.jacobian_arrays(xv, yv)
        mean = 0.5 * (a11 + a22)
        d = a11 - a22
        shear = a12 + a21
        rad = 0.5 * np.sqrt(d * d + shear * shear)
        out[r0:r1] = mean - rad if which == "s1" else mean + rad

    _run_chunks(_row_chunks(grid.ny, threads), worker, threads)
    return ScalarField(grid, out)


def default_grad_tol(f: ScalarField) -> float:
    """Scale-aware gradient tolerance: 1e-2 * (value range) / (grid spacing)."""
    rng = f.max() - f.min()
    return 1e-2 * rng / min(f.grid.dx, f.grid.dy)


def extract_extremal_set(
    f: ScalarField,
    mode: str,
    grad_tol: float | None = None,
    curv_tol: float = 1e-6,
) -> list[tuple[int, int]]:
    """Grid-local ridge or trench nodes, sorted row-major as (ix, iy) pairs.

    At each interior node the centered-difference Hessian is diagonalized;
    the eigenvector of the extreme eigenvalue is the transverse direction.
    A trench node needs transverse curvature above ``curv_tol`` and the
    gradient component along that direction below ``grad_tol``; a ridge is
    the mirrored test.  No sub-cell interpolation or curve linking is done.
    """
    if mode not in ("ridge", "trench"):
        raise ValueError("mode must be 'ridge' or 'trench'")
    if f.grid.nx < 3 or f.grid.ny < 3:
        raise ValueError("extremal-set extraction needs at least a 3x3 grid")
    if grad_tol is None:
        grad_tol = default_grad_tol(f)
    v = f.values
    dx, dy = f.grid.dx, f.grid.dy
    hits: list[tuple[int, int]] = []
    for iy in range(1, f.grid.ny - 1):
        for ix in range(1, f.grid.nx - 1):
            gx = (v[iy, ix + 1] - v[iy, ix - 1]) / (2.0 * dx)
            gy = (v[iy + 1, ix] - v[iy - 1, ix]) / (2.0 * dy)
            hxx = (v[iy, ix + 1] - 2.0 * v[iy, ix] + v[iy, ix - 1]) / (dx * dx)
            hyy = (v[iy + 1, ix] - 2.0 * v[iy, ix] + v[iy - 1, ix]) / (dy * dy)
            hxy = (
                v[iy + 1, ix + 1] - v[iy + 1, ix - 1] - v[iy - 1, ix + 1] + v[iy - 1, ix - 1]
            ) / (4.0 * dx * dy)
            lo, hi = SymTensor2(hxx, hxy, hyy).eigenvalues()
            lam = hi if mode == "trench" else lo
            if mode == "trench" and not lam > curv_tol:
                continue
            if mode == "ridge" and not lam < -curv_tol:
                continue
            ex, ey = _eigenvector(hxx, hxy, hyy, lam)
            if abs(gx * ex + gy * ey) < grad_tol:
                hits.append((ix, iy))
    hits.sort(key=lambda p: (p[1], p[0]))
    return hits


def _eigenvector(hxx: float, hxy: float, hyy: float, lam: float) -> tuple[float, float]:
    if abs(hxy) > 1e-300:
        vx, vy = hxy, lam - hxx
    elif abs(lam - hxx) <= abs(lam - hyy):
        vx, vy = 1.0, 0.0
    else:
        vx, vy = 0.0, 1.0
    norm = math.hypot(vx, vy)
    return (vx / norm, vy / norm)


# -- file formats ---------------------------------------------------------------

def format_float(v: float) -> str:
    """17 significant digits, enough to reproduce any double exactly."""
    return f"{v:.17g}"


def write_csv(f: ScalarField, stream) -> None:
    """Rows are emitted row-major: the y index varies slowest."""
    xs = f.grid.xs()
    ys = f.grid.ys()
    stream.write("x,y,value\n")
    for iy in range(f.grid.ny):
        for ix in range(f.grid.nx):
            stream.write(
                f"{format_float(xs[ix])},{format_float(ys[iy])},{format_float(f.values[iy, ix])}\n"
            )


def write_pgm(f: ScalarField, stream) -> None:
    """Plain (P2) PGM; values mapped affinely min -> 0, max -> 255, top row
    at ymax so the image is in conventional orientation."""
    lo = f.min()
    hi = f.max()
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    stream.write(f"P2\n{f.grid.nx} {f.grid.ny}\n255\n")
    for iy in range(f.grid.ny - 1, -1, -1):
        row = ((f.values[iy] - lo) * scale).round().astype(int)
        stream.write(" ".join(str(int(p)) for p in row) + "\n")
