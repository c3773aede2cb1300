"""Trajectory integration, flow-map gradients, Cauchy-Green tensors, FTLE.

Integration is classical fixed-step RK4 (deterministic, bit-reproducible);
the final partial step is shortened to land exactly on the requested time.
Flow-map gradients come from centered differences of four auxiliary
trajectories.  For the built-in saddle the analytic Cauchy-Green tensor and
FTLE are provided as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .strain import Grid2D, ScalarField, SymTensor2, _row_chunks, _run_chunks
from .vectorfield import VectorField2D, _check_saddle_domain

MAX_STEP_COUNT = 1e8

# Guard for log of the largest Cauchy-Green eigenvalue near t = 0.
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed RK4 step magnitude; integration direction follows sign(t)."""

    step: float = 1e-3

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("integrator step must be positive")


@dataclass
class Trajectory:
    """Sampled orbit; times run from 0 to t, strictly monotone either way."""

    times: list[float]
    states: list[tuple[float, float]]


def _step_plan(t: float, step: float) -> tuple[int, float]:
    """Number of full steps and the remainder so that n*step + r == |t|."""
    n = int(abs(t) / step)
    while n * step > abs(t):
        n -= 1
    r = abs(t) - n * step
    return n, r


def _rk4_step(f: VectorField2D, x: float, y: float, h: float) -> tuple[float, float]:
    u1, v1 = f.evaluate(x, y)
    u2, v2 = f.evaluate(x + 0.5 * h * u1, y + 0.5 * h * v1)
    u3, v3 = f.evaluate(x + 0.5 * h * u2, y + 0.5 * h * v2)
    u4, v4 = f.evaluate(x + h * u3, y + h * v3)
    return (
        x + (h / 6.0) * (u1 + 2.0 * u2 + 2.0 * u3 + u4),
        y + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4),
    )


def integrate(
    f: VectorField2D, x0: tuple[float, float], t: float, cfg: IntegratorConfig
) -> Trajectory:
    """RK4 trajectory from time 0 to time t (t may be negative or zero)."""
    if abs(t) / cfg.step > MAX_STEP_COUNT:
        raise ValueError("requested time needs more than 1e8 steps")
    times = [0.0]
    states = [(float(x0[0]), float(x0[1]))]
    if t == 0.0:
        return Trajectory(times, states)
    n, r = _step_plan(t, cfg.step)
    h = math.copysign(cfg.step, t)
    x, y = states[0]
    for i in range(1, n + 1):
        x, y = _rk4_step(f, x, y, h)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NumericalError(f"trajectory became non-finite near t={i * h}")
        times.append(i * h)
        states.append((x, y))
    if r > 0.0:
        x, y = _rk4_step(f, x, y, math.copysign(r, t))
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NumericalError("trajectory became non-finite on the final step")
        times.append(t)
        states.append((x, y))
    return Trajectory(times, states)


def flow_endpoint(
    f: VectorField2D, x0: tuple[float, float], t: float, cfg: IntegratorConfig
) -> tuple[float, float]:
    """Endpoint of the time-t flow; same stepping as integrate, no storage."""
    if abs(t) / cfg.step > MAX_STEP_COUNT:
        raise ValueError("requested time needs more than 1e8 steps")
    x, y = float(x0[0]), float(x0[1])
    if t == 0.0:
        return (x, y)
    n, r = _step_plan(t, cfg.step)
    h = math.copysign(cfg.step, t)
    for _ in range(n):
        x, y = _rk4_step(f, x, y, h)
    if r > 0.0:
        x, y = _rk4_step(f, x, y, math.copysign(r, t))
    if not (math.isfinite(x) and math.isfinite(y)):
        raise NumericalError("trajectory became non-finite")
    return (x, y)


def _advance_arrays(f, xs, ys, t, step):
    """Vectorized RK4 over element arrays; elementwise ops only, so results
    do not depend on how the arrays were chunked."""
    if t == 0.0:
        return xs * 1.0, ys * 1.0
    n, r = _step_plan(t, step)
    h = math.copysign(step, t)
    x, y = xs * 1.0, ys * 1.0
    for _ in range(n):
        x, y = _rk4_step_arrays(f, x, y, h)
    if r > 0.0:
        x, y = _rk4_step_arrays(f, x, y, math.copysign(r, t))
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise NumericalError("trajectory became non-finite")
    return x, y


def _rk4_step_arrays(f, x, y, h):
    u1, v1 = f.evaluate_arrays(x, y)
    u2, v2 = f.evaluate_arrays(x + 0.5 * h * u1, y + 0.5 * h * v1)
    u3, v3 = f.evaluate_arrays(x + 0.5 * h * u2, y + 0.5 * h * v2)
    u4, v4 = f.evaluate_arrays(x + h * u3, y + h * v3)
    return (
        x + (h / 6.0) * (u1 + 2.0 * u2 + 2.0 * u3 + u4),
        y + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4),
    )


def cauchy_green(
    f: VectorField2D,
    x0: tuple[float, float],
    t: float,
    delta: float,
    cfg: IntegratorConfig,
) -> SymTensor2:
    """Right Cauchy-Green tensor from centered differences of the flow map."""
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    x, y = x0
    xp = flow_endpoint(f, (x + delta, y), t, cfg)
    xm = flow_endpoint(f, (x - delta, y), t, cfg)
    yp = flow_endpoint(f, (x, y + delta), t, cfg)
    ym = flow_endpoint(f, (x, y - delta), t, cfg)
    f11 = (xp[0] - xm[0]) / (2.0 * delta)
    f21 = (xp[1] - xm[1]) / (2.0 * delta)
    f12 = (yp[0] - ym[0]) / (2.0 * delta)
    f22 = (yp[1] - ym[1]) / (2.0 * delta)
    return SymTensor2(f11 * f11 + f21 * f21, f11 * f12 + f21 * f22, f12 * f12 + f22 * f22)


def ftle(
    f: VectorField2D,
    x0: tuple[float, float],
    t: float,
    delta: float,
    cfg: IntegratorConfig,
) -> float:
    """Finite-time Lyapunov exponent log(max C eigenvalue) / (2|t|)."""
    if t == 0.0:
        raise ValueError("FTLE needs a nonzero integration time")
    c = cauchy_green(f, x0, t, delta, cfg)
    lam2 = c.eigenvalues()[1]
    return math.log(max(lam2, _LOG_FLOOR)) / (2.0 * abs(t))


def ftle_field(
    f: VectorField2D,
    grid: Grid2D,
    t: float,
    delta: float,
    cfg: IntegratorConfig,
    threads: int = 1,
) -> ScalarField:
    """FTLE sampled over a grid.

    The four offset trajectory families of a row chunk are advanced as one
    array.  The final log runs over the assembled full-shape eigenvalue
    array, so output bytes are identical for every thread count.
    """
    if t == 0.0:
        raise ValueError("FTLE needs a nonzero integration time")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    xs = grid.xs()
    ys = grid.ys()
    lam2 = np.empty((grid.ny, grid.nx))

    def worker(chunk):
        r0, r1 = chunk
        yv, xv = np.meshgrid(ys[r0:r1], xs, indexing="ij")
        xv = xv.ravel()
        yv = yv.ravel()
        m = xv.size
        seeds_x = np.concatenate([xv + delta, xv - delta, xv, xv])
        seeds_y = np.concatenate([yv, yv, yv + delta, yv - delta])
        ex, ey = _advance_arrays(f, seeds_x, seeds_y, t, cfg.step)
        f11 = (ex[0:m] - ex[m : 2 * m]) / (2.0 * delta)
        f21 = (ey[0:m] - ey[m : 2 * m]) / (2.0 * delta)
        f12 = (ex[2 * m : 3 * m] - ex[3 * m :]) / (2.0 * delta)
        f22 = (ey[2 * m : 3 * m] - ey[3 * m :]) / (2.0 * delta)
        c11 = f11 * f11 + f21 * f21
        c12 = f11 * f12 + f21 * f22
        c22 = f12 * f12 + f22 * f22
        mean = 0.5 * (c11 + c22)
        d = c11 - c22
        rad = 0.5 * np.sqrt(d * d + 4.0 * c12 * c12)
        lam2[r0:r1] = (mean + rad).reshape(r1 - r0, grid.nx)

    _run_chunks(_row_chunks(grid.ny, threads), worker, threads)
    vals = np.log(np.maximum(lam2, _LOG_FLOOR)) / (2.0 * abs(t))
    return ScalarField(grid, vals)


# -- analytic saddle oracles ------------------------------------------------------

def saddle_cauchy_green(pt: tuple[float, float], t: float) -> SymTensor2:
    """Closed-form Cauchy-Green tensor of the nonlinear saddle."""
    _check_saddle_domain(pt[1])
    y = pt[1]
    denom = (1.0 - y * y) * math.exp(2.0 * t) + y * y
    return SymTensor2(math.exp(2.0 * t), 0.0, math.exp(4.0 * t) / denom**3)


def saddle_ftle(pt: tuple[float, float], t: float) -> float:
    """Closed-form saddle FTLE tracking the y-direction stretching (the
    dominant direction in backward time away from |y| near 1)."""
    if t == 0.0:
        raise ValueError("FTLE needs a nonzero integration time")
    _check_saddle_domain(pt[1])
    y = pt[1]
    denom = (1.0 - y * y) * math.exp(2.0 * t) + y * y
    return -math.log(math.exp(4.0 * t) / denom**3) / (2.0 * t)
