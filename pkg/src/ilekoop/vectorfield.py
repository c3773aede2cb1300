"""Planar autonomous vector fields and the built-in nonlinear saddle.

Two kinds of field are supported: an arbitrary polynomial pair, and the
cubic nonlinear saddle ``(x, -y + y^3)`` on ``|y| < 1``, which carries an
explicit flow and therefore serves as the oracle for the numerical
integrator and the finite-time stretching computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import Poly2

# The explicit saddle solution is singular at |y| = 1; stay strictly inside.
SADDLE_Y_BOUND = 1.0 - 1e-12


@dataclass(frozen=True)
class Mat2:
    """2x2 real matrix, row-major."""

    a11: float
    a12: float
    a21: float
    a22: float


def _saddle_components() -> tuple[Poly2, Poly2]:
    return Poly2({(1, 0): 1.0}), Poly2({(0, 1): -1.0, (0, 3): 1.0})


class VectorField2D:
    """A planar autonomous vector field, polynomial or built-in saddle."""

    __slots__ = ("kind", "p", "q", "_px", "_py", "_qx", "_qy")

    def __init__(self, kind: str, p: Poly2 | None = None, q: Poly2 | None = None):
        if kind == "polynomial":
            if p is None or q is None:
                raise ValueError("polynomial field needs both components")
        elif kind == "saddle":
            p, q = _saddle_components()
        else:
            raise ValueError(f"unknown field kind {kind!r}")
        self.kind = kind
        self.p = p
        self.q = q
        self._px = p.diff("x")
        self._py = p.diff("y")
        self._qx = q.diff("x")
        self._qy = q.diff("y")

    @classmethod
    def polynomial(cls, p: Poly2, q: Poly2) -> "VectorField2D":
        return cls("polynomial", p, q)

    @classmethod
    def saddle(cls) -> "VectorField2D":
        return cls("saddle")

    @property
    def is_saddle(self) -> bool:
        return self.kind == "saddle"

    def polynomial_components(self) -> tuple[Poly2, Poly2]:
        """Exact polynomial components; defined for both kinds."""
        return self.p, self.q

    # -- pointwise evaluation -------------------------------------------------

    def evaluate(self, x: float, y: float) -> tuple[float, float]:
        if self.kind == "saddle":
            _check_saddle_domain(y)
            return (x, -y + y * y * y)
        return (self.p.evaluate(x, y), self.q.evaluate(x, y))

    def jacobian(self, x: float, y: float) -> Mat2:
        if self.kind == "saddle":
            _check_saddle_domain(y)
            return Mat2(1.0, 0.0, 0.0, -1.0 + 3.0 * y * y)
        return Mat2(
            self._px.evaluate(x, y),
            self._py.evaluate(x, y),
            self._qx.evaluate(x, y),
            self._qy.evaluate(x, y),
        )

    # -- array evaluation (grid paths) ---------------------------------------

    def evaluate_arrays(self, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "saddle":
            _check_saddle_domain_arrays(ys)
            return (xs * 1.0, -ys + ys * ys * ys)
        return (self.p.eval_array(xs, ys), self.q.eval_array(xs, ys))

    def jacobian_arrays(self, xs, ys) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if self.kind == "saddle":
            _check_saddle_domain_arrays(ys)
            zeros = np.zeros_like(ys)
            return (np.ones_like(ys), zeros, zeros, -1.0 + 3.0 * ys * ys)
        return (
            self._px.eval_array(xs, ys),
            self._py.eval_array(xs, ys),
            self._qx.eval_array(xs, ys),
            self._qy.eval_array(xs, ys),
        )


def _check_saddle_domain(y: float) -> None:
    if not abs(y) < SADDLE_Y_BOUND:
        raise DomainError(f"saddle field is only defined for |y| < 1 (got y={y!r})")


def _check_saddle_domain_arrays(ys: np.ndarray) -> None:
    if np.any(np.abs(ys) >= SADDLE_Y_BOUND):
        raise DomainError("saddle field is only defined for |y| < 1")


def shear_free_defect(f: VectorField2D) -> Poly2:
    """Return du/dy + dv/dx as an exact polynomial.

    The zero polynomial means the strain tensor is diagonal, i.e. the field
    has no shear component.
    """
    p, q = f.polynomial_components()
    return p.diff("y") + q.diff("x")


def analytic_saddle_flow(pt: tuple[float, float], t: float) -> tuple[float, float]:
    """Exact time-t flow of the nonlinear saddle starting from ``pt``."""
    x, y = pt
    _check_saddle_domain(y)
    denom = math.sqrt((1.0 - y * y) * math.exp(2.0 * t) + y * y)
    return (x * math.exp(t), y / denom)


# -- JSON wire format ----------------------------------------------------------

def field_to_json(f: VectorField2D) -> dict:
    if f.kind == "saddle":
        return {"kind": "saddle"}
    return {"kind": "polynomial", "p": f.p.to_json_terms(), "q": f.q.to_json_terms()}


def field_from_json(obj: dict) -> VectorField2D:
    kind = obj.get("kind")
    if kind == "saddle":
        return VectorField2D.saddle()
    if kind == "polynomial":
        return VectorField2D.polynomial(
            Poly2.from_json_terms(obj["p"]), Poly2.from_json_terms(obj["q"])
        )
    raise ValueError(f"unknown field kind {kind!r}")
