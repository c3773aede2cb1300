"""Expression parsing and exact sparse polynomial algebra in two variables.

The grammar is deliberately small:

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := number | variable | '(' expr ')' | '-' atom

No implicit multiplication and no function calls, so every expression that
parses lowers to an exact polynomial.  Polynomials are stored sparsely as a
map from exponent pairs to float coefficients; after every operation,
coefficients with magnitude below ``CANONICAL_ZERO`` are dropped, which makes
exact algebraic cancellations test as exactly zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

# Coefficients below this magnitude are treated as exact zeros.
CANONICAL_ZERO = 1e-12

# to_polynomial refuses expansions beyond this total degree.
MAX_TOTAL_DEGREE = 64


class ParseError(ValueError):
    """Syntax or lowering error; ``offset`` is the byte position in the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Sub:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int


Expression = Num | Var | Neg | Add | Sub | Mul | Pow


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_UINT_RE = re.compile(r"\d+\Z")


class _Tokens:
    """Token stream over the input text.  Tokens are (kind, text, offset)."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._skip_ws()

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self):
        if self.pos >= len(self.text):
            return ("end", "", self.pos)
        ch = self.text[self.pos]
        if not ch.isascii():
            raise ParseError("non-ASCII character", self.pos)
        m = _NUMBER_RE.match(self.text, self.pos)
        if m:
            return ("num", m.group(), self.pos)
        m = _NAME_RE.match(self.text, self.pos)
        if m:
            return ("name", m.group(), self.pos)
        if ch in "+-*^()":
            return ("op", ch, self.pos)
        raise ParseError(f"unexpected character {ch!r}", self.pos)

    def take(self):
        kind, text, offset = self.peek()
        self.pos = offset + len(text)
        self._skip_ws()
        return kind, text, offset


def parse_expression(text: str, variables: tuple[str, ...] = ("x", "y")) -> Expression:
    """Parse ``text`` into an AST.

    ``variables`` lists the admissible variable names (default ``x`` and
    ``y``); any other identifier is rejected.  Raises :class:`ParseError`
    with the byte offset of the offending token.
    """
    if not text:
        raise ParseError("empty expression", 0)
    toks = _Tokens(text)
    node = _parse_sum(toks, variables)
    kind, tok, offset = toks.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {tok!r}", offset)
    return node


def _parse_sum(toks, variables):
    node = _parse_term(toks, variables)
    while True:
        kind, tok, _ = toks.peek()
        if kind == "op" and tok in "+-":
            toks.take()
            rhs = _parse_term(toks, variables)
            node = Add(node, rhs) if tok == "+" else Sub(node, rhs)
        else:
            return node


def _parse_term(toks, variables):
    node = _parse_factor(toks, variables)
    while True:
        kind, tok, _ = toks.peek()
        if kind == "op" and tok == "*":
            toks.take()
            node = Mul(node, _parse_factor(toks, variables))
        else:
            return node


def _parse_factor(toks, variables):
    node = _parse_atom(toks, variables)
    kind, tok, _ = toks.peek()
    if kind == "op" and tok == "^":
        toks.take()
        kind, tok, offset = toks.peek()
        if kind == "op" and tok == "-":
            raise ParseError("negative exponent", offset)
        if kind != "num":
            raise ParseError("expected integer exponent after '^'", offset)
        if not _UINT_RE.match(tok):
            raise ParseError("exponent must be a non-negative integer literal", offset)
        toks.take()
        node = Pow(node, int(tok))
    return node


def _parse_atom(toks, variables):
    kind, tok, offset = toks.peek()
    if kind == "num":
        toks.take()
        return Num(float(tok))
    if kind == "name":
        if tok not in variables:
            raise ParseError(f"unknown identifier {tok!r}", offset)
        toks.take()
        return Var(tok)
    if kind == "op" and tok == "(":
        toks.take()
        node = _parse_sum(toks, variables)
        kind, tok, offset = toks.peek()
        if not (kind == "op" and tok == ")"):
            raise ParseError("expected ')'", offset)
        toks.take()
        return node
    if kind == "op" and tok == "-":
        toks.take()
        return Neg(_parse_atom(toks, variables))
    raise ParseError(f"expected number, variable, '(' or '-', got {tok!r}", offset)


# ---------------------------------------------------------------------------
# Printing and evaluation of ASTs
# ---------------------------------------------------------------------------

def to_text(e: Expression) -> str:
    """Render an AST so that re-parsing reproduces the same structure."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _atomized(e.operand)
    if isinstance(e, Pow):
        return _atomized(e.base) + "^" + str(e.exponent)
    if isinstance(e, Mul):
        left = to_text(e.left) if isinstance(e.left, (Mul, Pow, Num, Var, Neg)) else "(" + to_text(e.left) + ")"
        right = to_text(e.right) if isinstance(e.right, (Pow, Num, Var, Neg)) else "(" + to_text(e.right) + ")"
        return left + "*" + right
    if isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        right = to_text(e.right) if not isinstance(e.right, (Add, Sub)) else "(" + to_text(e.right) + ")"
        return to_text(e.left) + op + right
    raise TypeError(f"not an expression node: {e!r}")


def _atomized(e: Expression) -> str:
    # Atoms may appear bare as a Pow base or Neg operand; anything else
    # must be parenthesized to parse back to the same tree.
    if isinstance(e, (Num, Var, Neg)):
        return to_text(e)
    return "(" + to_text(e) + ")"


def eval_expression(e: Expression, env: dict[str, float]) -> float:
    """Evaluate an AST directly, without lowering to a polynomial."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -eval_expression(e.operand, env)
    if isinstance(e, Add):
        return eval_expression(e.left, env) + eval_expression(e.right, env)
    if isinstance(e, Sub):
        return eval_expression(e.left, env) - eval_expression(e.right, env)
    if isinstance(e, Mul):
        return eval_expression(e.left, env) * eval_expression(e.right, env)
    if isinstance(e, Pow):
        return eval_expression(e.base, env) ** e.exponent
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Sparse bivariate polynomials
# ---------------------------------------------------------------------------

def _canon(terms: dict) -> dict:
    return {ij: c for ij, c in terms.items() if abs(c) >= CANONICAL_ZERO}


def _ipow(base: float, n: int) -> float:
    # Repeated multiplication; bit-identical to the array evaluation path.
    out = 1.0
    for _ in range(n):
        out *= base
    return out


class Poly2:
    """Sparse polynomial in two variables with float coefficients.

    Terms map ``(i, j)`` to the coefficient of ``x^i * y^j``.  Instances are
    immutable by convention: every operation returns a new polynomial.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict | None = None):
        self._terms = _canon(dict(terms) if terms else {})

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly2":
        return cls()

    @classmethod
    def constant(cls, c: float) -> "Poly2":
        return cls({(0, 0): float(c)})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1.0})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1.0})

    @classmethod
    def monomial(cls, i: int, j: int, c: float = 1.0) -> "Poly2":
        return cls({(int(i), int(j)): float(c)})

    # -- inspection --------------------------------------------------------

    def items_sorted(self) -> list[tuple[tuple[int, int], float]]:
        return sorted(self._terms.items())

    def coefficients(self) -> dict[tuple[int, int], float]:
        return dict(self._terms)

    def coeff(self, i: int, j: int) -> float:
        return self._terms.get((i, j), 0.0)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(i + j for i, j in self._terms)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def max_coeff_diff(self, other: "Poly2") -> float:
        keys = set(self._terms) | set(other._terms)
        return max((abs(self.coeff(*ij) - other.coeff(*ij)) for ij in keys), default=0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly2):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self.items_sorted()))

    def __repr__(self):
        return f"Poly2({dict(self.items_sorted())!r})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self._terms)
        for ij, c in other._terms.items():
            out[ij] = out.get(ij, 0.0) + c
        return Poly2(out)

    def __sub__(self, other: "Poly2") -> "Poly2":
        out = dict(self._terms)
        for ij, c in other._terms.items():
            out[ij] = out.get(ij, 0.0) - c
        return Poly2(out)

    def __neg__(self) -> "Poly2":
        return Poly2({ij: -c for ij, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly2):
            out: dict = {}
            for (i1, j1), c1 in self._terms.items():
                for (i2, j2), c2 in other._terms.items():
                    ij = (i1 + i2, j1 + j2)
                    out[ij] = out.get(ij, 0.0) + c1 * c2
            return Poly2(out)
        return Poly2({ij: c * other for ij, c in self._terms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int) -> "Poly2":
        if n < 0:
            raise ValueError("negative polynomial power")
        out = Poly2.constant(1.0)
        for _ in range(n):
            out = out * self
        return out

    def diff(self, var: str) -> "Poly2":
        """Exact partial derivative with respect to ``"x"`` or ``"y"``."""
        out: dict = {}
        for (i, j), c in self._terms.items():
            if var == "x":
                if i > 0:
                    out[(i - 1, j)] = out.get((i - 1, j), 0.0) + c * i
            elif var == "y":
                if j > 0:
                    out[(i, j - 1)] = out.get((i, j - 1), 0.0) + c * j
            else:
                raise ValueError(f"unknown variable {var!r}")
        return Poly2(out)

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, x: float, y: float = 0.0) -> float:
        total = 0.0
        for (i, j), c in self.items_sorted():
            total += c * _ipow(x, i) * _ipow(y, j)
        return total

    def eval_array(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Elementwise evaluation; term order and power ladders match
        :meth:`evaluate` so per-element results are bit-identical."""
        out = np.zeros(np.broadcast(xs, ys).shape)
        if not self._terms:
            return out
        max_i = max(i for i, _ in self._terms)
        max_j = max(j for _, j in self._terms)
        xp = [np.ones_like(out)]
        for _ in range(max_i):
            xp.append(xp[-1] * xs)
        yp = [np.ones_like(out)]
        for _ in range(max_j):
            yp.append(yp[-1] * ys)
        for (i, j), c in self.items_sorted():
            out = out + c * xp[i] * yp[j]
        return out

    # -- substitution ---------------------------------------------------------

    def affine_substitute(self, m, b) -> "Poly2":
        """Return ``p(m11*X + m12*Y + b1, m21*X + m22*Y + b2)`` expanded in the
        new variables ``(X, Y)``.  ``m`` may be singular."""
        (m11, m12), (m21, m22) = m
        b1, b2 = b
        lin_x = Poly2({(1, 0): float(m11), (0, 1): float(m12), (0, 0): float(b1)})
        lin_y = Poly2({(1, 0): float(m21), (0, 1): float(m22), (0, 0): float(b2)})
        max_i = max((i for i, _ in self._terms), default=0)
        max_j = max((j for _, j in self._terms), default=0)
        px = [Poly2.constant(1.0)]
        for _ in range(max_i):
            px.append(px[-1] * lin_x)
        py = [Poly2.constant(1.0)]
        for _ in range(max_j):
            py.append(py[-1] * lin_y)
        out = Poly2.zero()
        for (i, j), c in self.items_sorted():
            out = out + c * (px[i] * py[j])
        return out

    # -- serialization ---------------------------------------------------------

    def to_json_terms(self) -> list[dict]:
        return [{"i": i, "j": j, "c": c} for (i, j), c in self.items_sorted()]

    @classmethod
    def from_json_terms(cls, items) -> "Poly2":
        out: dict = {}
        for item in items:
            ij = (int(item["i"]), int(item["j"]))
            out[ij] = out.get(ij, 0.0) + float(item["c"])
        return cls(out)


def to_polynomial(e: Expression, variables: tuple[str, ...] = ("x", "y")) -> Poly2:
    """Lower an AST to a fully expanded canonical polynomial.

    The first entry of ``variables`` maps to the x-slot, the second (if any)
    to the y-slot.  Expansions past total degree ``MAX_TOTAL_DEGREE`` are
    rejected.
    """
    slots = {name: idx for idx, name in enumerate(variables)}

    def lower(node: Expression) -> Poly2:
        if isinstance(node, Num):
            return Poly2.constant(node.value)
        if isinstance(node, Var):
            idx = slots[node.name]
            return Poly2.x() if idx == 0 else Poly2.y()
        if isinstance(node, Neg):
            return -lower(node.operand)
        if isinstance(node, Add):
            return lower(node.left) + lower(node.right)
        if isinstance(node, Sub):
            return lower(node.left) - lower(node.right)
        if isinstance(node, Mul):
            return _checked(lower(node.left) * lower(node.right))
        if isinstance(node, Pow):
            out = Poly2.constant(1.0)
            base = lower(node.base)
            for _ in range(node.exponent):
                out = _checked(out * base)
            return out
        raise TypeError(f"not an expression node: {node!r}")

    return lower(e)


def _checked(p: Poly2) -> Poly2:
    if p.degree() > MAX_TOTAL_DEGREE:
        raise ValueError(f"polynomial expansion exceeds total degree {MAX_TOTAL_DEGREE}")
    return p


def parse_polynomial(text: str, variables: tuple[str, ...] = ("x", "y")) -> Poly2:
    """Parse and lower in one step."""
    return to_polynomial(parse_expression(text, variables), variables)
