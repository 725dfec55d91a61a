"""Poisson and Dirac brackets on invariant phase-space functions.

Brackets are computed by the chain rule over the invariant generators, so the
dimension d never has to be fixed.  Canonical convention: {q_i, pi_j} =
delta_ij, {theta, pi_theta} = 1, {N^a, B_a} = 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .algebra import (
    ONE,
    ZERO,
    ExpressionError,
    K,
    P,
    R,
    S,
    ScalarExpr,
    Tensor2Expr,
    VectorExpr,
    outer,
    PHASE_GENERATORS,
)

Expr = Union[ScalarExpr, VectorExpr, Tensor2Expr]

# {x, y} for x before y; antisymmetry supplies the rest
_TABLE = {
    ("S", "P"): 2 * S,
    ("S", "K"): 4 * P,
    ("P", "K"): 2 * K,
    ("theta", "pi_theta"): ONE,
    ("N1", "B1"): ONE,
    ("N2", "B2"): ONE,
}

SECTORS = {
    None: tuple(_TABLE),
    "F": (("S", "P"), ("S", "K"), ("P", "K")),
    "Phi": (("theta", "pi_theta"),),
}


class NotSecondClassError(ExpressionError):
    """The constraint bracket matrix is singular."""


@dataclass(frozen=True)
class BracketTable:
    """Antisymmetric generator brackets plus the generator/vector entries."""

    entries: dict

    def __call__(self, x: str, y: str) -> ScalarExpr:
        if (x, y) in self.entries:
            return self.entries[(x, y)]
        if (y, x) in self.entries:
            return -self.entries[(y, x)]
        return ZERO


@lru_cache(maxsize=None)
def bracket_table() -> BracketTable:
    """The shared table; antisymmetry and Jacobi are checked on first use."""
    table = BracketTable(dict(_TABLE))
    gens = [ScalarExpr.gen(n) for n in PHASE_GENERATORS] + [R]
    for a, b in itertools.product(gens, repeat=2):
        if poisson(a, b) != -poisson(b, a):
            raise AssertionError("bracket table is not antisymmetric")
    for a, b, c in itertools.combinations(gens, 3):
        if jacobiator(a, b, c):
            raise AssertionError("bracket table violates the Jacobi identity")
    return table


def _scalar_scalar(f: ScalarExpr, g: ScalarExpr, sector) -> ScalarExpr:
    out = ZERO
    for x, y in SECTORS[sector]:
        fx, fy = f.diff(x), f.diff(y)
        if not fx and not fy:
            continue
        gx, gy = g.diff(x), g.diff(y)
        term = fx * gy - fy * gx
        if term:
            out = out + term * _TABLE[(x, y)]
    return out


def _scalar_basis(f: ScalarExpr, basis: str, sector) -> VectorExpr:
    """{f, q_i} (basis 'q') or {f, pi_i} (basis 'pi')."""
    if sector == "Phi":
        return VectorExpr()
    if basis == "q":
        # {P, q_i} = -q_i, {K, q_i} = -2 pi_i
        return VectorExpr(-f.diff("P"), -2 * f.diff("K"))
    # {S, pi_i} = 2 q_i, {P, pi_i} = pi_i
    return VectorExpr(2 * f.diff("S"), f.diff("P"))


def _scalar_vector(f: ScalarExpr, v: VectorExpr, sector) -> VectorExpr:
    out = VectorExpr()
    for coeff, basis in ((v.q, "q"), (v.pi, "pi")):
        if not coeff:
            continue
        unit = VectorExpr(ONE, ZERO) if basis == "q" else VectorExpr(ZERO, ONE)
        out = out + unit * _scalar_scalar(f, coeff, sector)
        out = out + _scalar_basis(f, basis, sector) * coeff
    return out


def _basis_vec(basis: str) -> VectorExpr:
    return VectorExpr(ONE, ZERO) if basis == "q" else VectorExpr(ZERO, ONE)


def _vector_vector(u: VectorExpr, w: VectorExpr, sector) -> Tensor2Expr:
    out = Tensor2Expr()
    for alpha, e in ((u.q, "q"), (u.pi, "pi")):
        if not alpha:
            continue
        for beta, f in ((w.q, "q"), (w.pi, "pi")):
            if not beta:
                continue
            # {alpha e_i, beta f_j}
            if sector != "Phi" and e != f:
                sign = 1 if e == "q" else -1
                out = out + Tensor2Expr(delta=sign * alpha * beta)
            out = out + outer(-_scalar_basis(beta, e, sector), _basis_vec(f)) * alpha
            out = out + outer(_basis_vec(e), _scalar_basis(alpha, f, sector)) * beta
            ab = _scalar_scalar(alpha, beta, sector)
            if ab:
                out = out + outer(_basis_vec(e), _basis_vec(f)) * ab
    return out


def poisson(a, b, sector=None):
    """Poisson bracket {a, b} of scalars and covariant vectors.

    ``sector`` restricts the bracket to the original pairs (``"F"``: q, pi)
    or to the auxiliary pair (``"Phi"``: theta, pi_theta).  Scalar-vector
    brackets give vectors; vector-vector brackets give rank-2 tensors with
    the first index on ``a``.
    """
    if sector not in SECTORS:
        raise ValueError(f"unknown sector {sector!r}")
    if isinstance(a, ScalarExpr) and isinstance(b, ScalarExpr):
        return _scalar_scalar(a, b, sector)
    if isinstance(a, ScalarExpr) and isinstance(b, VectorExpr):
        return _scalar_vector(a, b, sector)
    if isinstance(a, VectorExpr) and isinstance(b, ScalarExpr):
        return -_scalar_vector(b, a, sector)
    if isinstance(a, VectorExpr) and isinstance(b, VectorExpr):
        return _vector_vector(a, b, sector)
    raise TypeError(
        f"no bracket between {type(a).__name__} and {type(b).__name__}"
    )


def jacobiator(a: ScalarExpr, b: ScalarExpr, c: ScalarExpr) -> ScalarExpr:
    return (
        poisson(a, poisson(b, c))
        + poisson(b, poisson(c, a))
        + poisson(c, poisson(a, b))
    )


def product(x, y):
    """Product of bracket results; two vectors give their outer product."""
    if isinstance(x, VectorExpr) and isinstance(y, VectorExpr):
        return outer(x, y)
    if isinstance(x, ScalarExpr):
        return y * x
    return x * y


@dataclass(frozen=True)
class ConstraintSet:
    """A second-class pair with its bracket matrix and inverse."""

    omega1: ScalarExpr
    omega2: ScalarExpr

    def __post_init__(self):
        if not self.det:
            raise NotSecondClassError("constraint bracket matrix is singular")

    @property
    def constraints(self):
        return (self.omega1, self.omega2)

    @property
    def delta(self):
        om = self.constraints
        return tuple(tuple(poisson(x, y) for y in om) for x in om)

    @property
    def det(self) -> ScalarExpr:
        (a, b), (c, d) = self.delta
        return a * d - b * c

    @property
    def delta_inverse(self):
        (a, b), (c, d) = self.delta
        det = self.det
        return ((d / det, -b / det), (-c / det, a / det))


def second_class_constraints() -> ConstraintSet:
    """Omega1 = q.q - 1 and Omega2 = q.pi."""
    return ConstraintSet(S - 1, P)


def dirac(a, b, cs: ConstraintSet | None = None):
    """{a, b}_D = {a, b} - {a, Omega_a} Delta^ab {Omega_b, b}."""
    cs = cs or second_class_constraints()
    inv = cs.delta_inverse
    result = poisson(a, b)
    left = [poisson(a, om) for om in cs.constraints]
    right = [poisson(om, b) for om in cs.constraints]
    for i in range(2):
        for j in range(2):
            if inv[i][j]:
                result = result - product(left[i], right[j]) * inv[i][j]
    return result


class OnShellExpr:
    """Result of weak-equality reduction; deliberately not a ScalarExpr.

    No bracket accepts it, so reduction can only happen after all brackets
    are evaluated.  Any remaining R keeps its meaning R^2 = 1 + 2 theta.
    """

    __slots__ = ("_parts",)

    def __init__(self, parts):
        object.__setattr__(self, "_parts", dict(parts))

    def __setattr__(self, name, value):
        raise AttributeError("OnShellExpr is immutable")

    def __eq__(self, other):
        if isinstance(other, (int,)):
            return self == OnShellExpr(ScalarExpr.const(other).parts)
        if isinstance(other, ScalarExpr):
            return self._parts == other.parts
        if isinstance(other, OnShellExpr):
            return self._parts == other._parts
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._parts.items()))

    def is_zero(self) -> bool:
        return not self._parts

    def __str__(self):
        from .parser import to_text

        return to_text(ScalarExpr(self._parts))

    __repr__ = __str__


def reduce_on_shell(e: ScalarExpr) -> OnShellExpr:
    """Impose the constraint surface S = 1, P = 0."""
    if not isinstance(e, ScalarExpr):
        raise TypeError("reduce_on_shell expects a ScalarExpr")
    if e.has_root():
        # R^2 = (S + 2 theta)/S stays valid with S = 1; keep R symbolic
        from .algebra import _subs_frac, _GEN, _qq

        pairs = [(_GEN["S"], _qq(1)), (_GEN["P"], _qq(0))]
        return OnShellExpr(
            ScalarExpr({k: _subs_frac(v, pairs) for k, v in e.parts.items()}).parts
        )
    return OnShellExpr(e.subs({"S": 1, "P": 0}).parts)
