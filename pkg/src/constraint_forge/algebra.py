"""Exact commutative algebra of O(d)-invariant phase-space functions.

Every scalar is an element of the rational function field

    Q(d, c, l, eps)(S, P, K, theta, pi_theta, N1, B1, N2, B2)

extended by the imaginary unit ``i`` (i^2 = -1) and by the algebraic root
``R`` with R^2 = (S + 2 theta)/S.  The invariants are S = q.q, P = q.pi and
K = pi.pi; d is the (symbolic) number of Cartesian coordinates.

A :class:`ScalarExpr` stores a sparse map ``(r, j) -> f`` meaning
``sum f * R**r * i**j`` with r, j in {0, 1}.  Fractions are kept canonical
by sympy's sparse rational function field, so equality and hashing are
structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from sympy.polys.domains import QQ
from sympy.polys.fields import field as _make_field

PARAMETERS = ("d", "c", "l", "eps")
PHASE_GENERATORS = ("S", "P", "K", "theta", "pi_theta", "N1", "B1", "N2", "B2")
AUX_GENERATORS = ("theta", "pi_theta")

_FIELD, *_FIELD_GENS = _make_field(",".join(PARAMETERS + PHASE_GENERATORS), QQ)
_GEN = dict(zip(PARAMETERS + PHASE_GENERATORS, _FIELD_GENS))
_RING = _FIELD.ring
_GEN_INDEX = {name: k for k, name in enumerate(PARAMETERS + PHASE_GENERATORS)}

# R^2
_RADICAND = (_GEN["S"] + 2 * _GEN["theta"]) / _GEN["S"]

Number = Union[int, Fraction]


class ExpressionError(ValueError):
    """Base class for malformed or unevaluable expressions."""


class MalformedExpressionError(ExpressionError, ZeroDivisionError):
    """Raised for division by an expression that is identically zero."""


class EvaluationError(ExpressionError):
    """Raised when an expression cannot be evaluated exactly at a point."""


def _qq(value):
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _frac(value) -> object:
    return _FIELD(_qq(value))


class ScalarExpr:
    """Immutable element of the extended field; see the module docstring."""

    __slots__ = ("_parts", "_hash")

    def __init__(self, parts: Mapping[tuple[int, int], object] | None = None):
        clean = {}
        for key, value in (parts or {}).items():
            if value:
                clean[key] = value
        object.__setattr__(self, "_parts", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarExpr is immutable")

    # ---- construction ----
    @classmethod
    def const(cls, value: Number) -> ScalarExpr:
        return cls({(0, 0): _frac(value)})

    @classmethod
    def gen(cls, name: str) -> ScalarExpr:
        if name == "R":
            return cls({(1, 0): _FIELD.one})
        if name == "i":
            return cls({(0, 1): _FIELD.one})
        try:
            return cls({(0, 0): _GEN[name]})
        except KeyError:
            raise ExpressionError(f"unknown generator {name!r}") from None

    @staticmethod
    def coerce(value) -> ScalarExpr:
        if isinstance(value, ScalarExpr):
            return value
        if isinstance(value, (int, Fraction)):
            return ScalarExpr.const(value)
        raise TypeError(f"cannot interpret {type(value).__name__} as ScalarExpr")

    # ---- inspection ----
    @property
    def parts(self) -> dict[tuple[int, int], object]:
        return dict(self._parts)

    def is_zero(self) -> bool:
        return not self._parts

    def has_root(self) -> bool:
        return any(r for r, _ in self._parts)

    def has_imaginary(self) -> bool:
        return any(j for _, j in self._parts)

    def generators(self) -> set[str]:
        """Names of field generators occurring anywhere (R and i excluded)."""
        names = set()
        for value in self._parts.values():
            for poly in (value.numer, value.denom):
                for monom in poly.itermonoms():
                    names.update(n for n, e in zip(_GEN_INDEX, monom) if e)
        return names

    def as_constant(self) -> Fraction | None:
        """The rational value if the expression is a plain rational constant."""
        if not self._parts:
            return Fraction(0)
        if set(self._parts) != {(0, 0)}:
            return None
        value = self._parts[(0, 0)]
        if value.denom.is_ground and value.numer.is_ground:
            q = value.numer.LC / value.denom.LC
            return Fraction(int(q.numerator), int(q.denominator))
        return None

    # ---- arithmetic ----
    def __add__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        parts = dict(self._parts)
        for key, value in other._parts.items():
            parts[key] = parts[key] + value if key in parts else value
        return ScalarExpr(parts)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr({k: -v for k, v in self._parts.items()})

    def __sub__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return ScalarExpr.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ScalarExpr):
            if isinstance(other, (int, Fraction)):
                c = _frac(other)
                return ScalarExpr({k: v * c for k, v in self._parts.items()})
            return NotImplemented
        parts: dict[tuple[int, int], object] = {}
        for (r1, j1), a in self._parts.items():
            for (r2, j2), b in other._parts.items():
                value = a * b
                r, j = r1 + r2, j1 + j2
                if r == 2:
                    value, r = value * _RADICAND, 0
                if j == 2:
                    value, j = -value, 0
                parts[(r, j)] = parts[(r, j)] + value if (r, j) in parts else value
        return ScalarExpr(parts)

    __rmul__ = __mul__

    def _conj_root(self):
        return ScalarExpr({(r, j): -v if r else v for (r, j), v in self._parts.items()})

    def _conj_imag(self):
        return ScalarExpr({(r, j): -v if j else v for (r, j), v in self._parts.items()})

    def inverse(self) -> ScalarExpr:
        if not self._parts:
            raise MalformedExpressionError("division by zero expression")
        if len(self._parts) == 1 and (0, 0) in self._parts:
            return ScalarExpr({(0, 0): 1 / self._parts[(0, 0)]})
        # x^-1 = conj_R(x) conj_i(n) / (n conj_i(n)) with n = x conj_R(x) free of R
        root_conj = self._conj_root()
        norm = self * root_conj
        imag_conj = norm._conj_imag()
        base = (norm * imag_conj)._parts.get((0, 0))
        if not base:
            raise MalformedExpressionError("division by zero expression")
        return ScalarExpr(
            {k: v / base for k, v in (root_conj * imag_conj)._parts.items()}
        )

    def __truediv__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ScalarExpr.coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = ONE, self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # ---- comparison ----
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ScalarExpr.const(other)
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return self._parts == other._parts

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self._parts.items())))
        return self._hash

    def __bool__(self):
        return bool(self._parts)

    # ---- calculus ----
    def diff(self, name: str) -> ScalarExpr:
        """Partial derivative with respect to a field generator.

        The root obeys dR/dx = (d rho/dx) / (2 rho) * R with rho = R^2, which
        gives dR/dS = -theta/(S^2 R) and dR/dtheta = 1/(S R).
        """
        x = _GEN[name]
        parts: dict[tuple[int, int], object] = {}
        root_log = None
        for (r, j), value in self._parts.items():
            term = value.diff(x)
            if r:
                if root_log is None:
                    root_log = _RADICAND.diff(x) / (2 * _RADICAND)
                term = term + value * root_log
            if term:
                parts[(r, j)] = parts[(r, j)] + term if (r, j) in parts else term
        return ScalarExpr(parts)

    def subs(self, values: Mapping[str, Number]) -> ScalarExpr:
        """Substitute rational numbers for generators.

        R survives only if the substitution leaves its radicand untouched or
        sends it to 1 (then R -> 1); anything else would silently change the
        meaning of R and is refused.
        """
        pairs = [(_GEN[name], _qq(v)) for name, v in values.items()]
        if not pairs:
            return self
        root_value = None
        if self.has_root():
            radicand = _subs_frac(_RADICAND, pairs)
            if radicand == _FIELD.one:
                root_value = 1
            elif radicand != _RADICAND:
                raise ExpressionError(
                    "substitution changes the radicand of R; use reduce_on_shell"
                )
        parts: dict[tuple[int, int], object] = {}
        for (r, j), value in self._parts.items():
            new = _subs_frac(value, pairs)
            if r and root_value is not None:
                r = 0
            parts[(r, j)] = parts[(r, j)] + new if (r, j) in parts else new
        return ScalarExpr(parts)

    def aux_degree_components(self) -> dict[int, ScalarExpr]:
        """Split into pieces homogeneous in (theta, pi_theta).

        Requires denominators free of the auxiliary fields and no R.
        """
        aux = [_GEN_INDEX[n] for n in AUX_GENERATORS]
        out: dict[int, dict] = {}
        for (r, j), value in self._parts.items():
            if r:
                raise ExpressionError("aux-degree split needs an R-free expression")
            if any(value.denom.degree(_RING.gens[k]) > 0 for k in aux):
                raise ExpressionError("aux-degree split needs aux-free denominators")
            for monom, coeff in value.numer.terms():
                deg = sum(monom[k] for k in aux)
                bucket = out.setdefault(deg, {})
                term = _FIELD(_RING({monom: coeff})) / value.denom
                bucket[(r, j)] = bucket[(r, j)] + term if (r, j) in bucket else term
        return {deg: ScalarExpr(parts) for deg, parts in sorted(out.items())}

    def __repr__(self):
        from .parser import to_text

        return f"ScalarExpr({to_text(self)!r})"

    def __str__(self):
        from .parser import to_text

        return to_text(self)


def _subs_frac(value, pairs):
    numer = value.numer
    denom = value.denom
    for x, v in pairs:
        numer = numer.subs(x.numer, v) if numer.degree(x.numer) > 0 else numer
        denom = denom.subs(x.numer, v) if denom.degree(x.numer) > 0 else denom
    if not denom:
        raise MalformedExpressionError("substitution makes a denominator vanish")
    return _FIELD(numer) / _FIELD(denom)


# Alias: coefficients depending only on d (and c, l) live in the same field.
DimCoeff = ScalarExpr

ZERO = ScalarExpr()
ONE = ScalarExpr.const(1)
I = ScalarExpr.gen("i")
R = ScalarExpr.gen("R")
D = ScalarExpr.gen("d")
C = ScalarExpr.gen("c")
L = ScalarExpr.gen("l")
EPS = ScalarExpr.gen("eps")
S = ScalarExpr.gen("S")
P = ScalarExpr.gen("P")
K = ScalarExpr.gen("K")
THETA = ScalarExpr.gen("theta")
PI_THETA = ScalarExpr.gen("pi_theta")
N1 = ScalarExpr.gen("N1")
B1 = ScalarExpr.gen("B1")
N2 = ScalarExpr.gen("N2")
B2 = ScalarExpr.gen("B2")


def normalize(e: ScalarExpr) -> ScalarExpr:
    """Canonical form; ScalarExpr is normalized on construction already."""
    return ScalarExpr(e.parts)


@dataclass(frozen=True)
class VectorExpr:
    """The covariant vector ``q_coeff * q_i + pi_coeff * pi_i``."""

    q: ScalarExpr = ZERO
    pi: ScalarExpr = ZERO

    def __add__(self, other):
        if not isinstance(other, VectorExpr):
            return NotImplemented
        return VectorExpr(self.q + other.q, self.pi + other.pi)

    def __sub__(self, other):
        if not isinstance(other, VectorExpr):
            return NotImplemented
        return VectorExpr(self.q - other.q, self.pi - other.pi)

    def __neg__(self):
        return VectorExpr(-self.q, -self.pi)

    def __mul__(self, other):
        if isinstance(other, VectorExpr):
            return NotImplemented
        other = ScalarExpr.coerce(other)
        return VectorExpr(self.q * other, self.pi * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ScalarExpr.coerce(other)
        return VectorExpr(self.q / other, self.pi / other)

    def is_zero(self) -> bool:
        return self.q.is_zero() and self.pi.is_zero()

    def subs(self, values):
        return VectorExpr(self.q.subs(values), self.pi.subs(values))

    def diff(self, name: str) -> VectorExpr:
        """Derivative of the coefficients only (q_i, pi_i held fixed)."""
        return VectorExpr(self.q.diff(name), self.pi.diff(name))

    def __str__(self):
        from .parser import to_text

        return f"({to_text(self.q)})*q_i + ({to_text(self.pi)})*pi_i"


Q_VEC = VectorExpr(ONE, ZERO)
PI_VEC = VectorExpr(ZERO, ONE)


@dataclass(frozen=True)
class Tensor2Expr:
    """Two-index object over the basis delta_ij, q_iq_j, q_ipi_j, pi_iq_j, pi_ipi_j."""

    delta: ScalarExpr = ZERO
    qq: ScalarExpr = ZERO
    qp: ScalarExpr = ZERO
    pq: ScalarExpr = ZERO
    pp: ScalarExpr = ZERO

    def _coeffs(self):
        return (self.delta, self.qq, self.qp, self.pq, self.pp)

    def __add__(self, other):
        if not isinstance(other, Tensor2Expr):
            return NotImplemented
        return Tensor2Expr(*(a + b for a, b in zip(self._coeffs(), other._coeffs())))

    def __sub__(self, other):
        if not isinstance(other, Tensor2Expr):
            return NotImplemented
        return Tensor2Expr(*(a - b for a, b in zip(self._coeffs(), other._coeffs())))

    def __neg__(self):
        return Tensor2Expr(*(-a for a in self._coeffs()))

    def __mul__(self, other):
        if isinstance(other, (VectorExpr, Tensor2Expr)):
            return NotImplemented
        other = ScalarExpr.coerce(other)
        return Tensor2Expr(*(a * other for a in self._coeffs()))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self._coeffs())

    def trace(self) -> ScalarExpr:
        """Contraction of i with j, using delta_ii = d."""
        return self.delta * D + self.qq * S + (self.qp + self.pq) * P + self.pp * K

    def __str__(self):
        from .parser import to_text

        names = ("delta_ij", "q_i*q_j", "q_i*pi_j", "pi_i*q_j", "pi_i*pi_j")
        terms = [f"({to_text(c)})*{n}" for c, n in zip(self._coeffs(), names) if c]
        return " + ".join(terms) or "0"


def outer(v: VectorExpr, w: VectorExpr) -> Tensor2Expr:
    """v_i w_j."""
    return Tensor2Expr(ZERO, v.q * w.q, v.q * w.pi, v.pi * w.q, v.pi * w.pi)


def dot(v: VectorExpr, w: VectorExpr) -> ScalarExpr:
    """Contract two vectors with q.q = S, q.pi = P, pi.pi = K."""
    return v.q * w.q * S + (v.q * w.pi + v.pi * w.q) * P + v.pi * w.pi * K


# ---------------------------------------------------------------------------
# exact evaluation at concrete points


@dataclass(frozen=True)
class PointAssignment:
    """Concrete phase-space point in d0 = len(q) Cartesian dimensions."""

    q: tuple[Fraction, ...]
    pi: tuple[Fraction, ...]
    theta: Fraction = Fraction(0)
    pi_theta: Fraction = Fraction(0)
    N1: Fraction = Fraction(0)
    B1: Fraction = Fraction(0)
    N2: Fraction = Fraction(0)
    B2: Fraction = Fraction(0)
    params: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.q) != len(self.pi):
            raise ValueError("q and pi must have the same length")
        if not self.q:
            raise ValueError("need at least one coordinate")
        if self.S == 0:
            raise EvaluationError("S = q.q vanishes at this point")

    @property
    def d0(self) -> int:
        return len(self.q)

    @property
    def S(self) -> Fraction:
        return sum((x * x for x in self.q), Fraction(0))

    @property
    def P(self) -> Fraction:
        return sum((x * p for x, p in zip(self.q, self.pi)), Fraction(0))

    @property
    def K(self) -> Fraction:
        return sum((p * p for p in self.pi), Fraction(0))

    def invariant_values(self) -> dict[str, Fraction]:
        values = {
            "d": Fraction(self.d0),
            "S": self.S,
            "P": self.P,
            "K": self.K,
            "theta": self.theta,
            "pi_theta": self.pi_theta,
            "N1": self.N1,
            "B1": self.B1,
            "N2": self.N2,
            "B2": self.B2,
        }
        values.update({k: Fraction(v) for k, v in self.params.items()})
        return values


def exact_sqrt(x: Fraction) -> Fraction:
    """Square root of a non-negative rational that is a perfect square."""
    if x < 0:
        raise EvaluationError(f"negative radicand {x}")
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num != x.numerator or den * den != x.denominator:
        raise EvaluationError(f"radicand {x} is not a rational square")
    return Fraction(num, den)


def _eval_poly(poly, values: list) -> Fraction:
    total = Fraction(0)
    for monom, coeff in poly.terms():
        term = Fraction(int(coeff.numerator), int(coeff.denominator))
        for v, e in zip(values, monom):
            if e:
                if v is None:
                    raise EvaluationError("expression depends on an unassigned parameter")
                term *= v**e
        total += term
    return total


def _eval_scalar(e: ScalarExpr, values: Mapping[str, Fraction]) -> Fraction:
    ordered = [values.get(name) for name in _GEN_INDEX]
    root = None
    total_re = Fraction(0)
    total_im = Fraction(0)
    for (r, j), value in e._parts.items():
        den = _eval_poly(value.denom, ordered)
        if den == 0:
            raise EvaluationError("division by zero at this point")
        term = _eval_poly(value.numer, ordered) / den
        if r:
            if root is None:
                S_, theta = values["S"], values["theta"]
                radicand = (S_ + 2 * theta) / S_
                if radicand <= 0:
                    raise EvaluationError("radicand of R is not positive")
                root = exact_sqrt(radicand)
            term *= root
        if j:
            total_im += term
        else:
            total_re += term
    if total_im:
        raise EvaluationError("expression is not real at this point")
    return total_re


def evaluate_at_point(e, pt: PointAssignment):
    """Exact value(s) of a scalar, vector or rank-2 expression at a point.

    Vectors give a tuple of d0 components; rank-2 tensors give a tuple of rows.
    """
    values = pt.invariant_values()
    if isinstance(e, ScalarExpr):
        return _eval_scalar(e, values)
    if isinstance(e, VectorExpr):
        a, b = _eval_scalar(e.q, values), _eval_scalar(e.pi, values)
        return tuple(a * x + b * p for x, p in zip(pt.q, pt.pi))
    if isinstance(e, Tensor2Expr):
        c = [_eval_scalar(x, values) for x in e._coeffs()]
        rows = []
        for i in range(pt.d0):
            qi, pii = pt.q[i], pt.pi[i]
            row = []
            for j in range(pt.d0):
                qj, pj = pt.q[j], pt.pi[j]
                row.append(
                    c[0] * (1 if i == j else 0)
                    + c[1] * qi * qj
                    + c[2] * qi * pj
                    + c[3] * pii * qj
                    + c[4] * pii * pj
                )
            rows.append(tuple(row))
        return tuple(rows)
    raise TypeError(f"cannot evaluate {type(e).__name__}")
