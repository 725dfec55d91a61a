"""Grassmann-graded extended phase space and the BFV charges.

Odd generators, in canonical order: the BRST parameter ``lam`` first, then
C1, C2, Pbar1, Pbar2, P1, P2, Cbar1, Cbar2.  A :class:`GradedExpr` maps
sorted square-free tuples of odd generators to bosonic coefficients (written
to the left of the monomial).  Conjugate odd pairs are (C^a, Pbar_a) and
(P^a, Cbar_a); the bosonic pairs (N^a, B_a) live in the scalar algebra.

The bracket is the standard graded one,

    {A, B} = {A, B}_even + sum over odd pairs  dA/dX|_r  w^XY  dB/dY|_l

with w^XY symmetric and equal to ``ghost_sign`` for each conjugate pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    B1,
    B2,
    N1,
    N2,
    PI_VEC,
    Q_VEC,
    S,
    THETA,
    ZERO,
    ScalarExpr,
    VectorExpr,
)
from .bft import first_class_constraints, first_class_hamiltonians
from .brackets import poisson, second_class_constraints

GHOSTS = ("lam", "C1", "C2", "Pbar1", "Pbar2", "P1", "P2", "Cbar1", "Cbar2")
GHOST_NUMBER = {
    "lam": -1,
    "C1": 1,
    "C2": 1,
    "Pbar1": -1,
    "Pbar2": -1,
    "P1": 1,
    "P2": 1,
    "Cbar1": -1,
    "Cbar2": -1,
}
_INDEX = {name: k for k, name in enumerate(GHOSTS)}
_CONJUGATE = {
    "C1": "Pbar1",
    "Pbar1": "C1",
    "C2": "Pbar2",
    "Pbar2": "C2",
    "P1": "Cbar1",
    "Cbar1": "P1",
    "P2": "Cbar2",
    "Cbar2": "P2",
}

# Sign of {C^a, Pbar_a} and {P^a, Cbar_a}.  With +1 the ghost term of the
# minimal Hamiltonian must enter as +2 C1 Pbar2 for {Q, H_m} = 0; with -1
# the combination H~' - 2 C1 Pbar2 and delta_B Cbar = -lam B both hold.
DEFAULT_GHOST_SIGN = -1


class GradingError(ValueError):
    """Raised for parity-inhomogeneous input to the graded bracket."""


def _sort_monomial(gens):
    """Sort odd generators, returning (sign, tuple) or (0, None) if repeated."""
    idx = [_INDEX[g] for g in gens]
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    arr = list(idx)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(GHOSTS[k] for k in arr)


def _is_zero(c):
    return c.is_zero()


def _coeff_mul(a, b):
    if isinstance(a, VectorExpr) and isinstance(b, VectorExpr):
        raise TypeError("product of two vector coefficients is not supported")
    if isinstance(a, VectorExpr):
        return a * b
    return b * a if isinstance(b, VectorExpr) else a * b


class GradedExpr:
    """Immutable sum of coefficient * ordered odd monomial."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, coeff in (terms or {}).items():
            if not _is_zero(coeff):
                clean[tuple(mono)] = coeff
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("GradedExpr is immutable")

    @classmethod
    def ghost(cls, name: str) -> GradedExpr:
        if name not in _INDEX:
            raise KeyError(f"unknown odd generator {name!r}")
        return cls({(name,): ScalarExpr.const(1)})

    @classmethod
    def even(cls, coeff) -> GradedExpr:
        return cls({(): coeff})

    @staticmethod
    def coerce(x) -> GradedExpr:
        if isinstance(x, GradedExpr):
            return x
        if isinstance(x, (ScalarExpr, VectorExpr)):
            return GradedExpr.even(x)
        if isinstance(x, (int, Fraction)):
            return GradedExpr.even(ScalarExpr.const(x))
        raise TypeError(f"cannot interpret {type(x).__name__} as GradedExpr")

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def parity(self) -> int:
        """0 or 1; raises for inhomogeneous expressions (zero counts as even)."""
        parities = {len(m) % 2 for m in self._terms}
        if len(parities) > 1:
            raise GradingError("expression mixes even and odd terms")
        return parities.pop() if parities else 0

    def ghost_number(self) -> int:
        numbers = {sum(GHOST_NUMBER[g] for g in m) for m in self._terms}
        if len(numbers) > 1:
            raise GradingError("expression is not of definite ghost number")
        return numbers.pop() if numbers else 0

    def __add__(self, other):
        try:
            other = GradedExpr.coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return GradedExpr(terms)

    __radd__ = __add__

    def __neg__(self):
        return GradedExpr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = GradedExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return GradedExpr.coerce(other) - self

    def __mul__(self, other):
        try:
            other = GradedExpr.coerce(other)
        except TypeError:
            return NotImplemented
        terms = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                sign, mono = _sort_monomial(m1 + m2)
                if not sign:
                    continue
                c = _coeff_mul(c1, c2)
                if sign < 0:
                    c = -c
                terms[mono] = terms[mono] + c if mono in terms else c
        return GradedExpr(terms)

    def __rmul__(self, other):
        return GradedExpr.coerce(other) * self

    def __eq__(self, other):
        try:
            other = GradedExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def set_ghosts_zero(self):
        """The ghost-free part."""
        return self._terms.get((), ZERO)

    def __str__(self):
        from .parser import to_text

        if not self._terms:
            return "0"
        pieces = []
        for mono in sorted(self._terms, key=lambda m: (len(m), [_INDEX[g] for g in m])):
            coeff = self._terms[mono]
            text = to_text(coeff) if isinstance(coeff, ScalarExpr) else str(coeff)
            pieces.append("*".join([f"({text})"] + list(mono)))
        return " + ".join(pieces)

    __repr__ = __str__


def _right_derivative(mono, g):
    k = mono.index(g)
    return (-1) ** (len(mono) - 1 - k), mono[:k] + mono[k + 1 :]


def _left_derivative(mono, g):
    k = mono.index(g)
    return (-1) ** k, mono[:k] + mono[k + 1 :]


def _even_bracket(a, b):
    if isinstance(a, ScalarExpr) and isinstance(b, ScalarExpr):
        return poisson(a, b)
    if isinstance(a, VectorExpr) and isinstance(b, VectorExpr):
        raise TypeError("vector-vector coefficients are not supported here")
    return poisson(a, b)


def super_poisson(a, b, ghost_sign: int = DEFAULT_GHOST_SIGN) -> GradedExpr:
    """Graded Poisson bracket of parity-homogeneous expressions."""
    a, b = GradedExpr.coerce(a), GradedExpr.coerce(b)
    a.parity()
    b.parity()
    out = GradedExpr()
    for m1, f in a._terms.items():
        for m2, g in b._terms.items():
            bracket = _even_bracket(f, g)
            if not _is_zero(bracket):
                out = out + _place(bracket, m1, m2)
            for x in m1:
                y = _CONJUGATE.get(x)
                if y is None or y not in m2:
                    continue
                s1, r1 = _right_derivative(m1, x)
                s2, r2 = _left_derivative(m2, y)
                coeff = _coeff_mul(f, g)
                out = out + _place(coeff * (s1 * s2 * ghost_sign), r1, r2)
    return out


def _place(coeff, m1, m2) -> GradedExpr:
    """coeff * m1 * m2 with the monomials concatenated in order."""
    sign, mono = _sort_monomial(m1 + m2)
    if not sign:
        return GradedExpr()
    return GradedExpr({mono: coeff if sign > 0 else -coeff})


def g(name: str) -> GradedExpr:
    return GradedExpr.ghost(name)


@dataclass(frozen=True)
class Charges:
    Q: GradedExpr
    Psi: GradedExpr
    H_m: GradedExpr


def build_charges(constraints=None, gauge=None) -> Charges:
    """Q = C^a Om~_a + P^a B_a, Psi = Cbar_a chi^a + Pbar_a N^a, H_m = H~' - 2 C1 Pbar2.

    ``constraints`` replaces (Om~1, Om~2) in Q and H_m; ``gauge`` replaces
    the unitary choice chi^a = Omega_a.
    """
    om1, om2 = constraints or first_class_constraints()
    chi1, chi2 = gauge or second_class_constraints().constraints
    _, h_prime = first_class_hamiltonians((om1, om2))
    Q = g("C1") * om1 + g("C2") * om2 + g("P1") * B1 + g("P2") * B2
    Psi = g("Cbar1") * chi1 + g("Cbar2") * chi2 + g("Pbar1") * N1 + g("Pbar2") * N2
    H_m = GradedExpr.even(h_prime) - 2 * (g("C1") * g("Pbar2"))
    return Charges(Q, Psi, H_m)


def brst_relations(charges: Charges | None = None, ghost_sign: int = DEFAULT_GHOST_SIGN):
    """The three brackets that must vanish."""
    ch = charges or build_charges()
    sp = lambda x, y: super_poisson(x, y, ghost_sign)  # noqa: E731
    return {
        "{Q,Q}": sp(ch.Q, ch.Q),
        "{Q,H_m}": sp(ch.Q, ch.H_m),
        "{{Psi,Q},Q}": sp(sp(ch.Psi, ch.Q), ch.Q),
    }


BRST_FIELDS = {
    "q": Q_VEC,
    "theta": THETA,
    "Cbar": "Cbar2",
    "C": "C2",
    "B": B2,
    "pi": PI_VEC,
    "pi_theta": ScalarExpr.gen("pi_theta"),
}


def _field_expr(name):
    value = BRST_FIELDS[name]
    if isinstance(value, str):
        return g(value)
    return GradedExpr.even(value)


def expected_brst_rules():
    """Displayed BRST rules in the retained sector C = C2, Cbar = Cbar2, B = B2."""
    lam_C = g("lam") * g("C2")
    return {
        "q": lam_C * Q_VEC,
        "theta": -(lam_C * S),
        "Cbar": -(g("lam") * B2),
        "C": GradedExpr(),
        "B": GradedExpr(),
    }


def brst_transform(name: str, charges: Charges | None = None, ghost_sign: int = DEFAULT_GHOST_SIGN):
    """lam * {field, Q}."""
    ch = charges or build_charges()
    return g("lam") * super_poisson(_field_expr(name), ch.Q, ghost_sign)
