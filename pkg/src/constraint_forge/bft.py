"""Abelian conversion of the sphere constraints to first-class form.

The auxiliary pair Phi = (theta, pi_theta) has {theta, pi_theta} = 1, i.e.
omega^ab = eps^ab with eps^12 = +1.  Lowered indices use the matrix inverse,
so omega_12 = -1 and omega_21 = +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .algebra import (
    EPS,
    ONE,
    PI_THETA,
    PI_VEC,
    Q_VEC,
    R,
    S,
    THETA,
    ZERO,
    K,
    P,
    ExpressionError,
    ScalarExpr,
    VectorExpr,
    dot,
)
from .brackets import poisson, second_class_constraints

AUX = (THETA, PI_THETA)


def _matrix_inverse(m):
    (a, b), (c, d) = m
    det = a * d - b * c
    if not det:
        raise ExpressionError("matrix is not invertible")
    return ((d / det, -b / det), (-c / det, a / det))


@dataclass(frozen=True)
class BftConfig:
    order: int = 6
    omega_upper: tuple = ((ZERO, ONE), (-ONE, ZERO))
    X: tuple = field(default_factory=lambda: ((2 * ONE, ZERO), (ZERO, -S)))

    @property
    def omega_lower(self):
        return _matrix_inverse(self.omega_upper)

    @property
    def X_inverse(self):
        return _matrix_inverse(self.X)

    def zeroth_order_residual(self):
        """Delta_ab + X_ac omega^cd X_bd, which must vanish."""
        delta = second_class_constraints().delta
        X, w = self.X, self.omega_upper
        return tuple(
            tuple(
                delta[a][b]
                + sum(
                    (X[a][c] * w[c][e] * X[b][e] for c in range(2) for e in range(2)),
                    ZERO,
                )
                for b in range(2)
            )
            for a in range(2)
        )

    def constraint_series(self):
        """[Omega^(0), Omega^(1)] per constraint; higher orders vanish."""
        omegas = second_class_constraints().constraints
        first = tuple(
            sum((self.X[a][b] * AUX[b] for b in range(2)), ZERO) for a in range(2)
        )
        return [omegas, first]


@dataclass(frozen=True)
class FieldSeries:
    """Terms F^(0), ..., F^(N); term n is homogeneous of degree n in Phi."""

    terms: tuple

    def partial_sum(self, upto: int | None = None):
        terms = self.terms if upto is None else self.terms[: upto + 1]
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        return total

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, n):
        return self.terms[n]


def first_class_constraints():
    """Omega~1 = Omega1 + 2 theta, Omega~2 = Omega2 - S pi_theta."""
    om1, om2 = second_class_constraints().constraints
    return om1 + 2 * THETA, om2 - S * PI_THETA


def _omega_term(series, a, k):
    return series[k][a] if k < len(series) else ZERO


def _zero_like(x):
    return ZERO if isinstance(x, ScalarExpr) else VectorExpr()


def iterate_field(seed, cfg: BftConfig | None = None) -> FieldSeries:
    """Build the first-class extension of ``seed`` order by order.

    F^(n+1) = -1/(n+1) Phi^a omega_ab X^bc G_c^(n), where G_a^(n) collects
    every bracket of order n except the unknown {Omega^(1), F^(n+1)}_Phi.
    """
    cfg = cfg or BftConfig()
    if not isinstance(seed, (ScalarExpr, VectorExpr)):
        raise TypeError("seed must be a ScalarExpr or VectorExpr")
    series = cfg.constraint_series()
    w_low, X_inv = cfg.omega_lower, cfg.X_inverse
    terms = [seed]
    for n in range(cfg.order):
        G = []
        for a in range(2):
            g = _zero_like(seed)
            for m in range(n + 1):
                om = _omega_term(series, a, n - m)
                if om:
                    g = g + poisson(om, terms[m], sector="F")
            for m in range(n - 1):
                om = _omega_term(series, a, n - m)
                if om:
                    g = g + poisson(om, terms[m + 2], sector="Phi")
            # at n = 0 this term is the unknown itself
            if n >= 1:
                om = _omega_term(series, a, n + 1)
                if om:
                    g = g + poisson(om, terms[1], sector="Phi")
            G.append(g)
        nxt = _zero_like(seed)
        for a in range(2):
            for b in range(2):
                if not w_low[a][b]:
                    continue
                for c in range(2):
                    coeff = AUX[a] * w_low[a][b] * X_inv[b][c]
                    if coeff and not _is_zero(G[c]):
                        nxt = nxt + G[c] * coeff
        terms.append(nxt * Fraction(-1, n + 1))
    return FieldSeries(tuple(terms))


def _is_zero(x):
    return x.is_zero()


def closed_form_fields():
    """q~ = R q and pi~ = (pi - q pi_theta) S R / (S + 2 theta)."""
    q_tilde = Q_VEC * R
    pi_tilde = (PI_VEC - Q_VEC * PI_THETA) * (S * R / (S + 2 * THETA))
    return q_tilde, pi_tilde


def _at_aux_zero(x: ScalarExpr) -> ScalarExpr:
    return x.subs({"theta": 0, "pi_theta": 0})


def aux_taylor(x, order: int):
    """Homogeneous components in (theta, pi_theta) up to ``order``.

    Computed from partial derivatives at Phi = 0, independently of the
    iteration.
    """
    if isinstance(x, VectorExpr):
        qs, ps = aux_taylor(x.q, order), aux_taylor(x.pi, order)
        return [VectorExpr(a, b) for a, b in zip(qs, ps)]
    out = []
    row = [x]  # row[j] = d^j/dtheta^j d^(n-j)/dpi_theta^(n-j) x
    for n in range(order + 1):
        if n > 0:
            row = [row[0].diff("pi_theta")] + [r.diff("theta") for r in row]
        comp = ZERO
        for j, deriv in enumerate(row):
            value = _at_aux_zero(deriv)
            if value:
                weight = Fraction(1, factorial(j) * factorial(n - j))
                comp = comp + value * THETA**j * PI_THETA ** (n - j) * weight
        out.append(comp)
    return out


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 1."""
    if n < -1:
        raise ValueError("double factorial defined here for n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def q_series_coefficient(n: int) -> Fraction:
    """Coefficient of (theta/S)^n in q~_i / q_i."""
    if n == 0:
        return Fraction(1)
    return -Fraction((-1) ** n * double_factorial(2 * n - 3), factorial(n))


def pi_series_coefficient(n: int) -> Fraction:
    """Coefficient of (theta/S)^n in pi~_i / (pi_i - q_i pi_theta)."""
    return Fraction((-1) ** n * double_factorial(2 * n - 1), factorial(n))


def formula_terms(which: str, order: int):
    """Aux-homogeneous terms predicted by the double-factorial series."""
    x = THETA / S
    out = []
    for n in range(order + 1):
        if which == "q":
            out.append(Q_VEC * (q_series_coefficient(n) * x**n))
        elif which == "pi":
            term = PI_VEC * (pi_series_coefficient(n) * x**n)
            if n >= 1:
                term = term - Q_VEC * (PI_THETA * pi_series_coefficient(n - 1) * x ** (n - 1))
            out.append(term)
        else:
            raise ValueError("which must be 'q' or 'pi'")
    return out


def first_class_hamiltonians(constraints=None):
    """(H~, H~') with H~' = H~ + pi_theta Omega~2."""
    _, om2 = constraints or first_class_constraints()
    _, pi_tilde = closed_form_fields()
    h = dot(pi_tilde, pi_tilde) * Fraction(1, 2)
    return h, h + PI_THETA * om2


def original_hamiltonian() -> ScalarExpr:
    return K * Fraction(1, 2)


GAUGE_FIELDS = {
    "q": Q_VEC,
    "theta": THETA,
    "pi_theta": PI_THETA,
    "pi": PI_VEC,
}

# transformations generated by Omega~2 that carry a literal claim
EXPECTED_GAUGE = {
    "q": Q_VEC * EPS,
    "theta": -EPS * S,
}


def gauge_transform(name: str, constraints=None):
    """eps * {field, Omega~2}."""
    _, om2 = constraints or first_class_constraints()
    return poisson(GAUGE_FIELDS[name], om2) * EPS


def involution_residuals(constraints=None):
    """Brackets that must vanish or close for the first-class system."""
    om1, om2 = constraints or first_class_constraints()
    h, h_prime = first_class_hamiltonians((om1, om2))
    return {
        "{Om1~,Om2~}": poisson(om1, om2),
        "{Om1~,H~}": poisson(om1, h),
        "{Om2~,H~}": poisson(om2, h),
        "{Om1~,H~'} - 2 Om2~": poisson(om1, h_prime) - 2 * om2,
        "{Om2~,H~'}": poisson(om2, h_prime),
    }


def limit_residuals(constraints=None):
    """Setting Phi = 0 must return the second-class system."""
    om1, om2 = constraints or first_class_constraints()
    h, h_prime = first_class_hamiltonians((om1, om2))
    q_t, pi_t = closed_form_fields()
    base = second_class_constraints().constraints
    H = original_hamiltonian()
    zero = {"theta": 0, "pi_theta": 0}
    return {
        "Om1~": om1.subs(zero) - base[0],
        "Om2~": om2.subs(zero) - base[1],
        "H~": h.subs(zero) - H,
        "H~'": h_prime.subs(zero) - H,
        "q~": q_t.subs(zero) - Q_VEC,
        "pi~": pi_t.subs(zero) - PI_VEC,
    }
