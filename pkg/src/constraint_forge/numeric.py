"""Cross-checks that do not go through the invariant bracket table.

The bracket oracle expands every expression into Cartesian components
q_1..q_d0, pi_1..pi_d0, theta, pi_theta and differentiates exactly with
forward-mode dual numbers over the rationals.  The circle check
diagonalizes a finite-difference Laplacian in floating point.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import (
    PI_VEC,
    Q_VEC,
    S,
    K,
    P,
    PointAssignment,
    ScalarExpr,
    Tensor2Expr,
    VectorExpr,
    EvaluationError,
    _GEN_INDEX,
    evaluate_at_point,
    exact_sqrt,
)
from .checks import CheckReport, stopwatch

try:  # same exact rationals, several times faster
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _to_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))

# ---- exact forward-mode differentiation ----


class Dual:
    """Rational value with an exact gradient over all phase-space components."""

    __slots__ = ("value", "grad")

    def __init__(self, value, grad):
        self.value = value if isinstance(value, _Q) else _Q(value)
        self.grad = tuple(grad)

    @classmethod
    def const(cls, value, n: int) -> Dual:
        return cls(value, (_Q(0),) * n)

    @classmethod
    def var(cls, value, k: int, n: int) -> Dual:
        grad = [_Q(0)] * n
        grad[k] = _Q(1)
        return cls(value, grad)

    def _lift(self, other):
        if isinstance(other, Dual):
            return other
        return Dual.const(other, len(self.grad))

    def __add__(self, other):
        other = self._lift(other)
        return Dual(self.value + other.value, (a + b for a, b in zip(self.grad, other.grad)))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, (-a for a in self.grad))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        u, v = self.value, other.value
        return Dual(u * v, (u * b + v * a for a, b in zip(self.grad, other.grad)))

    __rmul__ = __mul__

    def reciprocal(self) -> Dual:
        if self.value == 0:
            raise EvaluationError("division by zero at this point")
        inv = 1 / self.value
        return Dual(inv, (-a * inv * inv for a in self.grad))

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __pow__(self, e: int):
        out = Dual.const(1, len(self.grad))
        base = self if e >= 0 else self.reciprocal()
        for _ in range(abs(e)):
            out = out * base
        return out

    def sqrt(self) -> Dual:
        root = _Q(exact_sqrt(_to_fraction(self.value)))
        if root == 0:
            raise EvaluationError("square root is not differentiable at zero")
        return Dual(root, (a / (2 * root) for a in self.grad))


class ComponentPoint:
    """Component duals for one rational phase-space point."""

    def __init__(self, pt: PointAssignment):
        self.pt = pt
        d0 = pt.d0
        self.d0 = d0
        self.n = n = 2 * d0 + 2
        self.q = [Dual.var(x, k, n) for k, x in enumerate(pt.q)]
        self.pi = [Dual.var(p, d0 + k, n) for k, p in enumerate(pt.pi)]
        theta = Dual.var(pt.theta, 2 * d0, n)
        pi_theta = Dual.var(pt.pi_theta, 2 * d0 + 1, n)
        zero = Dual.const(0, n)
        s = _dot(self.q, self.q, zero)
        values = {name: None for name in _GEN_INDEX}
        values.update(
            d=Dual.const(d0, n),
            S=s,
            P=_dot(self.q, self.pi, zero),
            K=_dot(self.pi, self.pi, zero),
            theta=theta,
            pi_theta=pi_theta,
            N1=Dual.const(pt.N1, n),
            B1=Dual.const(pt.B1, n),
            N2=Dual.const(pt.N2, n),
            B2=Dual.const(pt.B2, n),
        )
        for k, v in pt.params.items():
            values[k] = Dual.const(v, n)
        self._ordered = [values[name] for name in _GEN_INDEX]
        self._root = None
        self._memo = {}
        self._s, self._theta = s, theta

    @property
    def root(self) -> Dual:
        if self._root is None:
            self._root = ((self._s + 2 * self._theta) / self._s).sqrt()
        return self._root

    def _poly(self, poly) -> Dual:
        total = Dual.const(0, self.n)
        for monom, coeff in poly.terms():
            term = Dual.const(_Q(int(coeff.numerator), int(coeff.denominator)), self.n)
            for v, e in zip(self._ordered, monom):
                if e:
                    if v is None:
                        raise EvaluationError("expression depends on an unassigned parameter")
                    term = term * v**e
            total = total + term
        return total

    def scalar(self, e: ScalarExpr) -> Dual:
        if e not in self._memo:
            self._memo[e] = self._scalar(e)
        return self._memo[e]

    def _scalar(self, e: ScalarExpr) -> Dual:
        total = Dual.const(0, self.n)
        for (r, j), value in e.parts.items():
            if j:
                raise EvaluationError("oracle handles real expressions only")
            term = self._poly(value.numer) / self._poly(value.denom)
            if r:
                term = term * self.root
            total = total + term
        return total

    def components(self, e):
        """Scalars give one dual; vectors give d0 duals."""
        if isinstance(e, ScalarExpr):
            return self.scalar(e)
        if isinstance(e, VectorExpr):
            a, b = self.scalar(e.q), self.scalar(e.pi)
            return [a * x + b * p for x, p in zip(self.q, self.pi)]
        raise TypeError(f"cannot expand {type(e).__name__}")

    def bracket(self, f: Dual, g: Dual) -> Fraction:
        d0 = self.d0
        total = _Q(0)
        for k in range(d0):
            total += f.grad[k] * g.grad[d0 + k] - f.grad[d0 + k] * g.grad[k]
        t, pt_ = 2 * d0, 2 * d0 + 1
        return _to_fraction(total + f.grad[t] * g.grad[pt_] - f.grad[pt_] * g.grad[t])


def _dot(u, v, zero):
    total = zero
    for a, b in zip(u, v):
        total = total + a * b
    return total


def _bracket_values(cp: ComponentPoint, a, b):
    """Componentwise Poisson bracket: Fraction, tuple, or tuple of rows."""
    ca, cb = cp.components(a), cp.components(b)
    if isinstance(ca, Dual) and isinstance(cb, Dual):
        return cp.bracket(ca, cb)
    if isinstance(ca, Dual):
        return tuple(cp.bracket(ca, y) for y in cb)
    if isinstance(cb, Dual):
        return tuple(cp.bracket(x, cb) for x in ca)
    return tuple(tuple(cp.bracket(x, y) for y in cb) for x in ca)


def _combine(x, y, op):
    if isinstance(x, tuple):
        return tuple(_combine(u, v, op) for u, v in zip(x, y))
    return op(x, y)


def _scale(x, s):
    if isinstance(x, tuple):
        return tuple(_scale(u, s) for u in x)
    return x * s


def _times(left, right):
    """Product of bracket values {A, Omega_a} and {Omega_b, B}."""
    if isinstance(left, tuple) and isinstance(right, tuple):
        return tuple(tuple(u * v for v in right) for u in left)
    if isinstance(left, tuple):
        return _scale(left, right)
    return _scale(right, left)


def component_dirac(cp: ComponentPoint, a, b, constraints):
    """Dirac bracket built entirely from component brackets at the point."""
    om = [cp.scalar(c) for c in constraints]
    delta = [[cp.bracket(x, y) for y in om] for x in om]
    (p, q), (r, s) = delta
    det = p * s - q * r
    if det == 0:
        raise EvaluationError("constraint matrix is singular at this point")
    inv = [[s / det, -q / det], [-r / det, p / det]]
    ca, cb = cp.components(a), cp.components(b)

    def with_om(x, y):
        if isinstance(x, list):
            return tuple(cp.bracket(u, y) for u in x)
        return cp.bracket(x, y)

    left = [with_om(ca, o) for o in om]
    right = [_negate(with_om(cb, o)) for o in om]  # {Omega_b, B} = -{B, Omega_b}
    out = _bracket_values(cp, a, b)
    for i in range(2):
        for j in range(2):
            if inv[i][j]:
                corr = _scale(_times(left[i], right[j]), inv[i][j])
                out = _combine(out, corr, lambda x, y: x - y)
    return out


def _negate(x):
    return _scale(x, -1)


# ---- random rational points ----


def random_rational(rng: random.Random, bound: int = 20, positive: bool = False) -> Fraction:
    lo = 1 if positive else -bound
    return Fraction(rng.randint(lo, bound), rng.randint(1, bound))


@dataclass
class SampleStats:
    drawn: int = 0
    rejected: int = 0


def random_point(rng: random.Random, d0: int, stats: SampleStats | None = None) -> PointAssignment:
    """Random point with S != 0 and theta chosen so that R is rational."""
    stats = stats if stats is not None else SampleStats()
    while True:
        stats.drawn += 1
        q = tuple(random_rational(rng) for _ in range(d0))
        s = sum(x * x for x in q)
        if s == 0:
            stats.rejected += 1
            continue
        pi = tuple(random_rational(rng) for _ in range(d0))
        r = random_rational(rng, positive=True)
        theta = s * (r * r - 1) / 2
        return PointAssignment(
            q=q,
            pi=pi,
            theta=theta,
            pi_theta=random_rational(rng),
            N1=random_rational(rng),
            B1=random_rational(rng),
            N2=random_rational(rng),
            B2=random_rational(rng),
        )


# ---- the oracle suite ----


@dataclass(frozen=True)
class OraclePair:
    name: str
    left: object
    right: object
    dirac: bool = False
    claim: object = None  # expected closed form, checked in addition


def oracle_pairs():
    from .bft import closed_form_fields, first_class_constraints, first_class_hamiltonians
    from .brackets import second_class_constraints

    om1, om2 = second_class_constraints().constraints
    ft1, ft2 = first_class_constraints()
    h, h_prime = first_class_hamiltonians()
    q_t, pi_t = closed_form_fields()
    delta_minus = Tensor2Expr(delta=ScalarExpr.const(1), qq=-1 / S)
    pi_pi = Tensor2Expr(pq=1 / S, qp=-1 / S)
    zero = ScalarExpr.const(0)
    return [
        OraclePair("{S,K}", S, K, claim=4 * P),
        OraclePair("{Om1,Om2}", om1, om2, claim=2 * S),
        OraclePair("{Om1,H}", om1, K / 2, claim=2 * om2),
        OraclePair("{Om1~,Om2~}", ft1, ft2, claim=zero),
        OraclePair("{Om1~,H~}", ft1, h, claim=zero),
        OraclePair("{Om2~,H~}", ft2, h, claim=zero),
        OraclePair("{Om1~,H~'}", ft1, h_prime, claim=2 * ft2),
        OraclePair("{Om2~,H~'}", ft2, h_prime, claim=zero),
        OraclePair("{q_i,q_j}_D", Q_VEC, Q_VEC, dirac=True, claim=Tensor2Expr()),
        OraclePair("{q_i,pi_j}_D", Q_VEC, PI_VEC, dirac=True, claim=delta_minus),
        OraclePair("{pi_i,pi_j}_D", PI_VEC, PI_VEC, dirac=True, claim=pi_pi),
        OraclePair("{Om1~,q~}", ft1, q_t, claim=VectorExpr()),
        OraclePair("{Om2~,q~}", ft2, q_t, claim=VectorExpr()),
        OraclePair("{Om1~,pi~}", ft1, pi_t, claim=VectorExpr()),
        OraclePair("{Om2~,pi~}", ft2, pi_t, claim=VectorExpr()),
        OraclePair("{R,pi_theta}", ScalarExpr.gen("R"), ScalarExpr.gen("pi_theta")),
        OraclePair("{R,P}", ScalarExpr.gen("R"), P),
    ]


def _point_text(pt: PointAssignment) -> str:
    fmt = lambda xs: "(" + ", ".join(str(x) for x in xs) + ")"  # noqa: E731
    return f"q={fmt(pt.q)} pi={fmt(pt.pi)} theta={pt.theta} pi_theta={pt.pi_theta}"


def run_bracket_oracle(trials: int = 100, d0_set=(3, 4, 5), seed: int = 20240917, pairs=None) -> CheckReport:
    """Compare invariant-algebra brackets with component differentiation."""
    from .brackets import dirac, poisson, second_class_constraints

    if trials < 1:
        raise ValueError("trials must be >= 1")
    for d0 in d0_set:
        if d0 not in (3, 4, 5):
            raise ValueError("d0 must be one of 3, 4, 5")
    pairs = oracle_pairs() if pairs is None else pairs
    constraints = second_class_constraints().constraints
    with stopwatch() as ms:
        symbolic = {}
        for pair in pairs:
            fn = dirac if pair.dirac else poisson
            symbolic[pair.name] = fn(pair.left, pair.right)
        rng = random.Random(seed)
        stats = SampleStats()
        mismatches = []
        comparisons = 0
        for d0 in d0_set:
            for trial in range(trials):
                pt = random_point(rng, d0, stats)
                cp = ComponentPoint(pt)
                for pair in pairs:
                    if pair.dirac:
                        got = component_dirac(cp, pair.left, pair.right, constraints)
                    else:
                        got = _bracket_values(cp, pair.left, pair.right)
                    targets = [("invariant", symbolic[pair.name])]
                    if pair.claim is not None:
                        targets.append(("claim", pair.claim))
                    for label, target in targets:
                        comparisons += 1
                        want = evaluate_at_point(target, pt)
                        if want != got:
                            mismatches.append(
                                f"{pair.name} vs {label} at d0={d0} trial={trial}: "
                                f"{got} != {want} [{_point_text(pt)}]"
                            )
    citation = (
        f"component differentiation agrees with the invariant brackets; "
        f"{comparisons} comparisons, {stats.rejected} resampled points"
    )
    if mismatches:
        return CheckReport("bracket oracle", "fail", "; ".join(mismatches[:5]), ms[0], citation)
    return CheckReport("bracket oracle", "pass", None, ms[0], citation)


# ---- finite-difference Laplacian on the circle ----


@dataclass(frozen=True)
class CircleGrid:
    N: int

    def __post_init__(self):
        if self.N < 16:
            raise ValueError("need N >= 16")

    @property
    def h(self) -> float:
        return 2 * np.pi / self.N

    def difference_matrix(self) -> np.ndarray:
        """Forward difference (u_{k+1} - u_k)/h with periodic wraparound."""
        eye = np.eye(self.N)
        return (np.roll(eye, 1, axis=1) - eye) / self.h

    def matrix(self) -> np.ndarray:
        """-(1/h^2) times the periodic second difference."""
        eye = np.eye(self.N)
        second = np.roll(eye, 1, axis=1) + np.roll(eye, -1, axis=1) - 2 * eye
        return -second / self.h**2

    def analytic(self) -> np.ndarray:
        m = np.arange(self.N)
        return np.sort(4 / self.h**2 * np.sin(np.pi * m / self.N) ** 2)


def circle_eigenvalues(N: int, k: int) -> np.ndarray:
    """The k smallest eigenvalues of the circle Laplacian, ascending.

    The matrix factors as D^T D with D the forward difference, so the
    eigenvalues are squared singular values of D.  This keeps full relative
    accuracy on the small modes, which a dense symmetric solver loses.
    """
    grid = CircleGrid(N)
    if not 1 <= k <= N:
        raise ValueError("need 1 <= k <= N")
    sv = np.linalg.svd(grid.difference_matrix(), compute_uv=False)
    return np.sort(sv**2)[:k]


def circle_checks(N: int = 512, l_max: int = 5):
    """(analytic agreement, continuum agreement) reports."""
    grid = CircleGrid(N)
    with stopwatch() as ms:
        a = grid.matrix()
        structure_ok = np.array_equal(a, a.T) and np.allclose(a.sum(axis=1), 0.0, atol=1e-9)
        ev = circle_eigenvalues(N, N)
        exact = grid.analytic()
        nonzero = exact > 0
        rel = np.abs(ev[nonzero] - exact[nonzero]) / exact[nonzero]
        zero_err = float(np.abs(ev[~nonzero]).max())
        worst = float(rel.max())
        ok = structure_ok and worst <= 1e-12 and zero_err <= 1e-12 * float(exact[nonzero].min())
    first = CheckReport(
        "circle spectrum vs circulant formula",
        "pass" if ok else "fail",
        None if ok else f"max relative error {worst:.3e}, zero mode {zero_err:.3e}",
        ms[0],
        f"N={N}, tolerance 1e-12 relative; max observed {worst:.2e}",
    )
    with stopwatch() as ms2:
        errors = []
        for l in range(1, l_max + 1):
            for idx in (2 * l - 1, 2 * l):
                errors.append((l, abs(ev[idx] - l * l) / (l * l)))
        worst_l = max(e for _, e in errors)
        ok2 = worst_l <= 1e-2 and abs(ev[0]) <= 1e-9
    second = CheckReport(
        "circle spectrum vs l^2",
        "pass" if ok2 else "fail",
        None if ok2 else f"max relative deviation {worst_l:.3e}",
        ms2[0],
        f"l <= {l_max}, tolerance 1e-2 relative; max observed {worst_l:.2e}",
    )
    return [first, second]
