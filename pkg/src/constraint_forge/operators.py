"""Covariant differential operators on functions of q in R^d.

Words are products of atoms, read left to right as operator composition:

    ("F", f)      multiplication by a function f(S) of S = q.q
    ("dl", a, b)  Kronecker delta between index labels a and b
    ("q", a)      multiplication by q_a
    ("d", a)      partial derivative d/dq_a
    ("E",)        Euler operator q.d
    ("L",)        flat Laplacian d.d

A label occurring twice is summed over.  Normal form puts every term as
f(S) * deltas * q's * d's * E^m * L^n with only free labels left; it is
reached by the rewrite rules listed in :func:`_rewrite` and is unique.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction

from .algebra import C, D, I, ONE, S, ZERO, ExpressionError, ScalarExpr

_RANK = {"F": 0, "dl": 1, "q": 2, "d": 3, "E": 4, "L": 5}
E_ATOM = ("E",)
L_ATOM = ("L",)

_ALLOWED = {"S", "d", "c", "l"}


class OperatorError(ExpressionError):
    """Malformed operator words (too many free indices, bad coefficients)."""


def _check_function(f: ScalarExpr):
    if f.has_root() or not f.generators() <= _ALLOWED:
        raise OperatorError(f"operator coefficient must depend on S only: {f}")


def fn(f) -> tuple:
    f = ScalarExpr.coerce(f)
    _check_function(f)
    return ("F", f)


def q(label: str) -> tuple:
    return ("q", label)


def dd(label: str) -> tuple:
    return ("d", label)


def delta(a: str, b: str) -> tuple:
    return ("dl",) + tuple(sorted((a, b)))


def _labels(atom):
    kind = atom[0]
    if kind in ("q", "d"):
        return (atom[1],)
    if kind == "dl":
        return atom[1:]
    return ()


def _label_counts(word) -> Counter:
    counts = Counter()
    for atom in word:
        counts.update(_labels(atom))
    return counts


def free_labels(word) -> tuple:
    counts = _label_counts(word)
    bad = [lab for lab, n in counts.items() if n > 2]
    if bad:
        raise OperatorError(f"label(s) {bad} used more than twice")
    return tuple(sorted(lab for lab, n in counts.items() if n == 1))


def _rename(word, skip: int, old: str, new: str):
    out = []
    for k, atom in enumerate(word):
        if k == skip:
            continue
        if atom[0] in ("q", "d") and atom[1] == old:
            atom = (atom[0], new)
        elif atom[0] == "dl" and old in atom[1:]:
            a, b = atom[1:]
            atom = delta(new if a == old else a, new if b == old else b)
        out.append(atom)
    return tuple(out)


def _with(word, k, replacement, width=2):
    """Replace word[k:k+width] by ``replacement`` (a tuple of atoms)."""
    return word[:k] + tuple(replacement) + word[k + width :]


def _func_atom(f: ScalarExpr):
    """An F atom, or None with the constant pulled out when f has no S."""
    if "S" in f.generators():
        return ("F", f), ONE
    return None, f


def _fterm(coeff, word, k, before, f, after, width=2):
    """Term coeff * word[:k] + before + F(f) + after + word[k+width:]."""
    atom, const = _func_atom(f)
    middle = tuple(before) + ((atom,) if atom else ()) + tuple(after)
    return coeff * const, _with(word, k, middle, width)


def _rewrite(word):
    """One rewrite step: a list of (coefficient, word), or None if normal."""
    counts = _label_counts(word)
    # Kronecker deltas
    for k, atom in enumerate(word):
        if atom[0] != "dl":
            continue
        a, b = atom[1:]
        if a == b:
            return [(D, word[:k] + word[k + 1 :])]
        if counts[a] > 1:
            return [(ONE, _rename(word, k, a, b))]
        if counts[b] > 1:
            return [(ONE, _rename(word, k, b, a))]
    for k in range(len(word) - 1):
        x, y = word[k], word[k + 1]
        kx, ky = x[0], y[0]
        if kx == "F" and ky == "F":
            f = x[1] * y[1]
            atom, const = _func_atom(f)
            return [(const, _with(word, k, (atom,) if atom else ()))]
        if ky == "F" and kx != "F":
            g = y[1]
            g1 = g.diff("S")
            if kx in ("dl", "q"):
                return [(ONE, _with(word, k, (y, x)))]
            if kx == "d":
                # d_a g = g d_a + 2 g' q_a
                return [
                    (ONE, _with(word, k, (y, x))),
                    _fterm(2 * ONE, word, k, (), g1, (("q", x[1]),)),
                ]
            if kx == "E":
                # E g = g E + 2 S g'
                return [(ONE, _with(word, k, (y, x))), _fterm(2 * ONE, word, k, (), S * g1, ())]
            if kx == "L":
                # L g = g L + (2 d g' + 4 S g'') + 4 g' E
                g2 = g1.diff("S")
                return [
                    (ONE, _with(word, k, (y, x))),
                    _fterm(ONE, word, k, (), 2 * D * g1 + 4 * S * g2, ()),
                    _fterm(4 * ONE, word, k, (), g1, (E_ATOM,)),
                ]
        if ky == "dl" and kx not in ("F", "dl"):
            return [(ONE, _with(word, k, (y, x)))]
        if kx == "dl" and ky == "dl" and x > y:
            return [(ONE, _with(word, k, (y, x)))]
        if kx == "q" and ky == "q":
            if x[1] == y[1]:
                return [_fterm(ONE, word, k, (), S, ())]
            if x[1] > y[1]:
                return [(ONE, _with(word, k, (y, x)))]
        if kx == "d" and ky == "d":
            if x[1] == y[1]:
                return [(ONE, _with(word, k, (L_ATOM,)))]
            if x[1] > y[1]:
                return [(ONE, _with(word, k, (y, x)))]
        if kx == "d" and ky == "q":
            if x[1] == y[1]:
                # d_a q_a = E + d
                return [(ONE, _with(word, k, (E_ATOM,))), (D, _with(word, k, ()))]
            return [(ONE, _with(word, k, (y, x))), (ONE, _with(word, k, (delta(x[1], y[1]),)))]
        if kx == "q" and ky == "d" and x[1] == y[1]:
            return [(ONE, _with(word, k, (E_ATOM,)))]
        if kx == "E" and ky == "q":
            return [(ONE, _with(word, k, (y, x))), (ONE, _with(word, k, (y,)))]
        if kx == "L" and ky == "q":
            return [(ONE, _with(word, k, (y, x))), (2 * ONE, _with(word, k, (("d", y[1]),)))]
        if kx == "E" and ky == "d":
            return [(ONE, _with(word, k, (y, x))), (-ONE, _with(word, k, (y,)))]
        if kx == "L" and ky == "d":
            return [(ONE, _with(word, k, (y, x)))]
        if kx == "L" and ky == "E":
            return [(ONE, _with(word, k, (E_ATOM, L_ATOM))), (2 * ONE, _with(word, k, (L_ATOM,)))]
    # sorted word: contract a label shared by the q block and the d block
    qs = [k for k, atom in enumerate(word) if atom[0] == "q"]
    ds = [k for k, atom in enumerate(word) if atom[0] == "d"]
    for kq in qs:
        for kd in ds:
            if word[kq][1] == word[kd][1]:
                q_rest = tuple(word[k] for k in qs if k != kq)
                d_rest = tuple(word[k] for k in ds if k != kd)
                head = word[: qs[0]]
                tail = word[ds[-1] + 1 :]
                return [(ONE, head + q_rest + (E_ATOM,) + d_rest + tail)]
    return None


def _fresh_dummies(word, taken):
    """Rename summed labels of ``word`` away from ``taken``."""
    counts = _label_counts(word)
    for lab in [x for x, n in counts.items() if n == 2 and x in taken]:
        k = 0
        while f"_{k}" in taken or f"_{k}" in counts:
            k += 1
        new = f"_{k}"
        word = _rename(word, -1, lab, new)
        counts = _label_counts(word)
    return word


def _absorb(coeff: ScalarExpr, word):
    while word and word[0][0] == "F":
        coeff = coeff * word[0][1]
        word = word[1:]
    return coeff, word


def _normal_order_terms(terms) -> dict:
    pending: dict = {}

    def push(coeff, word):
        coeff, word = _absorb(coeff, word)
        if not coeff:
            return
        new = pending.get(word, ZERO) + coeff
        if new:
            pending[word] = new
        else:
            pending.pop(word, None)

    for coeff, word in terms:
        free_labels(word)
        push(coeff, tuple(word))
    done: dict = {}
    while pending:
        word = min(pending, key=len)
        coeff = pending.pop(word)
        step = _rewrite(word)
        if step is None:
            new = done.get(word, ZERO) + coeff
            if new:
                done[word] = new
            else:
                done.pop(word, None)
            continue
        for c, w in step:
            push(coeff * c, w)
    return done


class NormalOp:
    """Operator in normal form: mapping word -> coefficient f(S, d, c)."""

    __slots__ = ("_terms", "_free")

    def __init__(self, terms: dict):
        clean = {w: c for w, c in terms.items() if c}
        free = {free_labels(w) for w in clean}
        if len(free) > 1:
            raise OperatorError("terms carry different free indices")
        if free and len(next(iter(free))) > 2:
            raise OperatorError("more than two free indices")
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_free", free.pop() if free else ())

    def __setattr__(self, name, value):
        raise AttributeError("NormalOp is immutable")

    @classmethod
    def from_words(cls, terms) -> NormalOp:
        """``terms`` is an iterable of (coefficient, word)."""
        return cls(_normal_order_terms((ScalarExpr.coerce(c), tuple(w)) for c, w in terms))

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def free(self) -> tuple:
        return self._free

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, word=()) -> ScalarExpr:
        return self._terms.get(tuple(word), ZERO)

    def power_coefficient(self, e_power: int, l_power: int, prefix=()) -> ScalarExpr:
        word = tuple(prefix) + (E_ATOM,) * e_power + (L_ATOM,) * l_power
        return self.coefficient(word)

    def __add__(self, other):
        if not isinstance(other, NormalOp):
            return NotImplemented
        if self._terms and other._terms and self._free != other._free:
            raise OperatorError("cannot add operators with different free indices")
        terms = dict(self._terms)
        for w, c in other._terms.items():
            terms[w] = terms.get(w, ZERO) + c
        return NormalOp(terms)

    def __neg__(self):
        return NormalOp({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> NormalOp:
        """Left multiplication by a function of S."""
        f = ScalarExpr.coerce(f)
        _check_function(f)
        return NormalOp({w: f * c for w, c in self._terms.items()})

    def __mul__(self, other):
        """Operator composition self o other."""
        if isinstance(other, (ScalarExpr, int, Fraction)):
            other = ScalarExpr.coerce(other)
            _check_function(other)
            other = NormalOp.from_words([(ONE, (("F", other),))])
        if not isinstance(other, NormalOp):
            return NotImplemented
        words = []
        for w1, c1 in self._terms.items():
            taken = set(_label_counts(w1))
            for w2, c2 in other._terms.items():
                w2 = _fresh_dummies(w2, taken)
                atom, const = _func_atom(c2)
                middle = (atom,) if atom else ()
                words.append((c1 * const, w1 + middle + w2))
        return NormalOp(_normal_order_terms(words))

    def __rmul__(self, other):
        return self.scale(other)

    def relabel(self, mapping: dict) -> NormalOp:
        out = {}
        for w, c in self._terms.items():
            new = []
            for atom in w:
                if atom[0] in ("q", "d"):
                    atom = (atom[0], mapping.get(atom[1], atom[1]))
                elif atom[0] == "dl":
                    atom = delta(*(mapping.get(x, x) for x in atom[1:]))
                new.append(atom)
            out[tuple(new)] = c
        return NormalOp.from_words((c, w) for w, c in out.items())

    def __eq__(self, other):
        if not isinstance(other, NormalOp):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __str__(self):
        from .parser import to_text

        if not self._terms:
            return "0"
        pieces = []
        for w in sorted(self._terms, key=_word_key):
            factors = [f"({to_text(self._terms[w])})"] + [_atom_text(a) for a in w]
            pieces.append(" ".join(factors))
        return " + ".join(pieces)

    __repr__ = __str__


def _atom_text(atom) -> str:
    kind = atom[0]
    if kind == "q":
        return f"q_{atom[1]}"
    if kind == "d":
        return f"d_{atom[1]}"
    if kind == "dl":
        return f"delta_{atom[1]}{atom[2]}"
    return kind


def _word_key(word):
    return (len(word), [(_RANK[a[0]],) + tuple(a[1:]) for a in word])


def normal_order(word) -> NormalOp:
    """Normal form of a single word (a sequence of atoms)."""
    return NormalOp.from_words([(ONE, tuple(word))])


def op(*words) -> NormalOp:
    """Sum of (coefficient, word) pairs in normal form."""
    return NormalOp.from_words(words)


def identity() -> NormalOp:
    return NormalOp({(): ONE})


def commutator(a: NormalOp, b: NormalOp) -> NormalOp:
    return a * b - b * a


# ---- the operators of the sphere problem ----


def projected_derivative(i: str, j: str = "_s") -> NormalOp:
    """(delta_ij - q_i q_j / S) d_j."""
    return op((ONE, (delta(i, j), dd(j))), (-ONE, (fn(1 / S), q(i), q(j), dd(j))))


def momentum(i: str, shift=ZERO) -> NormalOp:
    """-i (delta_ij - q_i q_j/S) d_j - i c q_i / S with c = ``shift``."""
    out = projected_derivative(i) * (-I)
    shift = ScalarExpr.coerce(shift)
    if shift:
        out = out + op((-I * shift, (fn(1 / S), q(i))))
    return out


def weyl_momentum(i: str, shift=C) -> NormalOp:
    """-(i/2) [(delta_ij - q_iq_j/S) d_j + d_j (delta_ij - q_iq_j/S) + 2 c q_i/S]."""
    j = "_s"
    shift = ScalarExpr.coerce(shift)
    forward = [(ONE, (delta(i, j), dd(j))), (-ONE, (fn(1 / S), q(i), q(j), dd(j)))]
    backward = [(ONE, (dd(j), delta(i, j))), (-ONE, (dd(j), fn(1 / S), q(i), q(j)))]
    shift_term = [(2 * shift, (fn(1 / S), q(i)))] if shift else []
    half = -I * Fraction(1, 2)
    return op(*[(half * c, w) for c, w in forward + backward + shift_term])


def build_weyl_product(c=C) -> NormalOp:
    """Pi^N_i Pi^N_i with the index i contracted."""
    pi_n = weyl_momentum("i", c)
    return pi_n * pi_n


def expected_weyl_product(c=C) -> NormalOp:
    """-L + ((d-1)/S) E + (1/S)(E^2 - E) + (1/S)((d-1)^2/4 - c^2)."""
    c = ScalarExpr.coerce(c)
    const = ((D - 1) ** 2 * Fraction(1, 4) - c * c) / S
    return op(
        (-ONE, (L_ATOM,)),
        ((D - 1) / S, (E_ATOM,)),
        (1 / S, (E_ATOM, E_ATOM)),
        (-1 / S, (E_ATOM,)),
        (const, ()),
    )


def sphere_laplacian() -> NormalOp:
    """-L + (1/S)(E^2 - E) + ((d-1)/S) E."""
    return expected_weyl_product(ZERO) - op((((D - 1) ** 2 * Fraction(1, 4)) / S, ()))


def apply_to_harmonic(operator: NormalOp, l=None) -> ScalarExpr:
    """Eigenvalue on a harmonic homogeneous polynomial of degree l, at S = 1.

    L h = 0 and E h = l h; coefficients are then evaluated on the unit sphere.
    """
    l = ScalarExpr.gen("l") if l is None else ScalarExpr.coerce(l)
    if operator.free:
        raise OperatorError("apply_to_harmonic needs a fully contracted operator")
    total = ZERO
    for word, coeff in operator.terms.items():
        kinds = [a[0] for a in word]
        if any(k not in ("E", "L") for k in kinds) or kinds != sorted(kinds):
            raise OperatorError("operator is not in normal form")
        if "L" in kinds:
            continue
        total = total + coeff.subs({"S": 1}) * l ** len(kinds)
    return total


def quantum_commutator_residuals(shift=ZERO) -> dict:
    """Residuals of the canonical commutators for the momentum with ``shift``."""
    pi_i, pi_j = momentum("i", shift), momentum("j", shift)
    q_i, q_j = normal_order((q("i"),)), normal_order((q("j"),))
    proj = op((ONE, (delta("i", "j"),)), (-1 / S, (q("i"), q("j"))))
    rhs_pp = (q_j * pi_i - q_i * pi_j).scale(I / S)
    return {
        "[q_i,q_j]": commutator(q_i, q_j),
        "[q_i,pi_j] - i(delta_ij - q_iq_j/S)": commutator(q_i, pi_j) - proj * I,
        "[pi_i,pi_j] - (i/S)(q_j pi_i - q_i pi_j)": commutator(pi_i, pi_j) - rhs_pp,
    }


def verify_quantum_commutators():
    """Canonical commutators for pi (c = 0) and for Pi with symbolic c."""
    from .checks import from_residuals, stopwatch

    with stopwatch() as ms:
        residuals = {}
        for label, shift in (("pi", ZERO), ("Pi", C)):
            for key, value in quantum_commutator_residuals(shift).items():
                residuals[f"{label}: {key}"] = value
    return from_residuals(
        "quantum commutators",
        residuals,
        "projected momenta close on q_i, pi_j with the sphere structure for every c",
        ms[0],
    )


# ---- brute-force oracle on explicit polynomials ----


def apply_componentwise(operator: NormalOp, poly, xs, index_values=None):
    """Apply ``operator`` to a sympy expression in coordinates ``xs``.

    Free labels are bound by ``index_values`` (label -> 0-based axis).  The
    parameter d is set to len(xs); c and i keep their sympy meaning.
    """
    import sympy as sp

    from .algebra import _FIELD  # noqa: F401  (ensures the field is built)

    index_values = index_values or {}
    dim = len(xs)
    s_val = sum(x * x for x in xs)
    c_sym = sp.Symbol("c")

    def atom_apply(atom, expr):
        kind = atom[0]
        if kind == "q":
            return xs[index_values[atom[1]]] * expr
        if kind == "d":
            return sp.diff(expr, xs[index_values[atom[1]]])
        if kind == "dl":
            a, b = (index_values[x] for x in atom[1:])
            return expr if a == b else sp.Integer(0)
        if kind == "E":
            return sum(x * sp.diff(expr, x) for x in xs)
        if kind == "L":
            return sum(sp.diff(expr, x, 2) for x in xs)
        raise OperatorError(f"unexpected atom {atom!r}")

    total = sp.Integer(0)
    for word, coeff in operator.terms.items():
        expr = poly
        for atom in reversed(word):
            expr = atom_apply(atom, expr)
        total += to_sympy(coeff, {"S": s_val, "d": dim, "c": c_sym}) * expr
    return total


def to_sympy(e: ScalarExpr, values: dict):
    """Convert a scalar expression in (S, d, c, l, R-free) to sympy."""
    import sympy as sp

    from .parser import to_text

    local = {name: sp.sympify(v) for name, v in values.items()}
    local["i"] = sp.I
    text = to_text(e).replace("^", "**")
    return sp.sympify(text, locals=local)
