from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from constraint_forge.algebra import C, D, ONE, S, ScalarExpr
from constraint_forge.operators import (
    E_ATOM,
    L_ATOM,
    NormalOp,
    OperatorError,
    apply_componentwise,
    apply_to_harmonic,
    build_weyl_product,
    commutator,
    dd,
    delta,
    expected_weyl_product,
    fn,
    identity,
    momentum,
    normal_order,
    op,
    q,
    quantum_commutator_residuals,
    sphere_laplacian,
    verify_quantum_commutators,
    weyl_momentum,
)

LAM = ScalarExpr.gen("l")
FUNCS = [S, 1 / S, S * S, S + D, C / S, ScalarExpr.const(3)]


@st.composite
def op_words(draw, max_len=6):
    """Random words using at most two index labels, each once or twice."""
    n_labels = draw(st.integers(0, 2))
    slots = []
    for lab in ("a", "b")[:n_labels]:
        uses = draw(st.integers(1, 2))
        for _ in range(uses):
            slots.append(draw(st.sampled_from([q(lab), dd(lab)])))
    extra = draw(st.lists(st.sampled_from(["E", "L", "F"]), max_size=max_len - len(slots)))
    for kind in extra:
        if kind == "F":
            slots.append(fn(draw(st.sampled_from(FUNCS[:5]))))
        else:
            slots.append((kind,))
    order = draw(st.permutations(slots))
    return tuple(order)


def _reassociate(word, rnd):
    """Normal-order random pieces, then compose them in a random tree order."""
    if len(word) <= 1:
        return normal_order(word)
    cut = rnd.randint(1, len(word) - 1)
    return _reassociate(word[:cut], rnd) * _reassociate(word[cut:], rnd)


@settings(max_examples=200)
@given(op_words(), st.randoms(use_true_random=False))
def test_confluence(word, rnd):
    assert _reassociate(word, rnd) == normal_order(word)


def test_examples():
    assert normal_order((dd("a"), fn(S))) == op((S, (dd("a"),)), (2 * ONE, (q("a"),)))
    assert normal_order((L_ATOM, fn(S))) == op((S, (L_ATOM,)), (4 * ONE, (E_ATOM,)), (2 * D, ()))
    both = normal_order((q("a"), q("b"), dd("a"), dd("b")))
    assert both == op((ONE, (E_ATOM, E_ATOM)), (-ONE, (E_ATOM,)))
    assert normal_order((delta("a", "a"),)) == op((D, ()))


def test_too_many_free_indices():
    with pytest.raises(OperatorError):
        normal_order((q("a"), q("b"), q("c")))
    with pytest.raises(OperatorError):
        normal_order((q("a"), q("a"), q("a")))


def test_scalar_coefficients_must_be_radial():
    with pytest.raises(OperatorError):
        fn(ScalarExpr.gen("P"))


def test_weyl_product():
    w = build_weyl_product()
    assert w == expected_weyl_product()
    const = ((D - 1) ** 2 * Fraction(1, 4) - C * C) / S
    assert w.power_coefficient(0, 0) == const
    assert w.power_coefficient(0, 1) == -ONE
    at_zero = build_weyl_product(0)
    assert at_zero.power_coefficient(1, 0) == (D - 1) / S - 1 / S
    assert at_zero.power_coefficient(2, 0) == 1 / S


def test_harmonic_eigenvalues():
    assert apply_to_harmonic(build_weyl_product()) == LAM * (LAM + D - 2) + (D - 1) ** 2 / 4 - C * C
    assert apply_to_harmonic(sphere_laplacian()) == LAM * (LAM + D - 2)
    assert apply_to_harmonic(identity()) == ONE
    with pytest.raises(OperatorError):
        apply_to_harmonic(normal_order((q("a"),)))


def test_commutators():
    assert verify_quantum_commutators().status == "pass"
    for shift in (0, C, Fraction(5, 3)):
        for key, value in quantum_commutator_residuals(shift).items():
            assert value.is_zero(), key


def test_shift_drops_out_of_momentum_commutator():
    shifted = commutator(momentum("i", C), momentum("j", C))
    plain = commutator(momentum("i"), momentum("j"))
    assert shifted == plain
    assert not plain.is_zero()


# ---- brute-force oracle ----


def _symbols(d0):
    return sp.symbols(f"x1:{d0 + 1}")


def _test_polys(xs, rnd, count=4):
    polys = []
    for _ in range(count):
        expr = 0
        for exps in itertools.product(range(3), repeat=len(xs)):
            if sum(exps) <= 4 and rnd.random() < 0.3:
                term = rnd.randint(-5, 5)
                for x, e in zip(xs, exps):
                    term *= x**e
                expr += term
        polys.append(sp.expand(expr))
    return polys


def _weyl_brute(f, xs, c):
    """Sum_i Pi^N_i Pi^N_i f with explicit differentiation."""
    s = sum(x * x for x in xs)
    n = len(xs)

    def pi_n(i, g):
        forward = sum(((1 if i == j else 0) - xs[i] * xs[j] / s) * sp.diff(g, xs[j]) for j in range(n))
        backward = sum(sp.diff(((1 if i == j else 0) - xs[i] * xs[j] / s) * g, xs[j]) for j in range(n))
        return -sp.I / 2 * (forward + backward + 2 * c * xs[i] * g / s)

    return sum(pi_n(i, pi_n(i, f)) for i in range(n))


def _apply_raw_word(word, f, xs, free_binding):
    """Apply a raw word atom by atom, summing over repeated labels."""
    counts = {}
    for atom in word:
        for lab in atom[1:] if atom[0] in ("q", "d", "dl") else ():
            counts[lab] = counts.get(lab, 0) + 1
    dummies = sorted(lab for lab, k in counts.items() if k == 2)
    total = 0
    s = sum(x * x for x in xs)
    for values in itertools.product(range(len(xs)), repeat=len(dummies)):
        binding = dict(free_binding, **dict(zip(dummies, values)))
        g = f
        for atom in reversed(word):
            kind = atom[0]
            if kind == "q":
                g = xs[binding[atom[1]]] * g
            elif kind == "d":
                g = sp.diff(g, xs[binding[atom[1]]])
            elif kind == "E":
                g = sum(x * sp.diff(g, x) for x in xs)
            elif kind == "L":
                g = sum(sp.diff(g, x, 2) for x in xs)
            elif kind == "F":
                from constraint_forge.operators import to_sympy

                g = to_sympy(atom[1], {"S": s, "d": len(xs), "c": sp.Symbol("c")}) * g
        total += g
    return total


def _agree(lhs, rhs, xs, rnd, points=50):
    """Exact agreement at random rational points (c stays symbolic)."""
    diff = lhs - rhs
    checked = 0
    while checked < points:
        vals = {x: sp.Rational(rnd.randint(-20, 20), rnd.randint(1, 20)) for x in xs}
        if all(v == 0 for v in vals.values()):
            continue
        checked += 1
        if sp.expand(diff.xreplace(vals)) != 0:
            return False
    return True


@pytest.mark.parametrize("d0", [2, 3])
def test_weyl_product_matches_brute_force(d0):
    rnd = random.Random(d0)
    xs = _symbols(d0)
    c = sp.Symbol("c")
    w = build_weyl_product()
    for f in _test_polys(xs, rnd, count=3):
        lhs = apply_componentwise(w, f, xs)
        rhs = _weyl_brute(f, xs, c)
        assert _agree(lhs, rhs, xs, rnd)


@pytest.mark.parametrize("d0", [2, 3])
def test_momentum_matches_brute_force(d0):
    rnd = random.Random(10 + d0)
    xs = _symbols(d0)
    s = sum(x * x for x in xs)
    for i in range(d0):
        f = _test_polys(xs, rnd, count=1)[0]
        got = apply_componentwise(weyl_momentum("i"), f, xs, {"i": i})
        forward = sum(((1 if i == j else 0) - xs[i] * xs[j] / s) * sp.diff(f, xs[j]) for j in range(d0))
        backward = sum(sp.diff(((1 if i == j else 0) - xs[i] * xs[j] / s) * f, xs[j]) for j in range(d0))
        want = -sp.I / 2 * (forward + backward + 2 * sp.Symbol("c") * xs[i] * f / s)
        assert _agree(got, want, xs, rnd)


@settings(max_examples=25)
@given(op_words(max_len=4), st.sampled_from([2, 3]), st.randoms(use_true_random=False))
def test_random_words_match_brute_force(word, d0, rnd):
    xs = _symbols(d0)
    normal = normal_order(word)
    free = normal.free
    f = _test_polys(xs, rnd, count=1)[0]
    for values in itertools.product(range(d0), repeat=len(free)):
        binding = dict(zip(free, values))
        lhs = apply_componentwise(normal, f, xs, binding)
        rhs = _apply_raw_word(word, f, xs, binding)
        assert _agree(lhs, rhs, xs, rnd)
