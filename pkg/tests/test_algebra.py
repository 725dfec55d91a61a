from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constraint_forge.algebra import (
    I,
    ONE,
    PI_THETA,
    PI_VEC,
    Q_VEC,
    R,
    S,
    THETA,
    ZERO,
    EvaluationError,
    ExpressionError,
    K,
    P,
    PointAssignment,
    ScalarExpr,
    Tensor2Expr,
    VectorExpr,
    dot,
    evaluate_at_point,
    normalize,
)
from constraint_forge.numeric import random_point

from strategies import scalar_exprs

exprs = scalar_exprs()


@settings(max_examples=1000)
@given(exprs, exprs, exprs)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a
    assert a - a == ZERO
    assert a * ONE == a


@settings(max_examples=200)
@given(exprs)
def test_normalize_idempotent(a):
    assert normalize(normalize(a)) == normalize(a)
    assert normalize(a) == a


@settings(max_examples=200)
@given(exprs)
def test_inverse(a):
    if a.is_zero():
        with pytest.raises(ExpressionError):
            ONE / a
    else:
        assert a * (ONE / a) == ONE


def test_examples():
    assert (2 * S**2 * P) / (2 * S) == S * P
    assert R * R == (S + 2 * THETA) / S
    assert S - S == ZERO
    assert S * (1 / S) == ONE
    assert P**2 - P * P == ZERO
    assert K * S == S * K
    assert I * I == -ONE


def test_dot():
    assert dot(Q_VEC, Q_VEC) == S
    assert dot(Q_VEC, PI_VEC) == P
    v = PI_VEC - Q_VEC * PI_THETA
    assert dot(v, v) == K - 2 * P * PI_THETA + S * PI_THETA**2


def test_trace_uses_symbolic_d():
    t = Tensor2Expr(delta=ONE)
    assert t.trace() == ScalarExpr.gen("d")


def test_evaluate_examples():
    f = Fraction
    pt = PointAssignment(q=(f(1), f(2), f(2)), pi=(f(0), f(0), f(0)))
    assert evaluate_at_point(S, pt) == 9
    pt = PointAssignment(q=(f(1), f(0), f(0)), pi=(f(3), f(5), f(7)))
    assert evaluate_at_point(P, pt) == 3
    pt = PointAssignment(q=(f(1), f(0), f(0)), pi=(f(0), f(0), f(0)), theta=f(3, 2))
    assert evaluate_at_point(R, pt) == 2
    assert evaluate_at_point(Q_VEC * 2, pt) == (2, 0, 0)


def test_evaluate_rejections():
    f = Fraction
    with pytest.raises(EvaluationError):
        PointAssignment(q=(f(0), f(0)), pi=(f(1), f(1)))
    pt = PointAssignment(q=(f(1), f(0)), pi=(f(0), f(0)), theta=f(1))
    with pytest.raises(EvaluationError):
        evaluate_at_point(R, pt)  # sqrt(3)
    with pytest.raises(EvaluationError):
        evaluate_at_point(1 / (S - 1), pt)


point_seeds = st.tuples(st.integers(0, 2**32), st.sampled_from([3, 4, 5]))
poly_exprs = scalar_exprs(gens=("S", "P", "K", "theta", "pi_theta", "d"), with_i=False)


@settings(max_examples=100)
@given(point_seeds, poly_exprs, poly_exprs)
def test_evaluation_is_multiplicative(seed, a, b):
    pt = random_point(random.Random(seed[0]), seed[1])
    try:
        va, vb = evaluate_at_point(a, pt), evaluate_at_point(b, pt)
    except EvaluationError:
        return
    assert evaluate_at_point(a * b, pt) == va * vb
    assert evaluate_at_point(R * R, pt) == evaluate_at_point((S + 2 * THETA) / S, pt)


def test_diff_of_root():
    assert R.diff("theta") == 1 / (S * R)
    assert R.diff("S") == -THETA / (S * S * R)


def test_subs_rules():
    assert (R * S).subs({"theta": 0}) == S
    with pytest.raises(ExpressionError):
        R.subs({"S": 2})


def test_immutability():
    v = VectorExpr(ONE, ZERO)
    with pytest.raises(AttributeError):
        v.q = ZERO
    with pytest.raises(AttributeError):
        S._parts = {}
