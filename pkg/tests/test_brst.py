from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constraint_forge.algebra import B2, ONE, Q_VEC, S, ScalarExpr
from constraint_forge.brackets import second_class_constraints
from constraint_forge.brst import (
    DEFAULT_GHOST_SIGN,
    GHOSTS,
    GradedExpr,
    GradingError,
    brst_relations,
    brst_transform,
    build_charges,
    expected_brst_rules,
    g,
    super_poisson,
)

from strategies import scalar_exprs

coeffs = scalar_exprs(gens=("S", "P", "K", "theta", "pi_theta", "N1", "B1", "N2", "B2"), with_root=False, with_i=False, allow_division=False, max_leaves=3)
ODD = GHOSTS[1:]  # lam only enters through transformations


@st.composite
def graded(draw, parity):
    sizes = [k for k in range(0, 4) if k % 2 == parity]
    terms = draw(st.lists(st.tuples(coeffs, st.sampled_from(sizes), st.randoms(use_true_random=False)), min_size=1, max_size=3))
    out = GradedExpr()
    for coeff, size, rnd in terms:
        mono = GradedExpr.even(coeff)
        for name in rnd.sample(ODD, size):
            mono = mono * g(name)
        out = out + mono
    return out


parities = st.sampled_from([0, 1])


@settings(max_examples=200)
@given(st.data())
def test_graded_antisymmetry(data):
    pa, pb = data.draw(parities), data.draw(parities)
    a, b = data.draw(graded(pa)), data.draw(graded(pb))
    sign = -((-1) ** (pa * pb))
    assert super_poisson(a, b) == super_poisson(b, a) * sign


@settings(max_examples=50)
@given(st.data())
def test_graded_jacobi(data):
    ps = [data.draw(parities) for _ in range(3)]
    a, b, c = (data.draw(graded(p)) for p in ps)
    pa, pb, pc = ps
    sp = super_poisson
    total = (
        sp(a, sp(b, c)) * ((-1) ** (pa * pc))
        + sp(b, sp(c, a)) * ((-1) ** (pb * pa))
        + sp(c, sp(a, b)) * ((-1) ** (pc * pb))
    )
    assert total.is_zero()


def test_grassmann_product():
    c1, c2 = g("C1"), g("C2")
    assert (c1 * c1).is_zero()
    assert c1 * c2 == -(c2 * c1)
    assert (c1 * c2).parity() == 0
    with pytest.raises(GradingError):
        (c1 + ONE * GradedExpr.even(ONE)).parity()


def test_ghost_pair_sign():
    assert DEFAULT_GHOST_SIGN == -1
    assert super_poisson(g("C1"), g("Pbar1")) == GradedExpr.even(-ONE)
    assert super_poisson(g("C1"), g("Pbar1"), ghost_sign=1) == GradedExpr.even(ONE)
    assert super_poisson(g("P2"), g("Cbar2")) == GradedExpr.even(-ONE)


def test_relations_hold():
    for key, value in brst_relations().items():
        assert value.is_zero(), key


def test_ghost_numbers():
    ch = build_charges()
    assert (ch.Q.ghost_number(), ch.Psi.ghost_number(), ch.H_m.ghost_number()) == (1, -1, 0)
    assert ch.Q.parity() == 1 and ch.Psi.parity() == 1 and ch.H_m.parity() == 0


def test_transformations():
    for name, expected in expected_brst_rules().items():
        assert brst_transform(name) == expected, name
    assert brst_transform("q") == g("lam") * g("C2") * Q_VEC
    assert brst_transform("Cbar") == -(g("lam") * B2)


def test_other_sign_breaks_the_claims():
    rel = brst_relations(ghost_sign=1)
    assert rel["{Q,Q}"].is_zero()
    assert not rel["{Q,H_m}"].is_zero()
    assert brst_transform("Cbar", ghost_sign=1) != expected_brst_rules()["Cbar"]


def test_negative_control():
    ch = build_charges(second_class_constraints().constraints)
    qq = brst_relations(ch)["{Q,Q}"]
    assert qq == 4 * S * (g("C1") * g("C2"))


def test_even_coefficients_commute_with_ghosts():
    x = GradedExpr.even(ScalarExpr.gen("P"))
    assert x * g("C1") == g("C1") * x
