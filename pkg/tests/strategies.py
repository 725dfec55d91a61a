"""Shared hypothesis strategies."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from constraint_forge.algebra import ScalarExpr

small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)

POLY_GENS = ("S", "P", "K", "theta", "pi_theta", "d", "c")


def scalar_exprs(gens=POLY_GENS, with_root=True, with_i=True, allow_division=True, max_leaves=6):
    atoms = [small_rationals.map(ScalarExpr.const), st.sampled_from(gens).map(ScalarExpr.gen)]
    if with_root:
        atoms.append(st.just(ScalarExpr.gen("R")))
    if with_i:
        atoms.append(st.just(ScalarExpr.gen("i")))
    leaf = st.one_of(*atoms)

    def extend(children):
        pairs = st.tuples(children, children)
        ops = [
            pairs.map(lambda ab: ab[0] + ab[1]),
            pairs.map(lambda ab: ab[0] - ab[1]),
            pairs.map(lambda ab: ab[0] * ab[1]),
        ]
        if allow_division:
            denominators = st.sampled_from(
                [ScalarExpr.gen("S"), ScalarExpr.gen("S") + 2 * ScalarExpr.gen("theta"), ScalarExpr.gen("d") + 1]
            )
            ops.append(st.tuples(children, denominators).map(lambda ab: ab[0] / ab[1]))
        return st.one_of(*ops)

    return st.recursive(leaf, extend, max_leaves=max_leaves)


nonzero_fraction = small_rationals.filter(lambda x: x != 0)


def frac(x) -> Fraction:
    return Fraction(x)
