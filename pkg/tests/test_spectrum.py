from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constraint_forge.algebra import D, ScalarExpr
from constraint_forge.spectrum import (
    NoSolutionError,
    energy_bft,
    energy_dirac,
    fix_c,
    format_c,
    spectrum_table,
)

LAM = ScalarExpr.gen("l")
C = ScalarExpr.gen("c")


def test_symbolic_forms():
    expected = (LAM * (LAM + D - 2) + (D - 1) ** 2 / 4 - C * C) / 2
    assert energy_dirac() == expected
    assert energy_bft() == (LAM * (LAM + D - 2) + D * (D - 3) / 4) / 2


def test_substitutions():
    assert energy_dirac(0, 3, 1) == 0
    assert energy_dirac(None, 3, 1) == LAM * (LAM + 1) / 2
    assert energy_bft(None, 3) == LAM * (LAM + 1) / 2
    assert energy_bft(None, 4) == (LAM * (LAM + 2) + 1) / 2
    assert energy_bft(1, 4) == 2
    assert energy_bft(1, 2) == Fraction(1, 4)
    assert energy_bft(0, 3) == 0


def test_fix_c():
    assert fix_c() == (D + 1) / 4
    assert fix_c(3) == 1
    residual = ScalarExpr.coerce(energy_dirac(c_squared=fix_c())) - energy_bft()
    assert residual.is_zero()
    assert format_c(1) == "+-1"


def test_fix_c_rejects_inconsistent_formulas():
    def tilted(l=None, d=None):
        return ScalarExpr.coerce(energy_bft(l, d)) + (LAM if l is None else l)

    with pytest.raises(NoSolutionError):
        fix_c(None, energy_dirac, tilted)

    def c_free(l=None, d=None, c=None, c_squared=None):
        return energy_bft(l, d)

    with pytest.raises(NoSolutionError):
        fix_c(None, c_free)


def test_table():
    rows = spectrum_table(3, 2)
    assert [(r.l, r.e_dirac, r.e_bft, r.gap) for r in rows] == [
        (0, 0, 0, None),
        (1, 1, 1, 1),
        (2, 3, 3, 2),
    ]
    rows = spectrum_table(3, 10)
    assert all(r.gap == r.l for r in rows[1:])
    with pytest.raises(ValueError):
        spectrum_table(1, 3)


def test_table_with_explicit_c():
    rows = spectrum_table(2, 1, Fraction(0))
    assert rows[0].e_dirac == Fraction(1, 8)


@pytest.mark.parametrize("d", range(2, 13))
def test_fixed_c_agrees_on_grid(d):
    for row in spectrum_table(d, 10):
        assert row.e_dirac == row.e_bft


@settings(max_examples=100)
@given(st.integers(0, 30), st.integers(2, 30), st.fractions(max_denominator=10))
def test_even_in_c(l, d, c):
    assert energy_dirac(l, d, c) == energy_dirac(l, d, -c)


@settings(max_examples=100)
@given(st.integers(0, 20), st.integers(2, 12), st.fractions(min_value=0, max_denominator=10))
def test_nonnegative_in_range(l, d, c):
    if c * c <= Fraction((d - 1) ** 2, 4):
        assert energy_dirac(l, d, c) >= 0
