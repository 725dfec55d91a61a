"""Energy levels on the sphere and the choice of the ordering constant c."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import ExpressionError, ScalarExpr

_HALF = Fraction(1, 2)


class NoSolutionError(ExpressionError):
    """The two spectra cannot be matched by any value of c^2."""


def _value(x, name):
    if x is None:
        return ScalarExpr.gen(name)
    if isinstance(x, str):
        return ScalarExpr.gen(x)
    return ScalarExpr.coerce(x)


def _result(e: ScalarExpr):
    const = e.as_constant()
    return e if const is None else const


def energy_dirac(l=None, d=None, c=None, *, c_squared=None):
    """1/2 [l(l+d-2) + (d-1)^2/4 - c^2].

    Arguments left as None stay symbolic.  ``c_squared`` may replace c.
    """
    l, d = _value(l, "l"), _value(d, "d")
    if c_squared is not None:
        c2 = ScalarExpr.coerce(c_squared)
    else:
        c = _value(c, "c")
        c2 = c * c
    e = (l * (l + d - 2) + (d - 1) ** 2 * Fraction(1, 4) - c2) * _HALF
    return _result(e)


def energy_bft(l=None, d=None):
    """1/2 [l(l+d-2) + d(d-3)/4]."""
    l, d = _value(l, "l"), _value(d, "d")
    return _result((l * (l + d - 2) + d * (d - 3) * Fraction(1, 4)) * _HALF)


def _coefficients_in(e: ScalarExpr, name: str) -> dict:
    """Polynomial coefficients of ``e`` in generator ``name``."""
    out, k = {}, 0
    current = e
    fact = 1
    while not current.is_zero():
        coeff = current.subs({name: 0}) * Fraction(1, fact)
        if not coeff.is_zero():
            out[k] = coeff
        k += 1
        fact *= k
        current = current.diff(name)
        if k > 64:
            raise ExpressionError(f"expression is not polynomial in {name}")
    return out


def fix_c(d=None, dirac=energy_dirac, bft=energy_bft):
    """c^2 such that dirac(l, d, c) equals bft(l, d) identically in l.

    The formulas are parameters so mutated spectra can be fed in as
    negative controls.
    """
    d = _value(d, "d")
    difference = ScalarExpr.coerce(dirac(None, d, None)) - ScalarExpr.coerce(bft(None, d))
    by_l = _coefficients_in(difference, "l")
    for power, coeff in by_l.items():
        if power > 0 and not coeff.is_zero():
            raise NoSolutionError(f"l^{power} coefficient differs: {coeff}")
    const = by_l.get(0, ScalarExpr.const(0))
    by_c = _coefficients_in(const, "c")
    if set(by_c) - {0, 2} or 2 not in by_c or by_c[2].is_zero():
        raise NoSolutionError("difference is not linear in c^2")
    c2 = -by_c[0] / by_c[2]
    residual = ScalarExpr.coerce(dirac(None, d, c_squared=c2)) - ScalarExpr.coerce(bft(None, d))
    if not residual.is_zero():
        raise NoSolutionError(f"residual after fixing c^2: {residual}")
    return _result(c2)


@dataclass(frozen=True)
class SpectrumRow:
    l: int
    e_dirac: Fraction
    e_bft: Fraction
    gap: Fraction | None


def spectrum_table(d: int, l_max: int, c_mode="fixed"):
    """Rows (l, E_dirac, E_bft, E(l) - E(l-1)) with exact rationals.

    ``c_mode`` is "fixed" (c^2 = (d+1)/4) or a rational value of c.  The gap
    column follows the Dirac energies.
    """
    if d < 2 or l_max < 0:
        raise ValueError("need d >= 2 and l_max >= 0")
    if c_mode == "fixed":
        c2 = Fraction(fix_c(d))
    else:
        c2 = Fraction(c_mode) ** 2
    rows, prev = [], None
    for l in range(l_max + 1):
        e_d = Fraction(energy_dirac(l, d, c_squared=c2))
        e_b = Fraction(energy_bft(l, d))
        rows.append(SpectrumRow(l, e_d, e_b, None if prev is None else e_d - prev))
        prev = e_d
    return rows


def format_c(c2) -> str:
    """Float rendering of c = +-sqrt(c^2), for display only."""
    return f"+-{float(c2) ** 0.5:.12g}"
