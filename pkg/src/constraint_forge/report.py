"""Verification suite: ordered checks, negative controls and rendering."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction

from .algebra import D, K, PI_VEC, Q_VEC, S, THETA, ScalarExpr, Tensor2Expr, dot
from .checks import CheckReport, from_residuals, stopwatch

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
TARGETS = ("all", "brackets", "bft", "weyl", "brst", "numeric")
MUTATIONS = ("omega2-unshifted", "second-class-charge", "spectrum-shift", "weyl-unsymmetrized")


@dataclass(frozen=True)
class CliConfig:
    command: str = "verify"
    target: str = "all"
    order: int = 6
    d: int = 3
    l_max: int = 10
    c_mode: str = "fixed"
    trials: int = 100
    grid: int = 512
    seed: int = DEFAULT_SEED
    format: str = "md"
    out: str | None = None
    mutate: str | None = None

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.mutate is not None and self.mutate not in MUTATIONS:
            raise ValueError(f"unknown mutation {self.mutate!r}")


# ---- individual checks ----


def _timed(name, citation, build):
    """Run ``build`` (returning a residual dict) and wrap it in a report."""
    with stopwatch() as ms:
        residuals = build()
    return from_residuals(name, residuals, citation, ms[0])


def _first_class(cfg):
    from .bft import first_class_constraints

    om1, om2 = first_class_constraints()
    if cfg.mutate == "omega2-unshifted":
        om2 = om2 + S * ScalarExpr.gen("pi_theta")
    return om1, om2


def check_bracket_axioms(cfg):
    from .brackets import bracket_table

    with stopwatch() as ms:
        try:
            bracket_table.cache_clear()
            bracket_table()
            status, residual = "pass", None
        except AssertionError as exc:
            status, residual = "fail", str(exc)
    return [
        CheckReport(
            "bracket axioms",
            status,
            residual,
            ms[0],
            "antisymmetry and Jacobi over S, P, K, theta, pi_theta, N, B and R",
        )
    ]


def check_dirac(cfg):
    from .brackets import dirac, poisson, second_class_constraints

    cs = second_class_constraints()
    om1, om2 = cs.constraints
    reports = [
        _timed(
            "constraint algebra",
            "{Omega1, Omega2} = 2 q.q and {Omega1, H} = 2 Omega2",
            lambda: {
                "{Om1,Om2} - 2S": poisson(om1, om2) - 2 * S,
                "{Om1,H} - 2 Om2": poisson(om1, K / 2) - 2 * om2,
                "det Delta - 4S^2": cs.det - 4 * S * S,
            },
        ),
        _timed(
            "dirac brackets",
            "Dirac brackets of q and pi on the sphere",
            lambda: {
                "{q_i,q_j}_D": dirac(Q_VEC, Q_VEC),
                "{q_i,pi_j}_D - (delta_ij - q_iq_j/S)": dirac(Q_VEC, PI_VEC)
                - Tensor2Expr(delta=ScalarExpr.const(1), qq=-1 / S),
                "{pi_i,pi_j}_D - (pi_iq_j - q_ipi_j)/S": dirac(PI_VEC, PI_VEC)
                - Tensor2Expr(pq=1 / S, qp=-1 / S),
                "{Om1,q_i}_D": dirac(om1, Q_VEC),
                "{Om2,pi_i}_D": dirac(om2, PI_VEC),
                "{Om1,K}_D": dirac(om1, K),
            },
        ),
    ]
    return reports


def check_bft(cfg):
    from .bft import (
        BftConfig,
        aux_taylor,
        closed_form_fields,
        formula_terms,
        involution_residuals,
        iterate_field,
    )
    from .brackets import poisson

    om1, om2 = _first_class(cfg)
    bft_cfg = BftConfig(order=cfg.order)
    q_t, pi_t = closed_form_fields()

    def series():
        out = {}
        for name, seed, closed in (("q", Q_VEC, q_t), ("pi", PI_VEC, pi_t)):
            iterated = iterate_field(seed, bft_cfg)
            taylor = aux_taylor(closed, cfg.order)
            formula = formula_terms(name, cfg.order)
            for n in range(cfg.order + 1):
                out[f"{name}^({n}) iterated - taylor"] = iterated[n] - taylor[n]
                out[f"{name}^({n}) iterated - formula"] = iterated[n] - formula[n]
        return out

    def fields():
        return {
            "{Om1~,q~}": poisson(om1, q_t),
            "{Om2~,q~}": poisson(om2, q_t),
            "{Om1~,pi~}": poisson(om1, pi_t),
            "{Om2~,pi~}": poisson(om2, pi_t),
            "q~.q~ - (S + 2 theta)": dot(q_t, q_t) - (S + 2 * THETA),
        }

    def involution():
        res = involution_residuals((om1, om2))
        return {k: v for k, v in res.items() if "H~'" not in k}

    return [
        _timed(
            "bft zeroth order",
            "Delta_ab + X_ac omega^cd X_bd = 0 for X = diag(2, -S)",
            lambda: {
                f"({a},{b})": bft_cfg.zeroth_order_residual()[a][b]
                for a in range(2)
                for b in range(2)
            },
        ),
        _timed(
            "bft involution",
            "first-class constraints commute with each other and with H~",
            involution,
        ),
        _timed(
            f"bft field series to order {cfg.order}",
            "iteration, theta-expansion of the closed forms and double-factorial coefficients agree",
            series,
        ),
        _timed(
            "physical fields",
            "q~ and pi~ commute with both first-class constraints",
            fields,
        ),
    ]


def check_hamiltonian(cfg):
    from .bft import EXPECTED_GAUGE, gauge_transform, involution_residuals, limit_residuals

    om = _first_class(cfg)
    return [
        _timed(
            "gauss law",
            "{Om1~, H~'} = 2 Om2~ and {Om2~, H~'} = 0",
            lambda: {k: v for k, v in involution_residuals(om).items() if "H~'" in k},
        ),
        _timed(
            "phi = 0 limits",
            "constraints, Hamiltonians and fields reduce to the original system",
            lambda: limit_residuals(om),
        ),
        _timed(
            "gauge transformations",
            "eps {q_i, Om2~} = eps q_i and eps {theta, Om2~} = -eps S",
            lambda: {
                f"delta {name}": gauge_transform(name, om) - expected
                for name, expected in EXPECTED_GAUGE.items()
            },
        ),
    ]


def check_commutators(cfg):
    from .operators import verify_quantum_commutators

    return [verify_quantum_commutators()]


def _weyl_operator(cfg):
    from .operators import build_weyl_product, momentum

    if cfg.mutate == "weyl-unsymmetrized":
        pi = momentum("i", ScalarExpr.gen("c"))
        return pi * pi
    return build_weyl_product()


def check_weyl(cfg):
    from .operators import expected_weyl_product

    return [
        _timed(
            "weyl product",
            "Pi^N_i Pi^N_i = -L + ((d-1)/S) E + (E^2 - E)/S + ((d-1)^2/4 - c^2)/S",
            lambda: {"Pi^N.Pi^N - expected": _weyl_operator(cfg) - expected_weyl_product()},
        )
    ]


def check_harmonic(cfg):
    from .operators import apply_to_harmonic, sphere_laplacian

    lam = ScalarExpr.gen("l")
    c = ScalarExpr.gen("c")
    return [
        _timed(
            "harmonic eigenvalue",
            "degree-l harmonics give l(l+d-2), shifted by (d-1)^2/4 - c^2",
            lambda: {
                "weyl": apply_to_harmonic(_weyl_operator(cfg))
                - (lam * (lam + D - 2) + (D - 1) ** 2 * Fraction(1, 4) - c * c),
                "sphere laplacian": apply_to_harmonic(sphere_laplacian()) - lam * (lam + D - 2),
            },
        )
    ]


def _bft_energy(cfg):
    from .spectrum import energy_bft

    if cfg.mutate != "spectrum-shift":
        return energy_bft

    def shifted(l=None, d=None):
        e = ScalarExpr.coerce(energy_bft(l, d))
        return e + (ScalarExpr.gen("l") if l is None else ScalarExpr.coerce(l)) * Fraction(1, 2)

    return shifted


def check_spectrum(cfg):
    from .spectrum import NoSolutionError, energy_dirac, fix_c

    bft = _bft_energy(cfg)
    with stopwatch() as ms:
        residuals = {}
        try:
            c2 = ScalarExpr.coerce(fix_c(None, energy_dirac, bft))
            residuals["c^2 - (d+1)/4"] = c2 - (D + 1) * Fraction(1, 4)
            residuals["E_dirac - E_bft at fixed c"] = ScalarExpr.coerce(
                energy_dirac(None, None, c_squared=c2)
            ) - ScalarExpr.coerce(bft(None, None))
            lam = ScalarExpr.gen("l")
            residuals["d=3 spectrum - l(l+1)/2"] = ScalarExpr.coerce(
                energy_dirac(None, 3, c_squared=fix_c(3, energy_dirac, bft))
            ) - lam * (lam + 1) / 2
            for l in range(1, cfg.l_max + 1):
                gap = ScalarExpr.coerce(bft(l, 3)) - ScalarExpr.coerce(bft(l - 1, 3))
                residuals[f"d=3 gap at l={l}"] = gap - l
            error = None
        except NoSolutionError as exc:
            error = str(exc)
    if error:
        return [CheckReport("c-fix identity", "fail", error, ms[0], "no c^2 matches the two spectra")]
    return [
        from_residuals(
            "c-fix identity",
            residuals,
            "c^2 = (d+1)/4 makes the Dirac spectrum equal the BFT spectrum for all l, d",
            ms[0],
        )
    ]


def check_brst(cfg):
    from .brackets import second_class_constraints
    from .brst import (
        brst_relations,
        brst_transform,
        build_charges,
        expected_brst_rules,
    )

    constraints = None
    if cfg.mutate == "second-class-charge":
        constraints = second_class_constraints().constraints
    elif cfg.mutate == "omega2-unshifted":
        constraints = _first_class(cfg)
    charges = build_charges(constraints)
    reports = [
        _timed(
            "brst relations",
            "{Q,Q} = 0, {Q,H_m} = 0 and {{Psi,Q},Q} = 0 in the unitary gauge",
            lambda: brst_relations(charges),
        )
    ]
    with stopwatch() as ms:
        numbers = {
            "Q": charges.Q.ghost_number(),
            "Psi": charges.Psi.ghost_number(),
            "H_m": charges.H_m.ghost_number(),
        }
    ok = numbers == {"Q": 1, "Psi": -1, "H_m": 0}
    reports.append(
        CheckReport(
            "ghost numbers",
            "pass" if ok else "fail",
            None if ok else str(numbers),
            ms[0],
            "Q carries ghost number +1, Psi -1, H_m 0",
        )
    )
    reports.append(
        _timed(
            "brst transformations",
            "lam {., Q} reproduces the BRST rules for q, theta, Cbar, C and B",
            lambda: {
                f"delta_B {name}": brst_transform(name, charges) - expected
                for name, expected in expected_brst_rules().items()
            },
        )
    )
    with stopwatch() as ms:
        control = build_charges(second_class_constraints().constraints)
        qq = brst_relations(control)["{Q,Q}"]
    reports.append(
        CheckReport(
            "brst negative control",
            "fail" if qq.is_zero() else "pass",
            "{Q,Q} vanished for a second-class charge" if qq.is_zero() else None,
            ms[0],
            f"second-class constraints in Q give {{Q,Q}} = {qq}",
        )
    )
    return reports


def check_numeric(cfg):
    from .numeric import circle_checks, run_bracket_oracle

    return [run_bracket_oracle(cfg.trials, (3, 4, 5), cfg.seed)] + circle_checks(cfg.grid)


GROUPS = {
    "brackets": (check_bracket_axioms, check_dirac),
    "bft": (check_bft, check_hamiltonian),
    "weyl": (check_commutators, check_weyl, check_harmonic, check_spectrum),
    "brst": (check_brst,),
    "numeric": (check_numeric,),
}


def run_suite(cfg: CliConfig | None = None):
    """Run the checks for ``cfg.target`` in suite order; return (reports, exit code)."""
    cfg = cfg or CliConfig()
    names = list(GROUPS) if cfg.target == "all" else [cfg.target]
    reports = []
    for group in names:
        for check in GROUPS[group]:
            log.info("running %s", check.__name__)
            for report in check(cfg):
                log.debug("%s: %s", report.name, report.status)
                reports.append(report)
    code = 0 if all(r.passed for r in reports) else 1
    return reports, code


def to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, ensure_ascii=False) + "\n"


def to_markdown(reports) -> str:
    lines = ["| check | status | ms | note |", "|---|---|---:|---|"]
    for r in reports:
        note = r.residual if r.status == "fail" else r.citation
        note = (note or "").replace("|", "\\|")
        lines.append(f"| {r.name} | {r.status} | {r.elapsed_ms:.1f} | {note} |")
    passed = sum(r.status == "pass" for r in reports)
    lines.append("")
    lines.append(f"{passed}/{len(reports)} checks passed")
    return "\n".join(lines) + "\n"


def render(reports, fmt: str) -> str:
    if fmt == "json":
        return to_json(reports)
    if fmt == "md":
        return to_markdown(reports)
    raise ValueError(f"unknown format {fmt!r}")


def strip_timings(reports):
    return [replace(r, elapsed_ms=0.0) for r in reports]


__all__ = [
    "CliConfig",
    "CheckReport",
    "DEFAULT_SEED",
    "MUTATIONS",
    "TARGETS",
    "render",
    "run_suite",
    "strip_timings",
    "to_json",
    "to_markdown",
]
