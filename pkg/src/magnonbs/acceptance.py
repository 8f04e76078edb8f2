"""Release gate: one check per headline claim, with stated tolerances.

Each criterion function returns a CriterionResult carrying the measured
values, the tolerance it was held to, and a pass flag.  `run_all` executes
the suite in order, reusing the storage-sweep curves between the
conservation and figure criteria so the whole gate stays inside its time
budget.  The pytest wrapper and the command-line `accept` subcommand both
call into this module, so the numbers printed in either place are the same.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import SplitterMatrix
from .fock_oracle import (
    g2_from_distribution,
    network_from_splitter,
    output_distribution,
    two_photon_input,
)
from .scenarios import (
    DETUNED_MIXING,
    FIG2_OD150,
    FIG2_OD30,
    Fig2Curve,
    Fig2Params,
    RESONANT_MIXING,
    fig2_curve,
    fig4_grid,
    ideal_cascade_g3,
    triangle_check,
)
from .splitter import fold_phase, phi_rt_analytic, tau_from_fwhm
from .stats import classical_bounds, g2_formula, g3_formula


@dataclass(frozen=True)
class CriterionResult:
    number: int
    label: str
    passed: bool
    details: str
    runtime: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] criterion {self.number}: {self.label} "
            f"({self.runtime:.1f}s) -- {self.details}"
        )


def _result(number, label, passed, details, t0) -> CriterionResult:
    return CriterionResult(
        number=number,
        label=label,
        passed=bool(passed),
        details=details,
        runtime=time.time() - t0,
    )


def criterion_1() -> CriterionResult:
    """Balanced lossless splitter with full overlap: exact coincidence dip."""
    t0 = time.time()
    root = math.sqrt(0.5)
    b = SplitterMatrix(t1=root, r1=1j * root, t2=root, r2=1j * root)
    dist = output_distribution(network_from_splitter(b), two_photon_input(1.0))
    p11 = dist.get((1, 1), 0.0)
    g2 = g2_formula(1.0, math.pi)
    ok = p11 <= 1e-9 and abs(g2) <= 1e-9
    return _result(
        1,
        "coincidence dip at the Hermitian balanced splitter",
        ok,
        f"P(1,1)={p11:.3e} (tol 1e-9), g2(I=1,phi=pi)={g2:.3e} (tol 1e-9)",
        t0,
    )


def criterion_2() -> CriterionResult:
    """Fermionized statistics at the published splitting magnitudes."""
    t0 = time.time()
    b = SplitterMatrix(
        t1=math.sqrt(0.15),
        r1=math.sqrt(0.20),
        t2=math.sqrt(0.26),
        r2=math.sqrt(0.22),
    )
    dist = output_distribution(network_from_splitter(b), two_photon_input(1.0))
    g2 = g2_from_distribution(dist, b.matrix)
    ok = abs(g2 - 2.0) <= 1e-6
    return _result(
        2,
        "antibunched pair at the zero-phase lossy splitter",
        ok,
        f"g2={g2:.9f} vs 2 (tol 1e-6)",
        t0,
    )


def criterion_3() -> CriterionResult:
    """Closed-form pair correlation at the published overlap values."""
    t0 = time.time()
    cases = (
        (0.75, 0.0, 1.75),
        (0.71, 0.0, 1.71),
        (0.60, math.pi, 0.40),
    )
    devs = []
    for i_val, phi, expected in cases:
        devs.append(abs(g2_formula(i_val, phi) - expected))
    ok = all(d <= 0.01 for d in devs)
    detail = ", ".join(
        f"g2({i_val},{phi:.2f})={g2_formula(i_val, phi):.4f} vs {exp}"
        for (i_val, phi, exp) in cases
    )
    return _result(
        3,
        "pair correlation formula at published overlaps",
        ok,
        detail + " (tol 0.01)",
        t0,
    )


# Shared control amplitude for the analytic-phase operating points.  The
# value is calibrated so the resonant point lands exactly on zero phase;
# gamma31 = 2pi x 3 MHz converts the published detunings to internal units.
PHASE_CAL_RABI = 34.25
PHASE_FWHM = 1.8847
PHASE_POINTS = ((30.0, 0.0), (66.0, 10.0), (100.0, 20.0))
PHASE_TARGETS = (0.0, math.pi / 2, math.pi)


def _phase_distance(phi: float, target: float) -> float:
    return min(
        abs(phi - target),
        abs(phi - target - 2 * math.pi),
        abs(phi - target + 2 * math.pi),
    )


def criterion_4() -> CriterionResult:
    """Analytic round-trip phase at the three published operating points.

    The three values must land near {0, pi/2, pi} with one shared control
    amplitude.  The detuning sweep connecting them winds through many
    turns at any amplitude strong enough to zero the resonant point, so
    global monotonicity is unattainable under the reconstructed
    convention; per the stated fallback the sweep must instead be
    continuous, cover the [0, pi] range on a monotone folded segment, and
    report the offsets, which is what this check verifies.
    """
    t0 = time.time()
    tau = tau_from_fwhm(PHASE_FWHM)
    phis = [
        phi_rt_analytic(PHASE_CAL_RABI, delta, od, tau)
        for od, delta in PHASE_POINTS
    ]
    dists = [_phase_distance(p, t) for p, t in zip(phis, PHASE_TARGETS)]
    triples_ok = all(d <= 0.3 for d in dists)

    # Continuity: the maximum step along the fixed-depth detuning sweep
    # must shrink in proportion to the grid refinement.
    steps = []
    for n in (2001, 8001):
        ds = np.linspace(0.0, 20.0, n)
        un = np.unwrap(
            [phi_rt_analytic(PHASE_CAL_RABI, d, 100.0, tau) for d in ds],
            period=2 * math.pi,
        )
        steps.append(float(np.abs(np.diff(un)).max()))
    continuous = steps[1] <= 0.5 * steps[0]

    monotone = bool(np.all(np.diff(un) < 1e-9) or np.all(np.diff(un) > -1e-9))

    # Folded coverage: some monotone segment of the folded curve must span
    # [0, pi] (existence plus endpoints reported).
    ds = np.linspace(0.0, 20.0, 32001)
    folded = np.array(
        [
            fold_phase(phi_rt_analytic(PHASE_CAL_RABI, d, 100.0, tau))
            for d in ds
        ]
    )
    signs = np.sign(np.diff(folded))
    coverage = None
    start = 0
    for i in range(1, len(signs) + 1):
        if i == len(signs) or signs[i] != signs[start]:
            lo = folded[start : i + 1].min()
            hi = folded[start : i + 1].max()
            if lo < 0.05 and hi > math.pi - 0.05:
                coverage = (float(ds[start]), float(ds[i]))
                break
            start = i
    covered = coverage is not None

    ok = triples_ok and continuous and (monotone or covered)
    phi_txt = ", ".join(
        f"phi({od:g},{d:g})={p:.4f} (off {q:.3f})"
        for (od, d), p, q in zip(PHASE_POINTS, phis, dists)
    )
    detail = (
        f"{phi_txt}; targets 0/pi2/pi tol 0.3; continuity steps "
        f"{steps[0]:.3f}->{steps[1]:.3f}; global monotone={monotone}, "
        f"folded monotone cover segment={coverage}"
    )
    return _result(4, "analytic phase at published operating points", ok, detail, t0)


def _triangle_pair() -> tuple:
    return tuple(
        triangle_check(s) for s in (RESONANT_MIXING, DETUNED_MIXING)
    )


def criterion_5(checks: tuple | None = None) -> CriterionResult:
    """Solver-extracted splitters close the oracle/formula triangle."""
    t0 = time.time()
    if checks is None:
        checks = _triangle_pair()
    parts = []
    ok = True
    for tc in checks:
        rel = tc.deviation / abs(tc.g2_formula)
        ok = ok and rel <= 0.02
        parts.append(
            f"{tc.label}: oracle {tc.g2_oracle:.5f} vs formula "
            f"{tc.g2_formula:.5f} ({100 * rel:.3f}%, I={tc.overlap:.3f}, "
            f"phi={tc.phi_rt:.3f})"
        )
    return _result(
        5,
        "solver/oracle/formula triangle within 2%",
        ok,
        "; ".join(parts),
        t0,
    )


def criterion_6() -> CriterionResult:
    """Three-particle cascade value, factorization, classical threshold."""
    t0 = time.time()
    g3 = ideal_cascade_g3()
    value_ok = abs(g3 - 4.0) <= 1e-6

    d1, d2, grid = fig4_grid(n=5)
    worst = 0.0
    from .stats import OverlapEnvelope
    from .core import PulseEnvelope

    env = OverlapEnvelope.from_pulse(
        PulseEnvelope(fwhm=1.5, t_center=0.0), i_peak=1.0
    )
    for i, a in enumerate(d1):
        for j, b in enumerate(d2):
            expected = g3_formula(env(a), env(b))
            worst = max(worst, abs(grid[i, j] - expected))
    grid_ok = worst <= 1e-9

    threshold = classical_bounds().g3_max
    threshold_ok = abs(threshold - 2.25) < 1e-12
    ok = value_ok and grid_ok and threshold_ok
    return _result(
        6,
        "three-particle cascade and factorization",
        ok,
        f"ideal g3={g3:.9f} vs 4 (tol 1e-6); 5x5 factorization worst "
        f"dev={worst:.2e} (tol 1e-9); classical threshold={threshold}",
        t0,
    )


def _halved(params: Fig2Params, rabi_s: float) -> Fig2Params:
    return Fig2Params(
        od=params.od,
        rabi_bs=params.rabi_bs,
        ref_rabi_s=params.ref_rabi_s,
        rabi_s_grid=(rabi_s,),
        n_z=params.n_z // 2,
        probe_center=params.probe_center,
        t_end=params.t_end,
    )


def criterion_7(
    curves: dict[float, Fig2Curve] | None = None,
    checks: tuple | None = None,
) -> CriterionResult:
    """Excitation bookkeeping and grid convergence on figure scenarios."""
    t0 = time.time()
    if curves is None:
        curves = {30.0: fig2_curve(FIG2_OD30), 150.0: fig2_curve(FIG2_OD150)}
    if checks is None:
        checks = _triangle_pair()

    residuals = {
        f"od={od:g}": curve.max_residual for od, curve in curves.items()
    }
    for tc in checks:
        residuals[tc.label] = tc.residual
    worst_resid = max(residuals.values())
    book_ok = worst_resid <= 1e-4

    rel_changes = []
    for params in (FIG2_OD30, FIG2_OD150):
        fine = curves[params.od]
        opt = fine.optimum()
        coarse = fig2_curve(_halved(params, opt.rabi_s)).rows[0]
        rel_changes.append(
            abs(coarse.efficiency - opt.efficiency) / opt.efficiency
        )
        rel_changes.append(
            abs(coarse.visibility - opt.visibility) / opt.visibility
        )
    conv_ok = all(r <= 1e-3 for r in rel_changes)

    ok = book_ok and conv_ok
    return _result(
        7,
        "conservation and grid convergence",
        ok,
        f"worst bookkeeping residual={worst_resid:.2e} (tol 1e-4); "
        f"grid-halving rel changes={['%.2e' % r for r in rel_changes]} "
        f"(tol 1e-3)",
        t0,
    )


def criterion_8(
    curves: dict[float, Fig2Curve] | None = None,
) -> CriterionResult:
    """Storage-drive sweep shape and the depth ordering of the optima."""
    t0 = time.time()
    if curves is None:
        curves = {30.0: fig2_curve(FIG2_OD30), 150.0: fig2_curve(FIG2_OD150)}
    low, high = curves[30.0], curves[150.0]
    uni_low = low.is_unimodal()
    uni_high = high.is_unimodal()
    eff_low = low.efficiency_optimum().efficiency
    eff_high = high.efficiency_optimum().efficiency
    ordered = eff_high > eff_low
    ok = uni_low and uni_high and ordered
    return _result(
        8,
        "storage-drive sweep shape and optimum ordering",
        ok,
        f"od=30 unimodal={uni_low} (peak g2="
        f"{low.optimum().g2:.4f} at {low.optimum().rabi_s:g}); "
        f"od=150 unimodal={uni_high} (peak g2="
        f"{high.optimum().g2:.4f} at {high.optimum().rabi_s:g}); "
        f"efficiency optimum {eff_high:.4f} > {eff_low:.4f}: {ordered}",
        t0,
    )


def run_all() -> list[CriterionResult]:
    checks = _triangle_pair()
    curves = {30.0: fig2_curve(FIG2_OD30), 150.0: fig2_curve(FIG2_OD150)}
    return [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(checks),
        criterion_6(),
        criterion_7(curves, checks),
        criterion_8(curves),
    ]


def format_report(results: list[CriterionResult]) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)
