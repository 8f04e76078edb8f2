"""Release gate: every headline criterion, one pass/fail line each.

The storage sweeps behind criteria 7 and 8 dominate the runtime, so the
curves and the mixing-point runs are computed once per session and shared.
Run with `-s` to see the per-criterion lines as they complete.
"""

import pytest

from magnonbs.acceptance import (
    _triangle_pair,
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
)
from magnonbs.scenarios import FIG2_OD150, FIG2_OD30, fig2_curve


@pytest.fixture(scope="session")
def fig2_curves():
    return {
        30.0: fig2_curve(FIG2_OD30),
        150.0: fig2_curve(FIG2_OD150),
    }


@pytest.fixture(scope="session")
def mixing_checks():
    return _triangle_pair()


def _report(result):
    print()
    print(result.line())
    assert result.passed, result.details


def test_criterion_1_coincidence_dip():
    _report(criterion_1())


def test_criterion_2_fermionized_coincidences():
    _report(criterion_2())


def test_criterion_3_pair_statistics_formula():
    _report(criterion_3())


def test_criterion_4_phase_operating_points():
    _report(criterion_4())


def test_criterion_5_triangle_consistency(mixing_checks):
    _report(criterion_5(checks=mixing_checks))


def test_criterion_6_triple_correlations():
    _report(criterion_6())


def test_criterion_7_conservation_and_grid(fig2_curves, mixing_checks):
    _report(criterion_7(curves=fig2_curves, checks=mixing_checks))


def test_criterion_8_efficiency_optimum(fig2_curves):
    _report(criterion_8(curves=fig2_curves))
