from __future__ import annotations

import json

import numpy as np
import pytest

from steklov_lab import reports
from steklov_lab.analytic import disk_spectrum, rectangle_spectrum
from steklov_lab.errors import InvalidArgument, NoCrossing
from steklov_lab.experiments import (
    AttachmentResult,
    ClusteredDisk,
    ConvergenceReport,
    LemmaReport,
    MonotonicityReport,
    MultiplicityResult,
    SweepReport,
    check_lemma_inequalities,
    converge_eps,
    find_h_multiplicity,
    realize_attachment,
    sweep_h,
    topology_of_attachment,
    verify_monotonicity,
)
from steklov_lab.mesh import scale

BASE = ClusteredDisk(6, 48)
RES = (4, 16)
WINDOW = (1.2, 3.3)


@pytest.fixture(scope="module")
def multiplicity(coarse_family):
    return find_h_multiplicity(None, 0.3, WINDOW, 1e-2, family=coarse_family, polish=True)


@pytest.fixture(scope="module")
def convergence():
    return converge_eps(BASE, 2.5, [0.4, 0.3], J=4, resolution=RES, base_values=disk_spectrum(5))


def test_convergence_report(convergence):
    r = convergence
    np.testing.assert_allclose(r.targets, [0, 0.789568, 1, 1, 2], atol=1e-6)
    assert len(r.eigenvalues) == 2 and all(len(v) == 5 for v in r.eigenvalues)
    assert all(np.isfinite(r.deviations))
    assert r.trend_decreasing == (r.deviations[1] < r.deviations[0])
    assert len(r.rows()) == 10


def test_convergence_deterministic(convergence):
    again = converge_eps(BASE, 2.5, [0.4, 0.3], J=4, resolution=RES, base_values=disk_spectrum(5))
    assert reports.dumps(again) == reports.dumps(convergence)


def test_convergence_rejects_unsorted_eps():
    with pytest.raises(InvalidArgument):
        converge_eps(BASE, 2.5, [0.2, 0.3], resolution=RES)


def test_sweep_two_point_grid(coarse_family):
    r = sweep_h(None, 0.3, WINDOW, grid=2, family=coarse_family)
    assert r.h == [1.2, 3.3]
    assert r.h_eps is None
    assert not any(r.crossing_flags)


def test_sweep_shape(coarse_family):
    r = sweep_h(None, 0.3, WINDOW, grid=8, family=coarse_family)
    assert r.h == sorted(r.h)
    assert all(0 <= m <= 1 for m in r.m)
    assert all(g >= 0 for g in r.gap)
    assert len(r.rows()) == 8 * len(r.eigenvalues[0])


def test_multiplicity_found_inside_window(multiplicity):
    r = multiplicity
    assert WINDOW[0] < r.h_eps < WINDOW[1]
    assert r.reached and r.rel_gap <= 1e-2
    assert r.sigma1 <= r.sigma2


def test_slack_tolerance_returns_first_grid_minimum(coarse_family):
    r = find_h_multiplicity(None, 0.3, WINDOW, tol_gap=10, grid=5, family=coarse_family)
    assert r.evaluations == 5
    assert r.reached


def test_window_below_h_star_has_no_crossing(coarse_family):
    with pytest.raises(NoCrossing):
        find_h_multiplicity(None, 0.3, (1.2, 1.6), family=coarse_family)


def test_lemmas_at_multiplicity(coarse_family, multiplicity):
    r = check_lemma_inequalities(None, 0.3, multiplicity.h_eps, at_multiplicity=True, family=coarse_family)
    assert r.sigma0_D_rect == pytest.approx(rectangle_spectrum(0.3, multiplicity.h_eps, "dirichlet", 1)[0])
    assert r.upper_holds and r.lower_holds
    assert r.sigma1_N_base <= r.sigma_eps <= r.sigma0_D_rect


def test_lemma_lower_not_judged_off_multiplicity(coarse_family):
    r = check_lemma_inequalities(None, 0.3, 2.0, family=coarse_family)
    assert r.lower_holds is None
    assert isinstance(r.upper_holds, bool)


def test_monotonicity_not_applicable_without_strip():
    r = verify_monotonicity(BASE, 0.0, WINDOW, resolution=RES)
    assert r.verdict == "NOT-APPLICABLE"
    assert r.P_glued == r.P_base


def test_monotonicity_scale_invariant():
    raw = BASE(0.3, RES[0])
    a = verify_monotonicity(raw, 0.3, WINDOW, resolution=RES)
    b = verify_monotonicity(scale(raw, 2.0), 0.3, WINDOW, resolution=RES)
    assert a.verdict == b.verdict == "PASS"
    assert b.P_glued == pytest.approx(a.P_glued, rel=1e-12)
    assert b.P_base == pytest.approx(a.P_base, rel=1e-12)
    assert b.raw_P_base == pytest.approx(a.raw_P_base, rel=1e-12)


ORIENTABLE_CASES = [
    ((True, 1, 1, True, False), AttachmentResult(True, 1, 2)),
    ((True, 1, 1, True, True), AttachmentResult(False, 3, 1)),
    ((True, 1, 3, False, False), AttachmentResult(True, 2, 2)),
    ((True, 1, 3, False, True), AttachmentResult(False, 4, 2)),
]
NON_ORIENTABLE_CASES = [
    ((False, 2, 1, True, False), AttachmentResult(False, 2, 2)),
    ((False, 2, 2, False, False), AttachmentResult(False, 3, 2)),
]


@pytest.mark.parametrize("args,expect", ORIENTABLE_CASES + NON_ORIENTABLE_CASES)
def test_topology_table(args, expect):
    assert topology_of_attachment(*args) == expect


def test_topology_validation():
    with pytest.raises(InvalidArgument):
        topology_of_attachment(True, 0, 1, same_component=False)
    with pytest.raises(InvalidArgument):
        topology_of_attachment(True, -1, 1, same_component=True)


@pytest.mark.parametrize("same,reverse", [(True, False), (True, True), (False, False), (False, True)])
def test_topology_realized_on_meshes(same, reverse):
    chk = realize_attachment(same, reverse)
    assert chk.agrees, chk
    assert chk.chi_glued == chk.chi_base - 1


def test_reports_round_trip(convergence, multiplicity, coarse_family):
    lem = check_lemma_inequalities(None, 0.3, 2.0, family=coarse_family)
    sweep = sweep_h(None, 0.3, WINDOW, grid=3, family=coarse_family)
    mono = MonotonicityReport(0.3, "PASS", 6.28, 7.0, 6.4, 0.1, 1.2, 3.3, 1.66, 1.0, 1.1, 6.28, 6.5, 1.0,
                              6.28, multiplicity)
    for cls, obj in [(ConvergenceReport, convergence), (MultiplicityResult, multiplicity),
                     (LemmaReport, lem), (SweepReport, sweep), (MonotonicityReport, mono)]:
        back = reports.from_plain(cls, json.loads(reports.dumps(obj)))
        assert back == reports.from_plain(cls, reports.to_plain(obj))
        assert reports.dumps(back) == reports.dumps(obj)
