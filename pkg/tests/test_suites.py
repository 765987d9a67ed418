import math

import numpy as np
import pytest

from anosovlab import suites
from anosovlab.families import FamilyParams, family_st


def test_lemma_suites(hmodel, rng):
    r21 = suites.lemma21_suite(hmodel, 500, rng)
    r22 = suites.lemma22_suite(hmodel, 500, rng)
    assert r21.passed and r21.violations == 0 and r21.worst <= 4.0
    assert r22.passed and r22.worst <= 2.0


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_lemma32_suite(dim, rng):
    rep = suites.lemma32_suite(dim, 5000, rng, chunk=1500)
    assert rep.passed and rep.checks == 5000 and rep.worst >= -1e-12


def test_lemma32_suite_rejects_dimension(rng):
    with pytest.raises(ValueError):
        suites.lemma32_suite(1, 10, rng)


def test_relator_suite(rho1, rho_st):
    assert suites.relator_suite(rho1).passed
    assert suites.relator_suite(rho_st).passed


def test_relator_suite_detects_broken_family(rho1):
    rep = family_st(rho1, FamilyParams(1.0, 0.1))
    rep.images["b2"] = rep.images["b2"].copy()
    rep.images["b2"][0, 3] += 1e-3
    assert not suites.relator_suite(rep).passed


def test_equivariance_suite(sym3, rho_st, rng):
    for rep in (sym3, rho_st):
        report = suites.equivariance_suite(rep, 150, rng)
        assert report.passed, report
        assert report.details["worst_plane"] < 1e-8


def test_conjugation_pairs_are_reduced(rho1, rng):
    for u, w in suites._conjugation_pairs(rho1.presentation, rng, 50, 3, 4):
        assert len(u * w * u.inverse()) == 2 * len(u) + len(w)


def test_transport_residual_picks_stable_route():
    g = np.diag([1e6, 1.0, 1e-6])
    v = np.array([1.0, 1.0, 1.0])
    assert suites._transport_residual(g, np.linalg.inv(g), v, g @ v) < 1e-12


def test_cor43_suite(dsum1, hmodel, rng):
    rep = suites.cor43_suite(dsum1, hmodel, rng, max_len=5)
    assert rep.passed and rep.details["n"] == 10.0


def test_thm13_suite(rho_st, hmodel):
    rep = suites.thm13_suite(rho_st, hmodel, 5)
    assert rep.passed and rep.details["upper"]["m"] >= 1


def test_cor14_suite_fails_without_log_factor(rho1, hmodel):
    rep = family_st(rho1, FamilyParams(1.0, 1.0))
    report = suites.cor14_suite(rep, hmodel, 0.5, 0, depth=5)
    assert not report.passed
    assert report.details["verdict"] == "Growing"


def test_hyperconvex_suite_requires_degree(rho1, hmodel, rng):
    with pytest.raises(ValueError):
        suites.hyperconvex_suite(rho1, hmodel, rng)


def test_report_json(rho1):
    js = suites.relator_suite(rho1).to_json()
    assert set(js) == {"suite", "pass", "checks", "violations", "skipped", "worst", "threshold", "details"}
