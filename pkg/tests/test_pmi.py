import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmicopula.core import (CopulaModel, independence, lower_bound, m_gamma, upper_bound,
                            v_copula)
from pmicopula.errors import NoDensity, NoKernel
from pmicopula.families import (archimedean, evc, example_pickands, fgm, fgm_cubic, frank,
                                frechet, gaussian, gen_amh, gen_clayton, gen_frank,
                                marshall_olkin)
from pmicopula.pmi import (MAX_VIOLATIONS, check_all, check_pmi_density, check_pmi_kernel,
                           check_pmi_volume, check_pqd, kernel_combination,
                           probe_archimedean_conjecture)


def test_volume_criterion_on_bounds():
    assert check_pmi_volume(upper_bound(), 64).passed
    w = check_pmi_volume(lower_bound(), 64)
    assert not w.passed and w.violations
    assert check_pmi_volume(lower_bound(), 64, direction="NMI").passed
    p = check_pmi_volume(independence(), 64)
    assert p.passed and p.min_slack == pytest.approx(0.0, abs=1e-15)


def test_kernel_criterion():
    assert check_pmi_kernel(gaussian(0.5)).passed
    assert check_pmi_kernel(upper_bound()).passed
    assert not check_pmi_kernel(lower_bound()).passed
    assert check_pmi_kernel(lower_bound(), direction="nmi").passed


def test_kernel_criterion_evc_counterexample():
    C = evc(example_pickands())
    rep = check_pmi_kernel(C, u_values=[0.25], v_values=[0.3, 0.4])
    assert not rep.passed
    (viol,) = rep.violations
    assert (viol["u"], viol["v1"], viol["v2"]) == (0.25, 0.3, 0.4)
    assert viol["slack"] < 0
    assert not check_pmi_kernel(C).passed


@pytest.mark.parametrize("t", [0.99, 1.0, 1.01])
def test_kernel_criterion_evc_second_violation(t):
    # the interval exp(-1.01) <= u <= exp(-0.99) with v between exp(-2) and exp(-1.5)
    C = evc(example_pickands())
    rep = check_pmi_kernel(C, u_values=[np.exp(-t)], v_values=[np.exp(-2.0), np.exp(-1.5)])
    assert not rep.passed and rep.min_slack < -0.01


def test_kernel_criterion_marshall_olkin_counterexample():
    C = marshall_olkin(0.05, 1.0)
    rep = check_pmi_kernel(C, u_values=[0.1], v_values=[0.1, 0.15])
    assert not rep.passed
    assert rep.violations[0]["slack"] < 0
    assert not check_pmi_kernel(C).passed
    assert not check_pmi_volume(C).passed


def test_kernel_combination_is_derivative_of_e_map():
    from pmicopula.core import e_map
    C = frank(2.0)
    u, v, h = 0.2, 0.3, 1e-6
    fd = (e_map(C, u + h, v) - e_map(C, u - h, v)) / (2 * h)
    assert kernel_combination(C, u, v) == pytest.approx(fd, abs=1e-7)


def test_density_criterion():
    assert check_pmi_density(fgm(1.0)).passed
    assert check_pmi_density(frank(5.0)).passed
    assert not check_pmi_density(frank(-5.0)).passed
    assert check_pmi_density(frank(-5.0), direction="NMI").passed


def test_pqd():
    assert check_pqd(gaussian(0.5)).passed
    assert not check_pqd(frechet(0.6, 0.2)).passed
    assert check_pqd(frechet(0.6, 0.0)).passed
    assert check_pqd(gaussian(-0.5), direction="NMI").passed


def test_pmi_but_not_pqd():
    C = fgm_cubic()
    assert check_pmi_volume(C).passed
    assert check_pmi_kernel(C).passed
    assert check_pmi_density(C).passed
    assert not check_pqd(C).passed


def test_frechet_with_equal_weights_is_both():
    C = frechet(0.3, 0.3)
    assert check_pmi_volume(C).passed
    assert check_pmi_volume(C, direction="NMI").passed


@pytest.mark.parametrize("A", [independence(), m_gamma(), v_copula()], ids=["Pi", "MG", "V"])
def test_invariant_copulas_pass_both_directions(A):
    for direction in ("PMI", "NMI"):
        res = check_all(A, 100, direction=direction, pqd=False)
        assert all(r.passed for r in res.values())


@pytest.mark.parametrize("C", [gaussian(0.4), gaussian(-0.4), frank(3.0), frank(-3.0),
                               fgm(0.5), fgm(-0.5)], ids=["g+", "g-", "f+", "f-", "fgm+", "fgm-"])
def test_criteria_agree_on_smooth_families(C):
    res = check_all(C, 100, pqd=False)
    verdicts = {r.passed for r in res.values()}
    assert len(verdicts) == 1


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.95, 0.95).filter(lambda r: abs(r) > 0.05))
def test_gaussian_pmi_iff_positive(rho):
    assert check_pmi_volume(gaussian(rho), 50).passed == (rho > 0)


def test_missing_kernel_or_density():
    bare = CopulaModel("bare", (), lambda u, v: np.asarray(u) * v)
    with pytest.raises(NoKernel):
        check_pmi_kernel(bare)
    with pytest.raises(NoDensity):
        check_pmi_density(bare)
    assert set(check_all(bare, 20)) == {"volume", "pqd"}


def test_report_shape():
    rep = check_pmi_volume(lower_bound(), 100)
    assert len(rep.violations) == MAX_VIOLATIONS
    slacks = [v["slack"] for v in rep.violations]
    assert slacks == sorted(slacks) and slacks[0] == rep.min_slack
    json.dumps(rep.to_dict())
    with pytest.raises(ValueError):
        check_pmi_volume(upper_bound(), 100, direction="up")


def test_archimedean_probe_logs_and_never_raises(caplog):
    models = [archimedean(gen_clayton(2.0)), archimedean(gen_frank(-4.0)),
              archimedean(gen_amh(0.5))]
    with caplog.at_level(logging.WARNING, logger="pmicopula.pmi"):
        rows = probe_archimedean_conjecture(models, 50)
    assert [r["family"] for r in rows] == ["clayton", "frank_archimedean", "amh"]
    for r in rows:
        assert set(r) == {"family", "params", "pqd", "pmi", "agree"}
        if not r["agree"]:
            assert any(r["family"] in m for m in caplog.messages)
