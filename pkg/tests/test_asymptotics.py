import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ebcs import asymptotics as asy
from ebcs import eb
from ebcs.kernel import DomainError, psi_e
from ebcs.streams import DistributionSpec

U = math.log(2) - 0.5

# displayed reference values: (sigma^2/2, E psi_E)
PSI_REFERENCE = {
    "Ber(0.5)": (0.125, 0.194),
    "Ber(0.1)": (0.045, 0.144),
    "Unif(0,1)": (0.042, 0.057),
    "Beta(5,2)": (0.013, 0.016),
    "Beta(10,30)": (0.002, 0.002),
}


def scipy_expected_psi(a, b):
    mu = a / (a + b)
    return stats.beta(a, b).expect(lambda x: -np.log1p(-np.abs(x - mu)) - np.abs(x - mu),
                                   points=[mu], epsabs=1e-11, limit=200)


# ------------------------------------------------------------------ E psi_E


def test_expected_psi_examples():
    assert asy.expected_psi_e(DistributionSpec("bernoulli", (0.5,))) == pytest.approx(U, abs=1e-15)
    assert asy.expected_psi_e(DistributionSpec("uniform")) == pytest.approx(0.0568528, abs=1e-7)
    assert asy.expected_psi_e(DistributionSpec("point", (0.3,))) == 0.0


def test_uniform_closed_form():
    u = 0.5
    ref = 2 * ((1 - u) * math.log(1 - u) + u - u * u / 2)
    assert asy.expected_psi_e(DistributionSpec("uniform")) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("a,b", [(5, 2), (10, 30), (0.5, 0.5), (2, 2), (0.3, 4)])
def test_beta_vs_scipy_expect(a, b):
    got = asy.expected_psi_e(DistributionSpec("beta", (a, b)))
    assert got == pytest.approx(scipy_expected_psi(a, b), abs=1e-8)


def test_psi_reference_values():
    rows = asy.psi_reference_table()
    worst = 0.0
    for name, half_var, epsi in rows:
        ref_v, ref_e = PSI_REFERENCE[name]
        worst = max(worst, abs(half_var - ref_v), abs(epsi - ref_e))
    assert worst <= 0.002, worst


def test_bounds_on_menagerie():
    dists = list(asy.PSI_REFERENCE_DISTS.values()) + [
        DistributionSpec("two_point", (0.3, 0.01)), DistributionSpec("bernoulli", (0.97,))]
    rng = np.random.default_rng(12)
    dists += [DistributionSpec("beta", (float(a), float(b))) for a, b in rng.uniform(0.2, 40, (100, 2))]
    for d in dists:
        e = asy.expected_psi_e(d)
        assert d.variance / 2 - 1e-12 <= e <= U + 1e-12


def test_c_mu_bound_on_reference_laws():
    for d in asy.PSI_REFERENCE_DISTS.values():
        assert asy.expected_psi_e(d) <= asy.psi_sigma_ratio_bound(d.mean) * d.variance + 1e-12


@settings(max_examples=30)
@given(st.floats(0.05, 0.95), st.floats(0.001, 0.04))
def test_c_mu_bound_two_point(mu, eps):
    eps = min(eps, mu / 2)
    d = asy.two_point_dist(mu, eps)
    assert asy.expected_psi_e(d) <= asy.psi_sigma_ratio_bound(mu) * d.variance + 1e-12


def test_unsupported_distribution():
    with pytest.raises(DomainError):
        asy.expected_psi_e(DistributionSpec("switch", (0.8, 0.2, 0.1)))


# ------------------------------------------------------------------ widths


def test_a_t_apx_example():
    assert asy.a_t_apx(1e6, U) == pytest.approx(math.sqrt(2 * U * math.log(1e6) / 1e6), rel=1e-14)
    assert asy.a_t_apx(1e6, 0.1931) == pytest.approx(2.3099e-3, abs=1e-7)
    with pytest.raises(DomainError):
        asy.a_t_apx(2, U)
    with pytest.raises(DomainError):
        asy.a_t_apx(10, 0.0)


def test_r_t_definition(rng):
    cfg = eb.EbConfig()
    s = eb.new_state(cfg)
    for x in (rng.random(5000) < 0.5):
        s = eb.update(s, float(x), cfg)
    r = asy.r_t(s, cfg, U)
    assert r == pytest.approx(eb.interval_apx(s, cfg).halfwidth / asy.a_t_apx(s.t, U), rel=1e-14)


def test_r_t_prediction_alpha_one():
    t, u_t = 1e6, 2e5
    pred = asy.r_t_squared_prediction(t, u_t, U, alpha=1.0)
    assert pred == pytest.approx(2 * u_t / (t * U) * 0.5, rel=1e-14)


def test_a_t_wsr_examples():
    la, lt = math.log(40), math.log(1e6)
    ref = 0.25 * math.sqrt(la * lt / 2e6) * (1 + math.log(lt))
    assert asy.a_t_wsr(1e6, 0.5, 0.05) == pytest.approx(ref, rel=1e-14)
    ref = 0.25 * math.sqrt(lt / 2e6) * (la + math.log(lt))
    assert asy.a_t_wsr(1e6, 0.5, 0.05, "noalpha") == pytest.approx(ref, rel=1e-14)
    with pytest.raises(DomainError):
        asy.a_t_wsr(15, 0.5, 0.05)


def test_wsr_over_apx_ratio_increases():
    ts = np.array([1e4, 1e5, 1e6, 1e8])
    ratio = asy.a_t_wsr(ts, 0.5, 0.05) / asy.a_t_apx(ts, U)
    assert np.all(np.diff(ratio) > 0)


def test_c_mu_and_two_point():
    assert asy.psi_sigma_ratio_bound(0.5) == pytest.approx(psi_e(0.5) / 0.25, rel=1e-14)
    assert asy.psi_sigma_ratio_bound(0.5) == pytest.approx(0.7725887, abs=1e-7)
    assert asy.two_point_dist(0.3, 0.01).mean == pytest.approx(0.3, abs=1e-16)
    for bad in (0.0, 1.0):
        with pytest.raises(DomainError):
            asy.psi_sigma_ratio_bound(bad)
    with pytest.raises(DomainError):
        asy.two_point_dist(0.3, 0.4)


def test_two_point_ratio_approaches_c_mu():
    c = asy.psi_sigma_ratio_bound(0.3)
    gaps = []
    for eps in (0.1, 0.01, 0.001):
        d = asy.two_point_dist(0.3, eps)
        gaps.append(c - asy.expected_psi_e(d) / d.variance)
    assert all(g >= 0 for g in gaps) and gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.02


# ------------------------------------------------------------------ limiting widths


def test_limiting_width_rows():
    t, lt, llt = 1e6, math.log(1e6), math.log(math.log(1e6))
    sig, al = 0.5, 0.05
    ref = {
        "apx": math.sqrt(2 * U * lt / t),
        "stch": math.sqrt(4 * U * llt / t),
        "wsr_alpha": math.sqrt(sig**2 * math.log(2 / al) * lt / (8 * t)) * llt,
        "wsr_noalpha": math.sqrt(sig**2 * lt / (8 * t)) * llt,
        "hrms": math.sqrt(2 * sig**2 * llt / t),
        "hoeff_alpha": math.sqrt(sig**2 * math.log(2 / al) * lt / (8 * t)) * llt,
        "hoeff_noalpha": math.sqrt(sig**2 * lt / (8 * t)) * llt,
        "robbins": math.sqrt(sig**2 * lt / t),
        "bern": math.sqrt(sig**2 * lt / t),
        "bern_stch": math.sqrt(2 * sig**2 * llt / t),
    }
    rows = dict(asy.limiting_width_table(t, al, sig, U))
    assert set(rows) == set(asy.METHODS) and len(rows) == 10
    for m, v in ref.items():
        assert rows[m] == pytest.approx(v, rel=1e-14)
        assert asy.LimitingWidthRow(m, alpha=al, sigma=sig, u=U).value_at(t) > 0


def test_limiting_width_missing_params():
    with pytest.raises(DomainError):
        asy.LimitingWidthRow("apx")
    with pytest.raises(DomainError):
        asy.LimitingWidthRow("wsr_alpha", sigma=0.5)
    with pytest.raises(DomainError):
        asy.LimitingWidthRow("oracle", u=0.1)
