import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ebcs import stitching as sc
from ebcs.kernel import DomainError, psi_e
from ebcs.stitching import StitchConfig, StitchState

U = math.log(2) - 0.5


def state(t, v, s=None):
    s = t / 2 if s is None else s
    return StitchState(t, s, v, 0.5 + s, (0.5 + s) / (t + 1))


def w_oracle(t, v, eta, s_exp, alpha, jarg):
    z = float(mpmath.zeta(s_exp))
    return (math.sqrt(eta) + 1) / t * math.sqrt(v * (math.log(2 / alpha) + math.log(z) + s_exp * math.log1p(jarg)))


# ------------------------------------------------------------------ zeta


def test_zeta_examples():
    assert sc.zeta(2.0) == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert sc.zeta(1.4) == pytest.approx(3.1055472779, abs=1e-10)
    assert sc.zeta(3.0) == pytest.approx(1.2020569032, abs=1e-10)
    with pytest.raises(DomainError):
        sc.zeta(1.0)


@given(st.floats(1.05, 8.0))
def test_zeta_vs_mpmath(s):
    assert abs(sc.zeta(s) - float(mpmath.zeta(s))) <= 1e-10


# ------------------------------------------------------------------ fixed xi


def test_fixed_xi_example():
    st_ = state(1000, 100.0)
    assert sc.fixed_xi_halfwidth(st_, 0.1, 0.05) == pytest.approx(0.01 + math.log(40) / 100, rel=1e-14)
    assert sc.fixed_xi_halfwidth(st_, 0.1, 0.05) == pytest.approx(0.0468888, abs=1e-7)
    assert sc.fixed_xi_halfwidth(st_, 0.1, 0.01) > sc.fixed_xi_halfwidth(st_, 0.1, 0.05)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            sc.fixed_xi_halfwidth(st_, bad, 0.05)


def test_fixed_xi_grid_minimum():
    st_ = state(1000, 100.0)
    xs = np.linspace(1e-3, 1, 200001)
    grid = min(sc.fixed_xi_halfwidth(st_, x, 0.05) for x in xs[::10])
    fine = xs[np.abs(xs - math.sqrt(math.log(40) / 100)) < 1e-3]
    grid = min(grid, min(sc.fixed_xi_halfwidth(st_, x, 0.05) for x in fine))
    assert grid == pytest.approx(2 * math.sqrt(100 * math.log(40)) / 1000, abs=1e-9)


# ------------------------------------------------------------------ stitched width


def test_stitched_example_continuous():
    cfg = StitchConfig(epoch="continuous")
    iv = sc.stitched_halfwidth(state(1000, 100.0), cfg)
    ref = w_oracle(1000, 100.0, 2.0, 1.4, 0.05, math.log2(100))
    assert iv.valid and iv.halfwidth == pytest.approx(ref, rel=1e-10)
    assert iv.halfwidth == pytest.approx(0.066860, abs=1e-6)


def test_stitched_example_floor_equals_chain():
    cfg = StitchConfig()
    iv = sc.stitched_halfwidth(state(1000, 100.0), cfg)
    assert iv.halfwidth == pytest.approx(w_oracle(1000, 100.0, 2.0, 1.4, 0.05, 6), rel=1e-10)
    assert iv.halfwidth == pytest.approx(float(sc.chain_bound(1000, 100.0, cfg)), rel=1e-13)


def test_stitched_invalid_below_l0():
    iv = sc.stitched_halfwidth(state(10, 0.5), StitchConfig())
    assert not iv.valid and (iv.lo, iv.hi) == (0.0, 1.0)
    iv = sc.stitched_halfwidth(state(10, 3.0), StitchConfig(l0=4.0))
    assert not iv.valid


def test_stitched_invalid_until_h_condition():
    # log h(0) = log zeta(1.4) ~ 1.13 > log(0.025) + V for V ~ 1
    assert not sc.stitched_width(10, 1.0, StitchConfig())[1]
    assert sc.stitched_width(10, 10.0, StitchConfig())[1]


@pytest.mark.parametrize("epoch", ["floor", "continuous"])
def test_stitched_nondecreasing_in_eta_spot(epoch):
    ws = [sc.stitched_width(1000, 100.0, StitchConfig(eta=e, epoch=epoch))[0] for e in (1.5, 2.0, 3.0)]
    assert ws[0] <= ws[1] <= ws[2]


@given(st.floats(1.0, 1e6), st.floats(1.5, 3.0), st.floats(1.5, 3.0))
def test_stitched_nondecreasing_in_eta_continuous(v, e1, e2):
    # for eta near 1 the log_eta(V) term dominates and monotonicity is lost
    lo, hi = sorted((e1, e2))
    a = sc.stitched_width(1.0, v, StitchConfig(eta=lo, epoch="continuous"))[0]
    b = sc.stitched_width(1.0, v, StitchConfig(eta=hi, epoch="continuous"))[0]
    assert a <= b + 1e-12


# ------------------------------------------------------------------ epochs


def test_epoch_schedule_j0():
    z = float(mpmath.zeta(1.4))
    xi, a = sc.epoch_schedule(StitchConfig(), 0)
    assert a == pytest.approx(0.05 / z, rel=1e-12)
    assert xi == pytest.approx(min(1.0, math.sqrt(math.log(2 / a) / 2)), rel=1e-12)
    with pytest.raises(DomainError):
        sc.epoch_schedule(StitchConfig(), -1)


def test_epoch_schedule_alpha_decreasing():
    alphas = [sc.epoch_schedule(StitchConfig(), j)[1] for j in range(50)]
    assert np.all(np.diff(alphas) < 0)
    assert all(0 < sc.epoch_schedule(StitchConfig(), j)[0] <= 1 for j in range(50))


def test_h_partial_sum_bounded():
    cfg = StitchConfig()
    j = np.arange(0, 10**6 + 1)
    assert math.fsum(np.exp(-cfg.log_h(j))) <= 1.0


def test_h_table_validation():
    cfg = StitchConfig(h_table=[2.0, 4.0, 8.0])
    assert cfg.log_h(1) == pytest.approx(math.log(4))
    assert math.isnan(cfg.log_h(5))
    for tab in ([1.5, 2.0], [4.0, 2.0], [], [0.0, 5.0]):
        with pytest.raises(DomainError):
            StitchConfig(h_table=tab)
    with pytest.raises(DomainError):
        StitchConfig(h_table=[2.0, 4.0], epoch="continuous")


def test_config_validation():
    for kw in (dict(eta=1.0), dict(s=1.0), dict(l0=0.5), dict(alpha=1.0), dict(epoch="round")):
        with pytest.raises(DomainError):
            StitchConfig(**kw)


# ------------------------------------------------------------------ invariants on streams


def test_chain_and_fixed_xi_sandwich(rng):
    cfg = StitchConfig()
    x = (rng.random(20000) < 0.5).astype(float)
    st_ = sc.new_state()
    checked = 0
    for i, xv in enumerate(x):
        st_ = sc.update(st_, float(xv))
        if i % 97 or st_.v_t < cfg.l0:
            continue
        j = int(math.floor(math.log(st_.v_t / cfg.l0, cfg.eta)))
        xi, a_j = sc.epoch_schedule(cfg, j)
        w = sc.stitched_width(st_.t, st_.v_t, cfg)[0]
        assert w >= sc.fixed_xi_halfwidth(st_, xi, a_j) - 1e-12
        assert w <= float(sc.chain_bound(st_.t, st_.v_t, cfg)) + 1e-12
        checked += 1
    assert checked > 100


def test_validity_monotone_along_streams(rng):
    cfg = StitchConfig()
    band = sc.stitched_path(rng.random((30, 3000)), cfg)
    first = np.argmax(band.valid, axis=1)
    for row, f in zip(band.valid, first):
        assert row[f:].all()


def test_stateful_matches_path(rng):
    cfg = StitchConfig()
    x = rng.random(500)
    band = sc.stitched_path(x, cfg)
    st_ = sc.new_state()
    for i, xv in enumerate(x):
        st_ = sc.update(st_, float(xv))
        iv = sc.stitched_halfwidth(st_, cfg)
        assert iv.valid == bool(band.valid[i])
        if iv.valid:
            assert iv.halfwidth == pytest.approx(band.halfwidth[i], rel=1e-12)
    assert st_.v_t == pytest.approx(band.aux["v_t"][-1], rel=1e-12)


def test_update_rejects_out_of_range():
    with pytest.raises(DomainError):
        sc.update(sc.new_state(), 1.2)
    s = sc.update(sc.new_state(), 1.0)
    assert s.v_t == pytest.approx(psi_e(0.5))


@pytest.mark.slow
def test_lil_rate_window(rng):
    # stated window [1.9, 3.5] sqrt(u) for t in [1e5, 1e6]
    cfg = StitchConfig()
    x = (rng.random((4, 10**6)) < 0.5).astype(float)
    band = sc.stitched_path(x, cfg)
    t = np.arange(1, 10**6 + 1)
    sel = t >= 10**5
    fac = band.halfwidth[:, sel] * np.sqrt(t[sel] / np.log(np.log(t[sel]))) / math.sqrt(U)
    inside = bool(np.all((fac >= 1.9) & (fac <= 3.5)))
    assert inside, f"observed factor range [{fac.min():.3f}, {fac.max():.3f}]"
