import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from ebcs import baselines as bl
from ebcs import eb
from ebcs import matrix as mx
from ebcs.kernel import ConvergenceError, DomainError, psi_e
from ebcs.streams import matrix_generator


def rand_sym(rng, d, scale=1.0):
    a = rng.standard_normal((d, d)) * scale
    return 0.5 * (a + a.T)


def spectrum_in(rng, d, lo, hi, n=None):
    shape = (d, d) if n is None else (n, d, d)
    q, _ = np.linalg.qr(rng.standard_normal(shape))
    w = rng.uniform(lo, hi, shape[:-1])
    out = (q * w[..., None, :]) @ np.swapaxes(q, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


# ------------------------------------------------------------------ eigensolver


def test_sym_eig_examples():
    np.testing.assert_allclose(mx.sym_eig(np.eye(3)).eigenvalues, [1, 1, 1], atol=1e-15)
    np.testing.assert_allclose(mx.sym_eig(np.diag([0.2, 0.7])).eigenvalues, [0.7, 0.2], atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5, 8, 16])
def test_sym_eig_reconstruction(rng, d):
    a = rand_sym(rng, d, 3.0)
    e = mx.sym_eig(a)
    q, w = e.basis, e.eigenvalues
    assert np.max(np.abs((q * w) @ q.T - a)) <= 1e-10 * max(1, np.max(np.abs(a)))
    assert np.max(np.abs(q.T @ q - np.eye(d))) <= 1e-10
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(w, linalg.eigvalsh(a)[::-1], atol=1e-12)


@settings(max_examples=40)
@given(st.integers(1, 7), st.integers(0, 2**31), st.floats(1e-6, 1e6))
def test_sym_eig_vs_lapack(d, seed, scale):
    a = rand_sym(np.random.default_rng(seed), d, scale)
    w = mx.sym_eig(a).eigenvalues
    ref = np.linalg.eigvalsh(a)[::-1]
    assert np.max(np.abs(w - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_sym_eig_batched(rng):
    a = np.stack([rand_sym(rng, 4) for _ in range(50)])
    w = mx.sym_eig(a).eigenvalues
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[:, ::-1], atol=1e-12)


def test_sym_eig_deterministic(rng):
    a = rand_sym(rng, 6)
    e1, e2 = mx.sym_eig(a), mx.sym_eig(a.copy())
    assert np.array_equal(e1.eigenvalues, e2.eigenvalues) and np.array_equal(e1.basis, e2.basis)


def test_sym_eig_sweep_limit(rng):
    with pytest.raises(ConvergenceError):
        mx.sym_eig(rand_sym(rng, 8), max_sweeps=1)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(DomainError):
        mx.sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ------------------------------------------------------------------ spectral functions


def test_spectral_map_examples(rng):
    out = mx.psi_e_abs(np.diag([0.5, -0.5]))
    np.testing.assert_allclose(out, (math.log(2) - 0.5) * np.eye(2), atol=1e-15)
    assert out[0, 0] == pytest.approx(0.19314718, abs=1e-8)
    a = rand_sym(rng, 4)
    np.testing.assert_allclose(mx.spectral_map(a, lambda w: w), a, atol=1e-13)


def test_abs_is_psd(rng):
    for _ in range(20):
        a = rand_sym(rng, 5)
        assert np.linalg.eigvalsh(mx.spectral_map(a, np.abs)).min() >= -1e-12


def test_psi_e_abs_domain():
    with pytest.raises(DomainError):
        mx.psi_e_abs(np.diag([1.2, 0.1]))


def test_psi_e_abs_vs_scipy_funm(rng):
    a = spectrum_in(rng, 4, -0.9, 0.9)
    absa = linalg.sqrtm(a @ a).real
    ref = -linalg.logm(np.eye(4) - absa).real - absa
    np.testing.assert_allclose(mx.psi_e_abs(a), ref, atol=1e-10)


@settings(max_examples=40)
@given(st.integers(0, 2**31), st.floats(-1, 1))
def test_matrix_fan_transfer_diagonal(seed, xi):
    w = np.random.default_rng(seed).uniform(-0.99, 0.99, 4)
    a = np.diag(w)
    lhs = linalg.expm(xi * a - xi * xi * mx.psi_e_abs(a))
    gap = np.linalg.eigvalsh((np.eye(4) + xi * a) - lhs)
    assert gap.min() >= -1e-10


def test_check_observation():
    mx.check_observation(np.diag([0.0, 1.0]))
    with pytest.raises(DomainError):
        mx.check_observation(np.diag([-0.1, 0.5]))


# ------------------------------------------------------------------ closed-form bound


def test_d1_equals_scalar(rng):
    x = rng.random(100)
    cfg = eb.EbConfig()
    mcfg = mx.MatrixEbConfig(d=1)
    s, m = eb.new_state(cfg), mx.matrix_new_state(mcfg)
    for xv in x:
        s = eb.update(s, float(xv), cfg)
        m = mx.matrix_update(m, np.array([[xv]]), mcfg)
        assert m.u_t == pytest.approx(s.u_t, rel=1e-10)
        assert m.t0_reached == s.t0_reached
        b = mx.matrix_halfwidth(m, mcfg)
        assert b.halfwidth == pytest.approx(eb.interval_apx(s, cfg).halfwidth, rel=1e-10)
    band = mx.matrix_apx_path(x[:, None, None], mcfg)
    ref = eb.apx_path(x, cfg)
    np.testing.assert_allclose(band.halfwidth, ref.halfwidth, rtol=1e-10)
    np.testing.assert_array_equal(band.valid, ref.valid)


def test_update_at_predictor_keeps_v():
    cfg = mx.MatrixEbConfig(d=3)
    s = mx.matrix_update(mx.matrix_new_state(cfg), np.diag([0.2, 0.9, 0.4]), cfg)
    s2 = mx.matrix_update(s, s.predictor, cfg)
    np.testing.assert_allclose(s2.v_mat, s.v_mat, atol=1e-15)
    assert s2.u_t == pytest.approx(s.u_t, abs=1e-15)


def test_diagonal_stream_matches_per_coordinate(rng):
    cfg = mx.MatrixEbConfig(d=3)
    xs = (rng.random((200, 3)) < [0.2, 0.5, 0.9]).astype(float)
    s = mx.matrix_new_state(cfg)
    for row in xs:
        s = mx.matrix_update(s, np.diag(row), cfg)
    per = [eb.accumulate(xs[:, k], eb.EbConfig())[2][-1] for k in range(3)]
    np.testing.assert_allclose(np.diag(s.v_mat), per, rtol=1e-12)
    assert np.max(np.abs(s.v_mat - np.diag(np.diag(s.v_mat)))) == 0
    assert s.u_t == pytest.approx(8 + max(per), rel=1e-12)


def test_halfwidth_dimension_dependence():
    base = dict(t=1000, s_mat=np.zeros((1, 1)), v_mat=np.zeros((1, 1)), u_t=100.0,
                predictor_sum=np.zeros((1, 1)), predictor=np.zeros((1, 1)), t0_reached=True)
    st1 = mx.MatrixEbState(**base)
    w1 = mx.matrix_halfwidth(st1, mx.MatrixEbConfig(d=1)).halfwidth
    ell = math.log(eb.EbConfig().kz / 0.05 / (1 - math.exp(-25)))
    assert w1 == pytest.approx(0.002 * math.sqrt(100 * (ell + 0.5 * math.log(200))), rel=1e-13)
    w10 = mx.matrix_halfwidth(st1, mx.MatrixEbConfig(d=10)).halfwidth
    ref10 = 0.002 * (math.sqrt(100 * (ell + math.log(10) + 0.5 * math.log(200))))
    assert w10 == pytest.approx(ref10, rel=1e-13) and w10 > w1
    w5 = mx.matrix_halfwidth(st1, mx.MatrixEbConfig(d=5)).halfwidth
    assert w5 == pytest.approx(0.002 * math.sqrt(100 * (ell + math.log(5) + 0.5 * math.log(200))), rel=1e-13)


def test_stateful_matches_path(rng):
    cfg = mx.MatrixEbConfig(d=3)
    xs = matrix_generator(3, "rotated-beta", (2, 5), seed=1, horizon=150)
    band = mx.matrix_apx_path(xs, cfg)
    s = mx.matrix_new_state(cfg)
    for i, x in enumerate(xs):
        s = mx.matrix_update(s, x, cfg)
        b = mx.matrix_halfwidth(s, cfg)
        assert b.halfwidth == pytest.approx(band.halfwidth[i], rel=1e-10)
        assert b.valid == bool(band.valid[i])


def test_update_validates():
    cfg = mx.MatrixEbConfig(d=2)
    with pytest.raises(DomainError):
        mx.matrix_update(mx.matrix_new_state(cfg), np.eye(3), cfg)
    with pytest.raises(DomainError):
        mx.matrix_update(mx.matrix_new_state(cfg), 2 * np.eye(2), cfg)
    with pytest.raises(DomainError):
        mx.MatrixEbConfig(d=0)


@pytest.mark.slow
def test_asymptotic_width_trend():
    t_max = 10**6
    xs = matrix_generator(2, "diagonal-bernoulli", (0.5,), seed=3, horizon=t_max)
    cfg = mx.MatrixEbConfig(d=2)
    band = mx.matrix_apx_path(xs, cfg)
    m = 0.5 * np.eye(2)
    gam = float(mx.gamma_max(mx.psi_e_abs(xs[:20000] - m).mean(axis=0)))
    ratio = band.halfwidth[-1] * math.sqrt(t_max / math.log(t_max)) / math.sqrt(2 * gam)
    assert 0.8 <= ratio <= 1.2


# ------------------------------------------------------------------ Wang-Ramdas


def wr_loop(xs, alpha):
    """Straight-line Wang-Ramdas bound with numpy.linalg for the spectra."""
    d = xs.shape[-1]
    log_term = math.log(2 * d / alpha)
    eye = np.eye(d)
    sl, w_mat, sum_x, gsq = 0.0, np.zeros((d, d)), np.zeros((d, d)), 0.0
    mu_prev, vbar = 0.5 * eye, 0.25
    for t, x in enumerate(xs, start=1):
        lam = min(0.5, math.sqrt(2 * log_term / (vbar * t * math.log(1 + t))))
        r = x - mu_prev
        w_mat = w_mat + (-math.log(1 - lam) - lam) * (r @ r)
        sl += lam
        sum_x = sum_x + x
        mu_prev = (0.5 * eye + sum_x) / (t + 1)
        gsq += np.max(np.abs(np.linalg.eigvalsh(x - mu_prev))) ** 2
        vbar = (0.25 + gsq) / (t + 1)
    return (log_term + np.linalg.eigvalsh(w_mat)[-1]) / sl


def test_wr_matches_straight_line():
    xs = matrix_generator(3, "rotated-beta", (2, 5), seed=8, horizon=1000)
    band, _ = mx.wr_path(xs, mx.WangRamdasConfig(d=3))
    assert band.halfwidth[-1] == pytest.approx(wr_loop(xs, 0.05), rel=1e-12)
    cfg = mx.WangRamdasConfig(d=3)
    s = mx.wr_new_state(cfg)
    for x in xs:
        s = mx.wr_update(s, x, cfg)
    assert mx.wr_halfwidth(s, cfg).halfwidth == pytest.approx(band.halfwidth[-1], rel=1e-12)


def test_wr_d1_equals_scalar_wsr(rng):
    x = rng.random(500)
    band, wmean = mx.wr_path(x[:, None, None], mx.WangRamdasConfig(d=1))
    ref = bl.wsr_path(x, bl.WsrConfig())
    np.testing.assert_allclose(band.halfwidth, ref.halfwidth, rtol=1e-12)
    np.testing.assert_allclose(wmean[:, 0, 0], ref.center, rtol=1e-12)


def test_wr_constant_stream():
    xs = np.broadcast_to(0.5 * np.eye(2), (100, 2, 2)).copy()
    _, wmean = mx.wr_path(xs, mx.WangRamdasConfig(d=2))
    dev = mx.gamma_max(wmean[-1] - 0.5 * np.eye(2))
    assert abs(dev) <= 1e-15


def test_wr_lambda_range():
    cfg = mx.WangRamdasConfig(d=2)
    with pytest.raises(DomainError):
        mx.wr_update(mx.wr_new_state(cfg), np.eye(2) * 0.5, cfg, lam=1.0)
    s = mx.wr_update(mx.wr_new_state(cfg), np.eye(2) * 0.5, cfg, lam=0.3)
    assert s.sum_lambda == 0.3
