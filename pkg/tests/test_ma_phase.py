"""MA-phase rate functionals and the default source strategy."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import twrelay as tw
from twrelay.ma_phase import _best_response, logdet_identity_plus, rate_ma

from conftest import random_instance, random_psd


def _scalar_channels(h1, h2, n_r):
    return tw.ChannelSet(
        h1r=np.asarray(h1, complex).reshape(n_r, -1),
        h2r=np.asarray(h2, complex).reshape(n_r, -1),
        hr1=np.ones((1, n_r), complex),
        hr2=np.ones((1, n_r), complex),
    )


def test_rate_ma_zero_covariances():
    ch = _scalar_channels([1.0], [1.0], 1)
    assert rate_ma(np.zeros((1, 1)), np.zeros((1, 1)), ch, 1.0) == 0.0


def test_rate_ma_scalar():
    ch = _scalar_channels([1.0], [1.0], 1)
    assert_allclose(rate_ma([[1.0]], [[0.0]], ch, 1.0), np.log(2.0), rtol=1e-14)


def test_rate_bar_scalar():
    ch = _scalar_channels([2.0], [1.0], 1)
    assert_allclose(tw.rate_bar(1, [[1.0]], ch, 1.0), np.log(5.0), rtol=1e-14)


def test_rate_bar_zero():
    ch = _scalar_channels([2.0], [1.0], 1)
    assert tw.rate_bar(2, [[0.0]], ch, 1.0) == 0.0


def test_rate_ma_matches_eigenvalue_oracle(rng):
    for _ in range(30):
        n1, n2, n_r = (int(v) for v in rng.integers(1, 4, size=3))
        cfg = tw.SystemConfig(n1=n1, n2=n2, n_r=n_r, seed=int(rng.integers(1e6)))
        ch = tw.generate_channels(cfg, 0)
        d1 = random_psd(rng, n1, float(rng.uniform(0.1, 3.0)))
        d2 = random_psd(rng, n2, float(rng.uniform(0.1, 3.0)))
        inner = (ch.h1r @ d1 @ ch.h1r.conj().T + ch.h2r @ d2 @ ch.h2r.conj().T) / cfg.sigmar_sq
        oracle = float(np.sum(np.log1p(np.clip(np.linalg.eigvalsh(inner), 0.0, None))))
        assert abs(rate_ma(d1, d2, ch, cfg.sigmar_sq) - oracle) < 1e-10


def test_rate_bar_coincides_with_rate_ma_one_sided(rng):
    for _ in range(10):
        _, ch, _, _ = random_instance(rng)
        n1 = ch.h1r.shape[1]
        d1 = random_psd(rng, n1, 1.0)
        zero2 = np.zeros((ch.h2r.shape[1],) * 2)
        a = tw.rate_bar(1, d1, ch, 1.0)
        b = rate_ma(d1, zero2, ch, 1.0)
        assert abs(a - b) < 1e-12


def test_non_psd_rejected():
    ch = _scalar_channels([1.0], [1.0], 1)
    with pytest.raises(tw.NonPSDError):
        rate_ma([[-1.0]], [[0.0]], ch, 1.0)


def test_logdet_matches_slogdet(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        s = random_psd(rng, n, float(rng.uniform(0.5, 10.0)))
        _, ref = np.linalg.slogdet(np.eye(n) + s)
        assert abs(logdet_identity_plus(s) - ref) < 1e-10


# --- max_ma_strategy ------------------------------------------------------


def test_orthogonal_single_antenna_users():
    ch = tw.ChannelSet(
        h1r=np.array([[1.0], [0.0]], complex),
        h2r=np.array([[0.0], [1.0]], complex),
        hr1=np.ones((1, 2), complex),
        hr2=np.ones((1, 2), complex),
    )
    cfg = tw.SystemConfig(n1=1, n2=1, n_r=2, p1_max=1.0, p2_max=1.0)
    st = tw.max_ma_strategy(ch, cfg)
    assert_allclose(st.d1, [[1.0]], atol=1e-12)
    assert_allclose(st.d2, [[1.0]], atol=1e-12)
    assert_allclose(st.r_ma, 2.0 * np.log(2.0), rtol=1e-12)


def test_degenerate_second_user():
    ch = tw.ChannelSet(
        h1r=np.array([[1.0], [0.0]], complex),
        h2r=np.zeros((2, 1), complex),
        hr1=np.ones((1, 2), complex),
        hr2=np.ones((1, 2), complex),
    )
    cfg = tw.SystemConfig(n1=1, n2=1, n_r=2, p1_max=2.0, p2_max=1.0)
    st = tw.max_ma_strategy(ch, cfg)
    # User 1 sees a clean channel: plain single-user water-filling.
    assert_allclose(st.d1, [[2.0]], atol=1e-12)
    assert_allclose(st.r_ma, st.r_bar_1r, rtol=1e-12)
    assert st.r_bar_2r == 0.0
    assert_allclose(np.trace(st.d2).real, 1.0, rtol=1e-12)


def test_full_budgets_spent(rng):
    for _ in range(10):
        cfg, _, _, st = random_instance(rng)
        assert abs(np.trace(st.d1).real - cfg.p1_max) < 1e-9
        assert abs(np.trace(st.d2).real - cfg.p2_max) < 1e-9
        assert min(np.linalg.eigvalsh(st.d1).min(), np.linalg.eigvalsh(st.d2).min()) > -1e-10


def test_strategy_rates_self_consistent(rng):
    for _ in range(10):
        cfg, ch, _, st = random_instance(rng)
        assert abs(st.r_ma - rate_ma(st.d1, st.d2, ch, cfg.sigmar_sq)) < 1e-9
        assert abs(st.r_bar_1r - tw.rate_bar(1, st.d1, ch, cfg.sigmar_sq)) < 1e-9
        assert st.r_ma < st.r_bar_1r + st.r_bar_2r - 1e-12


def test_sweeps_monotone_and_fixed_point(rng):
    for _ in range(8):
        cfg, ch, _, _ = random_instance(rng)
        sig = cfg.sigmar_sq
        d1 = np.zeros((cfg.n1, cfg.n1), complex)
        d2 = np.zeros((cfg.n2, cfg.n2), complex)
        prev = 0.0
        for _sweep in range(200):
            d1 = _best_response(ch.h1r, ch.h2r @ d2 @ ch.h2r.conj().T, cfg.p1_max, sig)
            d2 = _best_response(ch.h2r, ch.h1r @ d1 @ ch.h1r.conj().T, cfg.p2_max, sig)
            cur = rate_ma(d1, d2, ch, sig)
            assert cur >= prev - 1e-12
            if cur - prev < 1e-12:
                break
            prev = cur
        # Best-response fixed point: neither unilateral update helps.
        r1 = _best_response(ch.h1r, ch.h2r @ d2 @ ch.h2r.conj().T, cfg.p1_max, sig)
        r2 = _best_response(ch.h2r, ch.h1r @ d1 @ ch.h1r.conj().T, cfg.p2_max, sig)
        assert rate_ma(r1, d2, ch, sig) - cur < 1e-6
        assert rate_ma(d1, r2, ch, sig) - cur < 1e-6


# --- independent ascent oracle ---------------------------------------------


def _project_trace_cap(d, p):
    """Nearest PSD matrix with trace at most p (Frobenius projection)."""
    d = 0.5 * (d + d.conj().T)
    w, v = np.linalg.eigh(d)
    w = np.maximum(w, 0.0)
    if w.sum() > p:
        u = np.sort(w)[::-1]
        css = np.cumsum(u)
        k = np.arange(1, w.size + 1)
        rho = np.nonzero(u - (css - p) / k > 0)[0].max()
        w = np.maximum(w - (css[rho] - p) / (rho + 1), 0.0)
    return (v * w) @ v.conj().T


def _ascent_oracle(channels, cfg, iters=4000):
    """Projected gradient ascent with backtracking on the concave sum rate."""
    sig = cfg.sigmar_sq
    h1, h2 = channels.h1r, channels.h2r
    n_r = h1.shape[0]
    d1 = (cfg.p1_max / h1.shape[1]) * np.eye(h1.shape[1], dtype=complex)
    d2 = (cfg.p2_max / h2.shape[1]) * np.eye(h2.shape[1], dtype=complex)
    cur = rate_ma(d1, d2, channels, sig)
    step = 1.0
    for t in range(iters):
        m = np.eye(n_r) + (h1 @ d1 @ h1.conj().T + h2 @ d2 @ h2.conj().T) / sig
        minv = np.linalg.inv(m)
        g1 = h1.conj().T @ minv @ h1 / sig
        g2 = h2.conj().T @ minv @ h2 / sig
        while step > 1e-12:
            c1 = _project_trace_cap(d1 + step * g1, cfg.p1_max)
            c2 = _project_trace_cap(d2 + step * g2, cfg.p2_max)
            val = rate_ma(c1, c2, channels, sig)
            if val >= cur - 1e-15:
                break
            step *= 0.5
        d1, d2, prev, cur = c1, c2, cur, val
        step = min(step * 2.0, 1e3)
        if t > 50 and cur - prev < 1e-14:
            break
    return cur


def test_matches_projected_ascent_oracle(rng):
    for _ in range(5):
        cfg = tw.SystemConfig(
            n1=int(rng.integers(1, 3)),
            n2=int(rng.integers(1, 3)),
            n_r=2,
            p1_max=float(rng.uniform(0.5, 3.0)),
            p2_max=float(rng.uniform(0.5, 3.0)),
            seed=int(rng.integers(1e6)),
        )
        ch = tw.generate_channels(cfg, 0)
        st = tw.max_ma_strategy(ch, cfg)
        assert abs(st.r_ma - _ascent_oracle(ch, cfg)) < 1e-6
