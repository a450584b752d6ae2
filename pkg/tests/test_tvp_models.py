"""End-to-end checks of the regression and VAR Gibbs samplers.

Worked values pin the two closed-form conditionals (noise variance and
constant block), reconstruction identities pin the bookkeeping between
per-equation draws and system objects, and a replicated joint test per
prior checks that the full sweep preserves its own joint model.
"""

import math
import warnings

import numpy as np
import pytest
from scipy import linalg, stats

import tvpsparse.tvp_models as tm
from tvpsparse.dist_kernels import RngStream, _gen
from tvpsparse.errors import NumericalError, ShapeError, UsageError
from tvpsparse.savs import SparsifiedDraw
from tvpsparse.state_space import NcParamVector, StateTrajectory
from tvpsparse.tvp_models import (
    DrawRecord,
    RegressionSpec,
    VarSpec,
    fit_tvp_regression,
    fit_tvp_var,
    lagged_design,
    reconstruct_beta_path,
    reconstruct_cov_matrices,
)

from geweke import FullSamplerHarness


def _small_regression(t=60, k=2, seed=5):
    gen = _gen(RngStream(seed, 0))
    x = gen.standard_normal((t, k))
    y = x @ np.array([1.0, -0.5][:k]) + 0.4 * gen.standard_normal(t)
    return y, x


# ---------------------------------------------------------------------------
# spec validation


def test_regression_spec_validation():
    y, x = _small_regression()
    with pytest.raises(ShapeError):
        RegressionSpec(y=y[:-1], X=x)
    with pytest.raises(ShapeError):
        RegressionSpec(y=y.reshape(-1, 1), X=x)
    with pytest.raises(UsageError):
        RegressionSpec(y=y, X=x, prior="ridge")
    with pytest.raises(UsageError):
        RegressionSpec(y=y, X=x, n_draws=100, n_burn=100)
    with pytest.warns(UserWarning):
        RegressionSpec(y=y[:2], X=x[:2])


def test_var_spec_validation():
    gen = _gen(RngStream(6, 0))
    yv = gen.standard_normal((40, 2))
    with pytest.raises(ShapeError):
        VarSpec(Y=yv[:, :1])
    with pytest.raises(UsageError):
        VarSpec(Y=yv, p=0)
    with pytest.raises(UsageError):
        VarSpec(Y=yv, prior="flat")
    with pytest.warns(UserWarning):
        VarSpec(Y=yv[:8], p=3)


def test_lagged_design_layout():
    y = np.arange(10.0).reshape(5, 2)
    y_eff, x = lagged_design(y, p=2)
    assert np.array_equal(y_eff, y[2:])
    # row t carries (y_{t-1}, y_{t-2}, 1)
    assert np.array_equal(x[0], [2.0, 3.0, 0.0, 1.0, 1.0])
    assert np.array_equal(x[2], [6.0, 7.0, 4.0, 5.0, 1.0])
    _, x_nc = lagged_design(y, p=2, intercept=False)
    assert x_nc.shape == (3, 4)
    with pytest.raises(ShapeError):
        lagged_design(y, p=5)


# ---------------------------------------------------------------------------
# conditional-step worked values


def _unit_engine(monkeypatch=None):
    # T=2 intercept-only equation with the TVP block disabled, so the
    # constant block is a single scalar
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eng = tm._EquationEngine(
            np.array([1.0, 3.0]),
            np.ones((2, 1)),
            None,
            RngStream(77, 0),
            prior="flat",
            prior_hyper={},
            sparsify=False,
            sv=False,
            tvp_off=True,
            d_sigma=0.01,
            e_sigma=0.01,
        )
    return eng


def test_constant_block_conditional_worked_value(monkeypatch):
    # y=(1,3), Z=(1,1)', sigma2=1, prior variance 1: the conditional is
    # N(4/3, 1/3)
    monkeypatch.setattr(tm, "prior_variance", lambda st: np.ones(1))
    eng = _unit_engine()
    eng.sigma2 = 1.0
    za = eng.design.Z[:, :1]
    assert np.array_equal(za, np.ones((2, 1)))
    draws = np.array(
        [eng._draw_alpha(za, np.ones(2))[0] for _ in range(4000)]
    )
    se = math.sqrt(1.0 / 3.0 / 4000.0)
    assert abs(draws.mean() - 4.0 / 3.0) < 5 * se
    assert np.isclose(draws.var(), 1.0 / 3.0, rtol=0.1)
    ks = stats.kstest(draws, lambda v: stats.norm.cdf(v, 4.0 / 3.0, math.sqrt(1 / 3)))
    assert ks.pvalue > 1e-3


def test_noise_variance_conditional_parameters(monkeypatch):
    seen = {}

    def fake_inv_gamma(rng, shape, scale, size=None):
        seen["shape"], seen["scale"] = shape, scale
        return 1.0

    monkeypatch.setattr(tm, "rv_inv_gamma", fake_inv_gamma)
    eng = _unit_engine()
    eng.active_alpha = np.array([2.0])
    eng.alpha = eng._to_param_vector(eng.active_alpha)
    eng.sweep(1.0)
    # residuals (1, 1): shape 0.01 + 2/2, scale 0.01 + (1+1)/2
    assert np.isclose(seen["shape"], 1.01)
    assert np.isclose(seen["scale"], 1.01)


def test_ridge_retry_recovers_then_gives_up(monkeypatch):
    eng = _unit_engine()
    eng.sigma2 = 1.0
    real = linalg.cholesky
    state = {"calls": 0, "fail": 1}

    def flaky(arr, *args, **kwargs):
        state["calls"] += 1
        if state["calls"] <= state["fail"]:
            raise linalg.LinAlgError("forced")
        return real(arr, *args, **kwargs)

    monkeypatch.setattr(tm.linalg, "cholesky", flaky)
    out = eng._draw_alpha(eng.design.Z[:, :1], np.ones(2))
    assert np.isfinite(out).all() and state["calls"] == 2

    state["calls"], state["fail"] = 0, 99
    with pytest.raises(NumericalError):
        eng._draw_alpha(eng.design.Z[:, :1], np.ones(2))
    assert state["calls"] == 2


# ---------------------------------------------------------------------------
# path reconstruction


def _record(beta0, sqrt_v, tilde, gamma=None):
    pv = NcParamVector(beta0=beta0, sqrt_v=sqrt_v)
    states = StateTrajectory(tilde_beta=np.asarray(tilde, float))
    sp = None
    if gamma is not None:
        g = np.asarray(gamma, float)
        sp = SparsifiedDraw(gamma_bar=g, mask=(g != 0).astype(np.int8))
    return DrawRecord(alpha=pv, states=states, sigma2=1.0, sparsified=sp)


def test_reconstruct_constant_coefficient():
    rec = _record([1.0], [0.0], [[-3.0], [0.5], [9.0]])
    assert np.array_equal(reconstruct_beta_path(rec), np.ones((3, 1)))


def test_reconstruct_loading_scales_states():
    rec = _record([0.0], [2.0], [[0.0], [1.0], [2.0]])
    assert np.array_equal(reconstruct_beta_path(rec).ravel(), [0.0, 2.0, 4.0])


def test_reconstruct_prefers_sparsified_twin():
    rec = _record([1.0], [2.0], [[1.0], [2.0]], gamma=[0.0, 0.0])
    assert np.array_equal(reconstruct_beta_path(rec), np.zeros((2, 1)))
    raw = reconstruct_beta_path(rec, sparsified=False)
    assert np.array_equal(raw.ravel(), [3.0, 5.0])
    bare = _record([1.0], [2.0], [[1.0], [2.0]])
    with pytest.raises(UsageError):
        reconstruct_beta_path(bare, sparsified=True)


# ---------------------------------------------------------------------------
# regression sampler behavior


def test_regression_stream_is_deterministic():
    y, x = _small_regression()
    spec = RegressionSpec(y=y, X=x, prior="ng", n_draws=40, n_burn=20)

    def signature(seed):
        recs = list(fit_tvp_regression(spec, RngStream(seed, 0)))
        return np.array(
            [np.r_[r.alpha.concat(), r.sigma2, r.states.tilde_beta[-1]] for r in recs]
        )

    a, b, c = signature(3), signature(3), signature(4)
    assert len(a) == 20
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_regression_recovers_constant_coefficients():
    gen = _gen(RngStream(50, 0))
    t, k = 120, 3
    x = gen.standard_normal((t, k))
    beta = np.array([1.5, 0.0, -0.8])
    y = x @ beta + 0.5 * gen.standard_normal(t)
    spec = RegressionSpec(y=y, X=x, prior="dl", n_draws=500, n_burn=250)
    recs = list(fit_tvp_regression(spec, RngStream(51, 0)))
    paths = np.array([reconstruct_beta_path(r, sparsified=False) for r in recs])
    est = paths.mean(axis=(0, 1))
    assert np.all(np.abs(est - beta) < 0.25)
    sig = np.mean([r.sigma2 for r in recs])
    assert 0.1 < sig < 0.5
    pips = np.mean([r.sparsified.mask for r in recs], axis=0)
    assert pips[0] > 0.9 and pips[2] > 0.9
    assert pips[1] < 0.3


def test_regression_with_sv_records_volatility_paths():
    y, x = _small_regression(t=80)
    spec = RegressionSpec(y=y, X=x, prior="hs", n_draws=30, n_burn=15, sv=True)
    recs = list(fit_tvp_regression(spec, RngStream(8, 0)))
    rec = recs[-1]
    assert rec.sigma2 is None
    assert rec.sv is not None and rec.sv.h.shape == (80,)
    assert np.array_equal(rec.noise_variances(), np.exp(rec.sv.h))
    assert abs(rec.sv.rho) < 1.0 and rec.sv.sig_eta2 > 0.0


def test_tvp_off_pins_loadings_and_states():
    y, x = _small_regression()
    spec = RegressionSpec(
        y=y, X=x, prior="ng", n_draws=30, n_burn=10, tvp_off=True
    )
    for rec in fit_tvp_regression(spec, RngStream(13, 0)):
        assert np.array_equal(rec.alpha.sqrt_v, np.zeros(2))
        assert np.array_equal(rec.states.tilde_beta, np.zeros_like(rec.states.tilde_beta))
        path = reconstruct_beta_path(rec, sparsified=False)
        assert np.ptp(path, axis=0).max() == 0.0
        # thresholded twin keeps the loadings at exact zero as well
        assert np.array_equal(rec.sparsified.gamma_bar[2:], np.zeros(2))


def test_constant_dgp_kills_loading_and_flattens_bands():
    gen = _gen(RngStream(60, 0))
    t = 150
    x = 1.0 + gen.standard_normal((t, 1))
    y = 1.2 * x[:, 0] + 0.3 * gen.standard_normal(t)
    spec = RegressionSpec(y=y, X=x, prior="dl", n_draws=500, n_burn=250)
    recs = list(fit_tvp_regression(spec, RngStream(61, 0)))
    pips = np.mean([r.sparsified.mask for r in recs], axis=0)
    assert pips[1] < 0.5
    paths = np.array([reconstruct_beta_path(r)[:, 0] for r in recs])
    lo = np.quantile(paths, 0.05, axis=0)
    hi = np.quantile(paths, 0.95, axis=0)
    width = np.mean(hi - lo)
    assert np.ptp(lo) <= 0.1 * width
    assert np.ptp(hi) <= 0.1 * width


# ---------------------------------------------------------------------------
# VAR sampler behavior


def _var_data(t=160, seed=70):
    gen = _gen(RngStream(seed, 0))
    y1 = gen.standard_normal(t)
    # strong contemporaneous dependence pins the triangular block
    y2 = 0.9 * y1 + 0.2 * gen.standard_normal(t)
    return np.column_stack([y1, y2])


def test_var_equation_layout_and_determinism():
    yv = _var_data()
    spec = VarSpec(Y=yv, p=1, prior="ng", n_draws=30, n_burn=15, sv=False)
    sweeps = list(fit_tvp_var(spec, RngStream(71, 0)))
    assert len(sweeps) == 15 and len(sweeps[0]) == 2
    eq1, eq2 = sweeps[0]
    k = yv.shape[1] * spec.p + 1
    assert eq1.alpha.n_cov == 0 and eq1.alpha.concat().shape == (2 * k,)
    assert eq2.alpha.n_cov == 1 and eq2.alpha.concat().shape == (2 * (k + 1),)
    again = list(fit_tvp_var(spec, RngStream(71, 0)))
    assert np.array_equal(
        sweeps[-1][1].alpha.concat(), again[-1][1].alpha.concat()
    )
    assert np.array_equal(
        sweeps[-1][0].states.tilde_beta, again[-1][0].states.tilde_beta
    )


def test_var_contemporaneous_coefficient_recovery():
    yv = _var_data()
    spec = VarSpec(Y=yv, p=1, prior="ng", n_draws=300, n_burn=150, sv=False)
    u21 = [recs[1].alpha.cov0[0] for recs in fit_tvp_var(spec, RngStream(72, 0))]
    assert 0.7 < np.mean(u21) < 1.1


def test_var_triangular_identity_and_cov_reconstruction():
    yv = _var_data(t=120)
    spec = VarSpec(Y=yv, p=1, prior="dl", n_draws=20, n_burn=10, sv=True)
    y_eff, x_lag = lagged_design(yv, spec.p, spec.intercept)
    t_eff, m = y_eff.shape
    k = x_lag.shape[1]
    recs = list(fit_tvp_var(spec, RngStream(73, 0)))[-1]

    paths = [reconstruct_beta_path(r, sparsified=False) for r in recs]
    fitted = np.empty((t_eff, m))
    for i in range(m):
        w = x_lag if i == 0 else np.hstack([x_lag, y_eff[:, :i]])
        fitted[:, i] = np.sum(w * paths[i], axis=1)
    eta = y_eff - fitted

    sig = reconstruct_cov_matrices(recs)
    assert sig.shape == (t_eff, m, m)
    for t in (0, t_eff // 2, t_eff - 1):
        a = np.eye(m)
        for i in range(1, m):
            a[i, :i] = -paths[i][t, k:]
        # stacking the equation fits reproduces the system fitted mean:
        # the lag-block part is fitted minus the contemporaneous terms
        bx = fitted[t] + (a - np.eye(m)) @ y_eff[t]
        rf = linalg.solve_triangular(a, bx, lower=True, unit_diagonal=True)
        u_eta = linalg.solve_triangular(a, eta[t], lower=True, unit_diagonal=True)
        assert np.max(np.abs(y_eff[t] - rf - u_eta)) < 1e-10
        h = np.array([r.noise_variances()[t] for r in recs])
        ref = linalg.solve_triangular(a, np.diag(h), lower=True, unit_diagonal=True)
        ref = linalg.solve_triangular(a, ref.T, lower=True, unit_diagonal=True)
        assert np.allclose(sig[t], ref, rtol=1e-12, atol=1e-14)
        ev = np.linalg.eigvalsh(sig[t])
        assert np.all(ev > 0) and np.allclose(sig[t], sig[t].T)


def test_var_record_order_required_for_cov():
    yv = _var_data(t=60)
    spec = VarSpec(Y=yv, p=1, prior="ng", n_draws=6, n_burn=3, sv=False)
    recs = list(fit_tvp_var(spec, RngStream(74, 0)))[-1]
    with pytest.raises(ShapeError):
        reconstruct_cov_matrices(recs[::-1])
    with pytest.raises(UsageError):
        reconstruct_cov_matrices(recs[:1])


def test_var_benchmark_mode_is_constant_parameter():
    yv = _var_data(t=100)
    spec = VarSpec(
        Y=yv, p=1, prior="dl", n_draws=20, n_burn=10, sv=True, tvp_off=True
    )
    for recs in fit_tvp_var(spec, RngStream(75, 0)):
        for rec in recs:
            assert np.array_equal(rec.alpha.loadings, np.zeros_like(rec.alpha.loadings))
            path = reconstruct_beta_path(rec, sparsified=False)
            assert np.ptp(path, axis=0).max() == 0.0


# ---------------------------------------------------------------------------
# joint-distribution check of the complete sweep


@pytest.mark.parametrize("kind", ["dl", "ng", "lasso", "hs", "nmig", "flat"])
def test_full_sampler_preserves_joint_model(kind):
    z = FullSamplerHarness(kind).run(20000, seed=404, n_chains=25)
    assert np.all(np.isfinite(z))
    assert np.max(np.abs(z)) < 4.0
