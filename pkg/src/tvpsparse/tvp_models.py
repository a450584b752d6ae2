"""Gibbs samplers for TVP regressions and equation-wise TVP-VARs.

One sweep cycles through four blocks: the standardized state history
via the simulation smoother, the noise variance (inverted Gamma, or a
full volatility sweep when ``sv`` is on), the constant parameter block
from its Gaussian conditional, and the shrinkage-prior hierarchy. With
``sparsify`` set, every stored draw also carries its thresholded twin.

VARs are estimated one equation at a time after triangularization:
equation i regresses y_it on the shared lag block plus y_{1t..i-1,t},
so the per-equation noise terms are independent and the equations can
run on separate random streams.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np
from scipy import linalg

from .dist_kernels import RngStream, _gen, rv_inv_gamma
from .errors import NumericalError, ShapeError, UsageError
from .savs import SparsifiedDraw, savs_sparsify
from .shrinkage_priors import neutral_prior_state, prior_variance, update_prior
from .state_space import NcParamVector, StateTrajectory, build_design, ffbs
from .stochvol import SvState, sv_sweep

PRIOR_KINDS = ("dl", "ng", "lasso", "hs", "nmig", "flat")
# flat is regression-only: with dozens of unshrunk coefficients per
# equation it is numerically legal but statistically useless, so the
# VAR entry point refuses it outright
VAR_PRIOR_KINDS = ("dl", "ng", "lasso", "hs", "nmig")
RIDGE = 1e-8


@dataclass
class RegressionSpec:
    """Data and sampler settings for a single TVP regression."""

    y: np.ndarray
    X: np.ndarray
    prior: str = "dl"
    prior_hyper: dict = field(default_factory=dict)
    n_draws: int = 30000
    n_burn: int = 15000
    sparsify: bool = True
    sv: bool = False
    tvp_off: bool = False
    d_sigma: float = 0.01
    e_sigma: float = 0.01

    def __post_init__(self):
        self.y = np.asarray(self.y, float)
        self.X = np.asarray(self.X, float)
        if self.y.ndim != 1 or self.X.ndim != 2:
            raise ShapeError("need y of shape (T,) and X of shape (T, K)")
        if self.y.shape[0] != self.X.shape[0]:
            raise ShapeError("y and X disagree on T")
        if self.prior not in PRIOR_KINDS:
            raise UsageError(f"unknown prior {self.prior!r}")
        if not 0 <= self.n_burn < self.n_draws:
            raise UsageError("need 0 <= n_burn < n_draws")
        if self.y.shape[0] <= self.X.shape[1]:
            warnings.warn(
                "T <= K: the likelihood alone cannot pin down the "
                "constant block, results lean on the prior",
                stacklevel=2,
            )

    @property
    def t(self) -> int:
        return self.y.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass
class VarSpec:
    """Data and sampler settings for a TVP-VAR fit equation by equation."""

    Y: np.ndarray
    p: int = 2
    intercept: bool = True
    prior: str = "dl"
    prior_hyper: dict = field(default_factory=dict)
    n_draws: int = 30000
    n_burn: int = 15000
    sparsify: bool = True
    sv: bool = True
    tvp_off: bool = False
    d_sigma: float = 0.01
    e_sigma: float = 0.01

    def __post_init__(self):
        self.Y = np.asarray(self.Y, float)
        if self.Y.ndim != 2 or self.Y.shape[1] < 2:
            raise ShapeError("need Y of shape (T, M) with M >= 2")
        if self.p < 1:
            raise UsageError("lag order must be at least 1")
        if self.prior not in VAR_PRIOR_KINDS:
            raise UsageError(f"prior {self.prior!r} is not available for VARs")
        if not 0 <= self.n_burn < self.n_draws:
            raise UsageError("need 0 <= n_burn < n_draws")
        k = self.Y.shape[1] * self.p + int(self.intercept)
        if self.Y.shape[0] - self.p <= k:
            warnings.warn(
                "effective T <= per-equation regressor count, results "
                "lean on the prior",
                stacklevel=2,
            )

    @property
    def m(self) -> int:
        return self.Y.shape[1]

    def design_arrays(self):
        """Effective sample and shared lag design (lags first, then 1)."""
        return lagged_design(self.Y, self.p, self.intercept)


def lagged_design(Y: np.ndarray, p: int, intercept: bool = True):
    """Drop the first p rows and stack [y_{t-1}, ..., y_{t-p}, 1]."""
    Y = np.asarray(Y, float)
    t = Y.shape[0]
    if t <= p:
        raise ShapeError("sample shorter than the lag order")
    blocks = [Y[p - l : t - l] for l in range(1, p + 1)]
    if intercept:
        blocks.append(np.ones((t - p, 1)))
    return Y[p:], np.hstack(blocks)


@dataclass
class DrawRecord:
    """One stored sweep: parameters, states, variances, optional twin."""

    alpha: NcParamVector
    states: StateTrajectory
    sigma2: Optional[float] = None
    sv: Optional[SvState] = None
    sparsified: Optional[SparsifiedDraw] = None
    beta_path: Optional[np.ndarray] = None

    def noise_variances(self) -> np.ndarray:
        """Measurement-error variance at every t of this draw."""
        t = self.states.tilde_beta.shape[0]
        if self.sv is not None:
            return self.sv.variances()
        return np.full(t, self.sigma2)


class _EquationEngine:
    """Mutable sampler state of one equation, advanced sweep by sweep."""

    def __init__(
        self,
        y: np.ndarray,
        X: np.ndarray,
        contemp: Optional[np.ndarray],
        rng: RngStream,
        prior: str,
        prior_hyper: dict,
        sparsify: bool,
        sv: bool,
        tvp_off: bool,
        d_sigma: float,
        e_sigma: float,
    ):
        self.y = np.asarray(y, float)
        self.X = np.asarray(X, float)
        self.contemp = None if contemp is None else np.asarray(contemp, float)
        self.rng = rng
        self.sparsify = sparsify
        self.tvp_off = tvp_off
        self.d_sigma = d_sigma
        self.e_sigma = e_sigma

        self.t = self.y.shape[0]
        self.k = self.X.shape[1]
        self.n_cov = 0 if self.contemp is None else self.contemp.shape[1]
        self.kw = self.k + self.n_cov
        self.n_active = self.kw if tvp_off else 2 * self.kw

        # a neutral deterministic start, not a prior draw: diffuse
        # hyperpriors produce denormal global scales that a sweep
        # cannot recover from (see neutral_prior_state)
        self.prior_state = neutral_prior_state(
            prior, self.n_active, **dict(prior_hyper)
        )
        active = np.sqrt(prior_variance(self.prior_state))
        active = active * _gen(rng).standard_normal(self.n_active)
        self.active_alpha = active
        self.alpha = self._to_param_vector(active)
        self.states = StateTrajectory(tilde_beta=np.zeros((self.t, self.kw)))

        scale = max(float(np.var(self.y)), 1e-8)
        if sv:
            level = math.log(scale)
            self.sv = SvState(h=np.full(self.t, level), mu=level)
            self.sigma2 = None
        else:
            self.sv = None
            self.sigma2 = scale
        self.design = build_design(self.X, self.states, self.alpha, self.contemp)

    def _to_param_vector(self, active: np.ndarray) -> NcParamVector:
        full = np.concatenate([active, np.zeros(self.kw)]) if self.tvp_off else active
        return NcParamVector.from_concat(full, self.k, self.n_cov)

    def _obs_var(self) -> np.ndarray:
        if self.sv is not None:
            return self.sv.variances()
        return np.full(self.t, self.sigma2)

    def _draw_alpha(self, za: np.ndarray, obs_var: np.ndarray) -> np.ndarray:
        zw = za / obs_var[:, None]
        prec = za.T @ zw
        prec[np.diag_indices(self.n_active)] += 1.0 / prior_variance(self.prior_state)
        rhs = zw.T @ self.y
        for ridge in (0.0, RIDGE):
            try:
                low = linalg.cholesky(
                    prec + ridge * np.eye(self.n_active), lower=True
                )
            except linalg.LinAlgError:
                continue
            mean = linalg.cho_solve((low, True), rhs)
            z = _gen(self.rng).standard_normal(self.n_active)
            return mean + linalg.solve_triangular(low, z, lower=True, trans="T")
        raise NumericalError("posterior precision of the constant block is singular")

    def sweep(self, phase: float = 1.0):
        if not self.tvp_off:
            self.states = ffbs(
                self.y, self.X, self.alpha, self._obs_var(), self.rng, self.contemp
            )
        self.design = build_design(self.X, self.states, self.alpha, self.contemp)
        za = self.design.Z[:, : self.n_active]

        resid = self.y - za @ self.active_alpha
        if self.sv is not None:
            sv_sweep(resid, self.sv, self.rng)
        else:
            self.sigma2 = float(
                rv_inv_gamma(
                    self.rng,
                    self.d_sigma + 0.5 * self.t,
                    self.e_sigma + 0.5 * float(resid @ resid),
                )
            )

        self.active_alpha = self._draw_alpha(za, self._obs_var())
        self.alpha = self._to_param_vector(self.active_alpha)
        self.prior_state = update_prior(
            self.prior_state, self.active_alpha, self.rng, phase
        )

    def record(self) -> DrawRecord:
        sparsified = None
        if self.sparsify:
            sparsified = savs_sparsify(self.alpha, self.design.col_sq_norms)
        sv_copy = None
        if self.sv is not None:
            sv_copy = SvState(
                h=self.sv.h.copy(),
                mu=self.sv.mu,
                rho=self.sv.rho,
                sig_eta2=self.sv.sig_eta2,
                mix_ind=self.sv.mix_ind.copy(),
            )
        return DrawRecord(
            alpha=NcParamVector.from_concat(self.alpha.concat(), self.k, self.n_cov),
            states=StateTrajectory(tilde_beta=self.states.tilde_beta.copy()),
            sigma2=self.sigma2,
            sv=sv_copy,
            sparsified=sparsified,
        )


def _burn_phase(sweep_index: int, n_burn: int) -> float:
    if sweep_index >= n_burn:
        return 1.0
    return sweep_index / n_burn


def fit_tvp_regression(spec: RegressionSpec, rng: RngStream) -> Iterator[DrawRecord]:
    """Stream post-burn-in draws of the TVP regression sampler."""
    eng = _EquationEngine(
        spec.y,
        spec.X,
        None,
        rng,
        prior=spec.prior,
        prior_hyper=spec.prior_hyper,
        sparsify=spec.sparsify,
        sv=spec.sv,
        tvp_off=spec.tvp_off,
        d_sigma=spec.d_sigma,
        e_sigma=spec.e_sigma,
    )
    for i in range(spec.n_draws):
        eng.sweep(_burn_phase(i, spec.n_burn))
        if i >= spec.n_burn:
            yield eng.record()


def fit_tvp_var(spec: VarSpec, rng: RngStream) -> Iterator[List[DrawRecord]]:
    """Stream joint post-burn-in draws, one DrawRecord per equation.

    Equation i receives the derived stream rng.derive(i), so a fit is
    reproducible equation by equation no matter how the sweep loop is
    scheduled.
    """
    y_eff, x_lag = spec.design_arrays()
    engines = []
    for i in range(spec.m):
        engines.append(
            _EquationEngine(
                y_eff[:, i],
                x_lag,
                y_eff[:, :i] if i > 0 else None,
                rng.derive(i),
                prior=spec.prior,
                prior_hyper=spec.prior_hyper,
                sparsify=spec.sparsify,
                sv=spec.sv,
                tvp_off=spec.tvp_off,
                d_sigma=spec.d_sigma,
                e_sigma=spec.e_sigma,
            )
        )
    for s in range(spec.n_draws):
        phase = _burn_phase(s, spec.n_burn)
        for eng in engines:
            eng.sweep(phase)
        if s >= spec.n_burn:
            yield [eng.record() for eng in engines]


def reconstruct_beta_path(
    record: DrawRecord, sparsified: Optional[bool] = None
) -> np.ndarray:
    """Coefficient path beta_t = beta_0 + sqrt(V) * tilde_beta_t.

    Returns one column per regressor (lag/exogenous block first, then
    any contemporaneous block). When the record carries a thresholded
    twin it is used by default; pass ``sparsified=False`` for the raw
    draw or ``sparsified=True`` to insist on the twin.
    """
    use_twin = (record.sparsified is not None) if sparsified is None else sparsified
    if use_twin:
        if record.sparsified is None:
            raise UsageError("record has no sparsified draw")
        pv = NcParamVector.from_concat(
            record.sparsified.gamma_bar, record.alpha.beta0.shape[0], record.alpha.n_cov
        )
    else:
        pv = record.alpha
    return pv.constants + record.states.tilde_beta * pv.loadings


def reconstruct_cov_matrices(records: Sequence[DrawRecord]) -> np.ndarray:
    """Error covariance path of one joint VAR draw, shape (T, M, M).

    Equation i's contemporaneous coefficients move y_{<i,t} to the
    right-hand side, so the structural form is A_t y_t = B_t X_t + eta_t
    with A_t uni-lower-triangular carrying their negatives; inverting
    back gives Sigma_t = U_t H_t U_t' with U_t = A_t^{-1}, positive
    definite by construction.
    """
    m = len(records)
    if m < 2:
        raise UsageError("need the records of at least two equations")
    t = records[0].states.tilde_beta.shape[0]
    h = np.empty((t, m))
    upaths = []
    for i, rec in enumerate(records):
        if rec.alpha.n_cov != i:
            raise ShapeError("records are not in equation order")
        h[:, i] = rec.noise_variances()
        k = rec.alpha.beta0.shape[0]
        upaths.append(reconstruct_beta_path(rec, sparsified=False)[:, k:])
    out = np.empty((t, m, m))
    eye = np.eye(m)
    for s in range(t):
        a = eye.copy()
        for i in range(1, m):
            a[i, :i] = -upaths[i][s]
        u = linalg.solve_triangular(a, eye, lower=True, unit_diagonal=True)
        out[s] = (u * h[s]) @ u.T
    return out
