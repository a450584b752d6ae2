"""Global-local shrinkage hierarchies and their Gibbs/MH updates.

Each state object owns the latent scales of one equation's parameter
vector and knows how to (a) resample them given the current constant
coefficients, (b) report the implied prior variance diagonal for the
coefficient update, and (c) draw a fresh state from the hierarchy's own
prior (used for initialization and for joint-distribution testing).

Conventions: ``n`` is the length of the coefficient vector the prior
covers (2K for a regression equation). Absolute coefficients are floored
at 1e-10 before entering reciprocal-type conditionals, and variance
diagonals are floored at 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .dist_kernels import (
    RngStream,
    _gen,
    gig_rvs,
    inv_gaussian_rvs,
    rv_bernoulli,
    rv_beta,
    rv_gamma,
    rv_inv_gamma,
    trunc_normal_rvs,
)
from .errors import NumericalError, ParameterDomainError

ALPHA_FLOOR = 1e-10
VAR_FLOOR = 1e-12


def adapt_mh_scale(scale: float, acc_rate: float, phase: float) -> float:
    """Proposal-scale tuning rule, active only early in the burn-in.

    ``phase`` is the fraction of burn-in completed; past 0.2 the scale
    is frozen. Inside the window the scale is nudged up 10% when the
    acceptance rate exceeds 0.4 and down 10% below 0.2.
    """
    if phase >= 0.2:
        return scale
    if acc_rate > 0.4:
        return scale * 1.1
    if acc_rate < 0.2:
        return scale * 0.9
    return scale


class _MhTracker:
    """Windowed acceptance counting for one MH move."""

    def __init__(self, window: int = 50):
        self.window = window
        self.accepted = 0
        self.tried = 0

    def record(self, accepted: bool):
        self.tried += 1
        self.accepted += int(accepted)

    def maybe_adapt(self, scale: float, phase: float) -> float:
        if self.tried >= self.window:
            scale = adapt_mh_scale(scale, self.accepted / self.tried, phase)
            self.accepted = 0
            self.tried = 0
        return scale


@dataclass
class DlState:
    """Dirichlet-Laplace hierarchy: variance diagonal omega * xi^2 * zeta^2."""

    omega: np.ndarray
    xi: np.ndarray
    zeta: float
    a: float
    mh_scale: float = 0.1
    tracker: _MhTracker = field(default_factory=_MhTracker, repr=False)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def a_bounds(self) -> tuple:
        return (1.0 / self.n, 0.5)

    @classmethod
    def sample_from_prior(cls, n: int, rng: RngStream, a: Optional[float] = None) -> "DlState":
        g = _gen(rng)
        if a is None:
            a = float(1.0 / n + (0.5 - 1.0 / n) * g.random())
        zeta = float(rv_gamma(rng, n * a, 0.5))
        xi = g.dirichlet(np.full(n, a))
        omega = g.standard_exponential(n) * 2.0  # Exp(rate 1/2)
        return cls(omega=omega, xi=xi, zeta=zeta, a=a)

    def top_level(self) -> float:
        return self.zeta


@dataclass
class NgState:
    """Normal-Gamma hierarchy: variance diagonal phi. fix_theta pins the
    shape at its current value, which with theta=1 is the Lasso."""

    phi: np.ndarray
    lam_tilde: float
    theta: float = 0.1
    fix_theta: bool = False
    mh_scale: float = 0.3
    d_lam: float = 1e-4
    e_lam: float = 1e-4
    tracker: _MhTracker = field(default_factory=_MhTracker, repr=False)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @classmethod
    def sample_from_prior(
        cls,
        n: int,
        rng: RngStream,
        theta: Optional[float] = None,
        fix_theta: bool = False,
        d_lam: float = 1e-4,
        e_lam: float = 1e-4,
    ) -> "NgState":
        g = _gen(rng)
        if theta is None:
            theta = 1.0 if fix_theta else float(g.standard_exponential())
        # diffuse defaults can underflow to exactly zero; keep the rate proper
        lam_tilde = max(float(rv_gamma(rng, d_lam, e_lam)), 1e-290)
        phi = rv_gamma(rng, theta, theta * lam_tilde / 2.0, size=n)
        return cls(
            phi=np.asarray(phi),
            lam_tilde=lam_tilde,
            theta=theta,
            fix_theta=fix_theta,
            d_lam=d_lam,
            e_lam=e_lam,
        )

    def top_level(self) -> float:
        return self.lam_tilde


@dataclass
class HsState:
    """Horseshoe via inverse-Gamma auxiliaries: variance diagonal phi * lam."""

    phi: np.ndarray
    lam: float
    nu: np.ndarray
    vphi: float

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @classmethod
    def sample_from_prior(cls, n: int, rng: RngStream) -> "HsState":
        vphi = float(rv_inv_gamma(rng, 0.5, 1.0))
        lam = float(rv_inv_gamma(rng, 0.5, 1.0 / vphi))
        nu = rv_inv_gamma(rng, 0.5, 1.0, size=n)
        phi = rv_inv_gamma(rng, 0.5, 1.0 / nu)
        return cls(phi=np.asarray(phi), lam=lam, nu=np.asarray(nu), vphi=vphi)

    def top_level(self) -> float:
        return self.lam


@dataclass
class NmigState:
    """Normal mixture of inverse-Gammas (spike and slab on the scale)."""

    delta: np.ndarray
    tau2: np.ndarray
    p_incl: float
    c: float = 2.5e-5
    d_tau: float = 5.0
    e_tau: float = 4.0
    d_p: float = 1.0
    e_p: float = 1.0

    @property
    def n(self) -> int:
        return self.delta.shape[0]

    @classmethod
    def sample_from_prior(
        cls,
        n: int,
        rng: RngStream,
        c: float = 2.5e-5,
        d_tau: float = 5.0,
        e_tau: float = 4.0,
        d_p: float = 1.0,
        e_p: float = 1.0,
    ) -> "NmigState":
        p_incl = float(rv_beta(rng, d_p, e_p))
        delta = rv_bernoulli(rng, np.full(n, p_incl))
        tau2 = rv_inv_gamma(rng, d_tau, e_tau, size=n)
        return cls(
            delta=np.asarray(delta), tau2=np.asarray(tau2), p_incl=p_incl,
            c=c, d_tau=d_tau, e_tau=e_tau, d_p=d_p, e_p=e_p,
        )

    def top_level(self) -> float:
        return self.p_incl


@dataclass
class FlatState:
    """Loosely informative fixed-variance prior; nothing to update."""

    n: int
    variance: float = 10.0

    @classmethod
    def sample_from_prior(cls, n: int, rng: RngStream) -> "FlatState":
        return cls(n=n)

    def top_level(self) -> float:
        return self.variance


def prior_variance(state) -> np.ndarray:
    """Diagonal of the prior covariance the coefficient update sees."""
    if isinstance(state, DlState):
        diag = state.omega * state.xi**2 * state.zeta**2
    elif isinstance(state, NgState):
        diag = state.phi.copy()
    elif isinstance(state, HsState):
        diag = state.phi * state.lam
    elif isinstance(state, NmigState):
        diag = state.tau2 * (state.delta + (1 - state.delta) * state.c)
    elif isinstance(state, FlatState):
        diag = np.full(state.n, state.variance)
    else:
        raise ParameterDomainError(f"unknown prior state {type(state).__name__}")
    return np.maximum(diag, VAR_FLOOR)


def _dirichlet_gamma_logpdf(xi: np.ndarray, zeta: float, a: float, n: int) -> float:
    # Dirichlet(xi; a..a) * Gamma(zeta; n a, 1/2); the lgamma(n a) terms cancel
    return float(
        (a - 1.0) * np.log(xi).sum()
        - n * math.lgamma(a)
        + n * a * math.log(0.5)
        + (n * a - 1.0) * math.log(zeta)
        - 0.5 * zeta
    )


def dl_update(state: DlState, alpha: np.ndarray, rng: RngStream, phase: float = 1.0) -> DlState:
    """One sweep of the Dirichlet-Laplace conditionals.

    The xi and zeta moves are partially collapsed (local scales
    integrated out via the double-exponential representation), so they
    must run before omega is refreshed: xi | alpha, then zeta | xi,
    alpha, then omega | xi, zeta, alpha, then the MH move for a. The
    conditional of 1/omega_j is inverse Gaussian with mean
    zeta xi_j / |alpha_j|, so we draw that and invert.
    """
    n = state.n
    aabs = np.maximum(np.abs(alpha), ALPHA_FLOOR)
    tj = gig_rvs(np.full(n, state.a - 1.0), 1.0, 2.0 * aabs, rng)
    tot = tj.sum()
    if not np.isfinite(tot) or tot <= 0.0:
        raise NumericalError("Dirichlet weight renormalization failed (sum T_i = 0)")
    state.xi = tj / tot
    state.xi = state.xi / state.xi.sum()
    ratio = 2.0 * np.sum(aabs / np.maximum(state.xi, 1e-290))
    state.zeta = float(gig_rvs(n * (state.a - 1.0), 1.0, ratio, rng))
    mu = np.maximum(state.zeta * state.xi, ALPHA_FLOOR) / aabs
    state.omega = 1.0 / inv_gaussian_rvs(mu, 1.0, rng)
    lo, hi = state.a_bounds
    if hi - lo <= 1e-12:
        # n=2 pins a at 1/2: the uniform support is a single point
        return state
    prop = trunc_normal_rvs(rng, state.a, state.mh_scale, lo, hi)

    def logz(center):
        return math.log(
            max(ndtr((hi - center) / state.mh_scale) - ndtr((lo - center) / state.mh_scale), 1e-300)
        )

    logr = (
        _dirichlet_gamma_logpdf(state.xi, state.zeta, prop, n)
        - _dirichlet_gamma_logpdf(state.xi, state.zeta, state.a, n)
        + logz(state.a)
        - logz(prop)
    )
    accept = math.log(_gen(rng).random()) <= logr
    if accept:
        state.a = prop
    state.tracker.record(accept)
    state.mh_scale = state.tracker.maybe_adapt(state.mh_scale, phase)
    return state


def ng_update(state: NgState, alpha: np.ndarray, rng: RngStream, phase: float = 1.0) -> NgState:
    """One sweep of the Normal-Gamma conditionals (Lasso when theta fixed at 1)."""
    n = state.n
    state.phi = gig_rvs(
        np.full(n, state.theta - 0.5), state.theta * state.lam_tilde, alpha**2, rng
    )
    state.lam_tilde = float(
        rv_gamma(rng, state.d_lam + state.theta * n, state.e_lam + 0.5 * state.theta * state.phi.sum())
    )
    if not state.fix_theta:
        logphi_sum = float(np.log(state.phi).sum())
        phi_sum = float(state.phi.sum())

        def logtarget(th):
            return (
                n * (th * math.log(th * state.lam_tilde / 2.0) - math.lgamma(th))
                + (th - 1.0) * logphi_sum
                - 0.5 * th * state.lam_tilde * phi_sum
                - th
            )

        g = _gen(rng)
        prop = state.theta * math.exp(state.mh_scale * g.standard_normal())
        logr = logtarget(prop) - logtarget(state.theta) + math.log(prop) - math.log(state.theta)
        accept = math.log(g.random()) <= logr
        if accept:
            state.theta = prop
        state.tracker.record(accept)
        state.mh_scale = state.tracker.maybe_adapt(state.mh_scale, phase)
    return state


def hs_update(state: HsState, alpha: np.ndarray, rng: RngStream, phase: float = 1.0) -> HsState:
    """One sweep of the horseshoe auxiliary-variable conditionals."""
    n = state.n
    state.phi = rv_inv_gamma(rng, 1.0, 1.0 / state.nu + alpha**2 / (2.0 * state.lam))
    state.lam = float(
        rv_inv_gamma(rng, (n + 1) / 2.0, 1.0 / state.vphi + 0.5 * np.sum(alpha**2 / state.phi))
    )
    state.nu = rv_inv_gamma(rng, 1.0, 1.0 + 1.0 / state.phi)
    state.vphi = float(rv_inv_gamma(rng, 1.0, 1.0 + 1.0 / state.lam))
    return state


def nmig_update(state: NmigState, alpha: np.ndarray, rng: RngStream, phase: float = 1.0) -> NmigState:
    """One sweep of the spike-and-slab conditionals."""
    n = state.n
    # log-odds form of p(delta=1 | alpha): spike variance is c * tau^2
    log_slab = -0.5 * (np.log(state.tau2) + alpha**2 / state.tau2)
    log_spike = -0.5 * (np.log(state.c * state.tau2) + alpha**2 / (state.c * state.tau2))
    if state.p_incl <= 0.0:
        prob = np.zeros(n)
    elif state.p_incl >= 1.0:
        prob = np.ones(n)
    else:
        logit = (
            np.log(state.p_incl) - np.log1p(-state.p_incl) + log_slab - log_spike
        )
        prob = 1.0 / (1.0 + np.exp(-np.clip(logit, -700.0, 700.0)))
    state.delta = rv_bernoulli(rng, prob)
    s = state.delta + (1 - state.delta) * state.c
    state.tau2 = rv_inv_gamma(rng, state.d_tau + 0.5, state.e_tau + alpha**2 / (2.0 * s))
    k = int(state.delta.sum())
    state.p_incl = float(rv_beta(rng, state.d_p + k, state.e_p + n - k))
    return state


def flat_update(state: FlatState, alpha: np.ndarray, rng: RngStream, phase: float = 1.0) -> FlatState:
    return state


_UPDATES = {
    DlState: dl_update,
    NgState: ng_update,
    HsState: hs_update,
    NmigState: nmig_update,
    FlatState: flat_update,
}


def update_prior(state, alpha: np.ndarray, rng: RngStream, phase: float = 1.0):
    """Dispatch one full hyperparameter sweep for any prior state."""
    return _UPDATES[type(state)](state, alpha, rng, phase)


def make_prior_state(kind: str, n: int, rng: RngStream, **hyper):
    """Fresh prior state of the named kind, drawn from its own hierarchy."""
    kind = kind.lower()
    if kind == "dl":
        return DlState.sample_from_prior(n, rng, **hyper)
    if kind == "ng":
        return NgState.sample_from_prior(n, rng, **hyper)
    if kind == "lasso":
        hyper.setdefault("theta", 1.0)
        hyper["fix_theta"] = True
        return NgState.sample_from_prior(n, rng, **hyper)
    if kind == "hs":
        return HsState.sample_from_prior(n, rng, **hyper)
    if kind == "nmig":
        return NmigState.sample_from_prior(n, rng, **hyper)
    if kind == "flat":
        return FlatState.sample_from_prior(n, rng, **hyper)
    raise ParameterDomainError(f"unknown prior kind {kind!r}")


def neutral_prior_state(kind: str, n: int, **hyper):
    """Deterministic O(1) starting state of the named hierarchy.

    Chains must not start from raw prior draws of the global scales:
    diffuse defaults such as Gamma(1e-4, 1e-4) underflow double
    precision with high probability, and a sweep seeded with a denormal
    global scale enters a self-perpetuating overflow region it never
    leaves. Scales start at conditional-prior means (or one) instead;
    the first few sweeps mix them to data-appropriate magnitudes.
    """
    kind = kind.lower()
    if kind == "dl":
        a = float(hyper.pop("a", 0.5 * (1.0 / n + 0.5)))
        _reject_extras(kind, hyper)
        return DlState(
            omega=np.full(n, 2.0), xi=np.full(n, 1.0 / n), zeta=2.0 * n * a, a=a
        )
    if kind in ("ng", "lasso"):
        fixed = kind == "lasso" or bool(hyper.pop("fix_theta", False))
        theta = float(hyper.pop("theta", 1.0))
        d_lam = float(hyper.pop("d_lam", 1e-4))
        e_lam = float(hyper.pop("e_lam", 1e-4))
        _reject_extras(kind, hyper)
        return NgState(
            phi=np.full(n, 2.0), lam_tilde=1.0, theta=theta,
            fix_theta=fixed, d_lam=d_lam, e_lam=e_lam,
        )
    if kind == "hs":
        _reject_extras(kind, hyper)
        return HsState(phi=np.ones(n), lam=1.0, nu=np.ones(n), vphi=1.0)
    if kind == "nmig":
        c = float(hyper.pop("c", 2.5e-5))
        d_tau = float(hyper.pop("d_tau", 5.0))
        e_tau = float(hyper.pop("e_tau", 4.0))
        d_p = float(hyper.pop("d_p", 1.0))
        e_p = float(hyper.pop("e_p", 1.0))
        _reject_extras(kind, hyper)
        tau2 = e_tau / (d_tau - 1.0) if d_tau > 1.0 else 1.0
        # start every coefficient in the slab; spike starts pin alphas
        # near zero before the data has had any say
        return NmigState(
            delta=np.ones(n), tau2=np.full(n, tau2), p_incl=d_p / (d_p + e_p),
            c=c, d_tau=d_tau, e_tau=e_tau, d_p=d_p, e_p=e_p,
        )
    if kind == "flat":
        _reject_extras(kind, hyper)
        return FlatState(n=n)
    raise ParameterDomainError(f"unknown prior kind {kind!r}")


def _reject_extras(kind: str, hyper: dict):
    if hyper:
        raise ParameterDomainError(
            f"unexpected hyperparameters {sorted(hyper)} for prior {kind!r}"
        )
