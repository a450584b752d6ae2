"""Joint-distribution testing of MCMC sweeps (Geweke-style).

Two simulators of the same joint model are compared: the marginal-
conditional side draws (parameters, data) iid from the prior and
likelihood, while the successive-conditional side alternates the
posterior sweep under test with re-simulation of the data. If the
sweep is a correct kernel, every functional has the same mean in both.

Standard errors on the successive-conditional side come from
independent replicated chains (each started from an exact prior draw,
hence stationary from sweep one). Replication sidesteps within-chain
autocorrelation-time estimation, which demonstrably truncates for the
heavy-tailed hierarchies here and understates the error by factors.
"""

import math

import numpy as np

from tvpsparse._kernels import sv_ffbs, sv_mixture_indicators
from tvpsparse.dist_kernels import RngStream, _gen, rv_inv_gamma
from tvpsparse.shrinkage_priors import make_prior_state, prior_variance, update_prior
from tvpsparse.state_space import StateTrajectory, build_design
from tvpsparse.tvp_models import _EquationEngine
from tvpsparse.stochvol import (
    MIX_MEANS,
    MIX_PROBS,
    MIX_VARS,
    SvState,
    _draw_mu,
    _draw_rho,
    _draw_sig_eta2,
)


def iact(x, max_lag=None):
    """Integrated autocorrelation time, Geyer initial-positive-sequence.

    Diagnostic only: for functionals with rare long-lived excursions the
    truncation rule fires far too early. Do not build test standard
    errors on this.
    """
    x = np.asarray(x, float)
    n = len(x)
    if max_lag is None:
        max_lag = n // 10
    x = x - x.mean()
    v = x @ x / n
    if v <= 0:
        return 1.0
    acf = np.correlate(x, x, "full")[n - 1 : n + max_lag] / (n * v)
    pair = acf[1:-1:2] + acf[2::2]
    tau = 1.0
    for p in pair:
        if p <= 0.0:
            break
        tau += 2.0 * p
    return max(tau, 1.0)


def replicated_z_scores(mc, chain_means):
    """z per functional; SC uncertainty from the spread of chain means.

    mc: (M, F) iid functional draws; chain_means: (R, F) per-chain
    averages from R independent stationary chains.
    """
    mc = np.asarray(mc, float)
    chain_means = np.asarray(chain_means, float)
    r = chain_means.shape[0]
    se_mc = mc.std(axis=0, ddof=1) / np.sqrt(mc.shape[0])
    se_sc = chain_means.std(axis=0, ddof=1) / np.sqrt(r)
    return (mc.mean(axis=0) - chain_means.mean(axis=0)) / np.sqrt(se_mc**2 + se_sc**2)


class PriorSweepHarness:
    """Shrinkage-prior sweep against a fixed-design Gaussian likelihood.

    Model: state ~ hierarchy, alpha | state ~ N(0, Omega(state)),
    y = Z alpha + e with e ~ N(0, I_T) and Z a fixed T x n design.

    NG and Lasso run with d_lam = e_lam = 3 so the moment functionals
    have finite variance; both chains share the hyperparameters, so the
    comparison stays exact. The horseshoe's prior moments of alpha do
    not exist, so its functionals are tanh-bounded.
    """

    def __init__(self, kind, n=4, t=20, design_seed=1234):
        self.kind = kind
        self.n = n
        self.t = t
        dg = RngStream(design_seed, 99)
        # unit-information scaling: the test should stress the kernel's
        # correctness, not its mixing speed under a sharp likelihood
        self.Z = _gen(dg).standard_normal((t, n)) / np.sqrt(t)
        self.ZtZ = self.Z.T @ self.Z

    def _make_state(self, rng):
        if self.kind in ("ng", "lasso"):
            return make_prior_state(self.kind, self.n, rng, d_lam=3.0, e_lam=3.0)
        return make_prior_state(self.kind, self.n, rng)

    def _top_level(self, state):
        for name in ("zeta", "lam_tilde", "lam", "p_incl"):
            if hasattr(state, name):
                return float(getattr(state, name))
        return float(state.variance)

    def _functionals(self, alpha, state):
        if self.kind == "hs":
            vals = (
                list(np.tanh(alpha))
                + list(np.tanh(alpha**2))
                + [np.tanh(alpha[0] * alpha[1]), np.tanh(alpha[2] * alpha[3])]
                + [np.tanh(self._top_level(state))]
            )
        else:
            vals = (
                list(alpha)
                + list(alpha**2)
                + [alpha[0] * alpha[1], alpha[2] * alpha[3]]
                + [self._top_level(state)]
            )
        if hasattr(state, "a"):
            vals.append(float(state.a))
        return vals

    def labels(self):
        base = (
            [f"alpha[{j}]" for j in range(self.n)]
            + [f"alpha[{j}]^2" for j in range(self.n)]
            + ["alpha[0]*alpha[1]", "alpha[2]*alpha[3]", "top-level"]
        )
        if self.kind == "dl":
            base.append("a")
        return base

    def _draw_alpha_given_y(self, y, state, gen):
        prec = self.ZtZ + np.diag(1.0 / prior_variance(state))
        L = np.linalg.cholesky(prec)
        rhs = self.Z.T @ y
        mean = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
        z = np.linalg.solve(L.T, gen.standard_normal(self.n))
        return mean + z

    def run(self, total_sweeps, seed, n_chains=25):
        """z-scores from total_sweeps split over n_chains SC replicates.

        Many short chains beat few long ones here: the heavy-tailed
        prior functionals make chain means right-skewed, and a small
        replicate count couples a low pooled mean with a small spread
        estimate exactly when the tail goes unsampled.
        """
        nf = len(self.labels())
        rng = RngStream(seed, 0)
        gen = _gen(RngStream(seed, 1))
        mc = np.empty((total_sweeps, nf))
        for i in range(total_sweeps):
            st = self._make_state(rng)
            alpha = np.sqrt(prior_variance(st)) * gen.standard_normal(self.n)
            mc[i] = self._functionals(alpha, st)

        per_chain = total_sweeps // n_chains
        chain_means = np.empty((n_chains, nf))
        for r in range(n_chains):
            crng = RngStream(seed, 0).derive(r)
            cgen = _gen(RngStream(seed, 1).derive(r))
            st = self._make_state(crng)
            alpha = np.sqrt(prior_variance(st)) * cgen.standard_normal(self.n)
            y = self.Z @ alpha + cgen.standard_normal(self.t)
            acc = np.zeros(nf)
            for i in range(per_chain):
                alpha = self._draw_alpha_given_y(y, st, cgen)
                st = update_prior(st, alpha, crng, phase=1.0)
                y = self.Z @ alpha + cgen.standard_normal(self.t)
                acc += self._functionals(alpha, st)
            chain_means[r] = acc / per_chain
        return replicated_z_scores(mc, chain_means)


class SvSweepHarness:
    """Volatility sweep against the linearized mixture model taken as exact.

    Model: (mu, rho, sig_eta2) from their priors, h an AR(1) path,
    indicators iid over the 10 components, obs_t = h_t + m_s + e_t with
    e_t ~ N(0, v_s). The sweep under test is indicator draw + joint path
    draw + the three parameter conditionals; the log(resid^2) transform
    of production code is outside the mixture model and outside this
    test.
    """

    def __init__(self, t=20):
        self.t = t

    def labels(self):
        return ["mu", "rho", "sig_eta2", "mean(h)", "mean(h)^2", "h[0]"]

    def _functionals(self, st):
        mh = float(st.h.mean())
        return [st.mu, st.rho, st.sig_eta2, mh, mh * mh, float(st.h[0])]

    def _simulate_obs(self, st, gen):
        s = np.minimum(
            np.searchsorted(np.cumsum(MIX_PROBS), gen.random(self.t)), 9
        ).astype(np.int64)
        return st.h + MIX_MEANS[s] + np.sqrt(MIX_VARS[s]) * gen.standard_normal(self.t)

    def _sweep(self, obs, st, rng, gen):
        sv_mixture_indicators(
            obs - st.h, MIX_PROBS, MIX_MEANS, MIX_VARS, gen, st.mix_ind
        )
        m = MIX_MEANS[st.mix_ind]
        v = MIX_VARS[st.mix_ind]
        sv_ffbs(obs, m, v, st.mu, st.rho, st.sig_eta2, gen, st.h)
        st.mu = _draw_mu(st, rng)
        st.rho = _draw_rho(st, rng)
        st.sig_eta2 = _draw_sig_eta2(st, rng)
        return st

    def run(self, total_sweeps, seed, n_chains=25):
        nf = len(self.labels())
        rng = RngStream(seed, 0)
        gen = _gen(RngStream(seed, 1))
        mc = np.empty((total_sweeps, nf))
        for i in range(total_sweeps):
            mc[i] = self._functionals(SvState.sample_from_prior(self.t, rng))

        per_chain = total_sweeps // n_chains
        chain_means = np.empty((n_chains, nf))
        for r in range(n_chains):
            crng = RngStream(seed, 0).derive(r)
            cgen = _gen(RngStream(seed, 1).derive(r))
            st = SvState.sample_from_prior(self.t, crng)
            obs = self._simulate_obs(st, cgen)
            acc = np.zeros(nf)
            for i in range(per_chain):
                st = self._sweep(obs, st, crng, cgen)
                obs = self._simulate_obs(st, cgen)
                acc += self._functionals(st)
            chain_means[r] = acc / per_chain
        return replicated_z_scores(mc, chain_means)


class FullSamplerHarness:
    """Complete homoscedastic regression sweep against its joint prior.

    Joint model: shrinkage hierarchy -> alpha, random-walk states from
    zero, sigma^2 ~ iG(3, 3), y = Z(states) alpha + sigma eps on a
    fixed unit-information design. Shape and scale of the variance
    prior are moderated to 3: the production default of 0.01 leaves
    sigma^2 without even a prior mean, which no mean-based functional
    can survive. Both simulators share the moderated value, so the
    comparison stays exact.

    Horseshoe and Dirichlet-Laplace marginals are too heavy-tailed for
    raw alpha moments: the chain side must walk into rare large-scale
    excursions that outlast any feasible chain, so raw means stay
    biased low while medians and bounded statistics match exactly.
    Those two kinds therefore use tanh-compressed functionals, which
    keep the joint-model identity test exact and admit an honest CLT.
    """

    bounded_kinds = ("hs", "dl")

    def __init__(self, kind, t=20, k=2, design_seed=1234):
        self.kind = kind
        self.t = t
        self.k = k
        self.n = 2 * k
        self.d_sigma = self.e_sigma = 3.0
        dg = RngStream(design_seed, 98)
        self.X = _gen(dg).standard_normal((t, k)) / np.sqrt(t)

    def _hyper(self):
        if self.kind in ("ng", "lasso"):
            return {"d_lam": 3.0, "e_lam": 3.0}
        return {}

    def labels(self):
        if self.kind in self.bounded_kinds:
            labs = [f"tanh(alpha[{j}])" for j in range(self.n)]
            labs += [f"tanh(alpha[{j}]^2)" for j in range(self.n)]
        else:
            labs = [f"alpha[{j}]" for j in range(self.n)]
            labs += [f"alpha[{j}]^2" for j in range(self.n)]
        return labs + ["sigma2", "mean(states)"]

    def _functionals(self, alpha, sigma2, states):
        a = np.asarray(alpha)
        if self.kind in self.bounded_kinds:
            head = list(np.tanh(a)) + list(np.tanh(a * a))
        else:
            head = list(a) + list(a * a)
        return np.array(head + [sigma2, float(np.mean(states))])

    def _prior_states(self, gen):
        return np.cumsum(gen.standard_normal((self.t, self.k)), axis=0)

    def _simulate_y(self, eng, gen):
        design = build_design(self.X, eng.states, eng.alpha, None)
        noise = math.sqrt(eng.sigma2) * gen.standard_normal(self.t)
        return design.Z @ eng.active_alpha + noise

    def run(self, total_sweeps, seed, n_chains=25):
        nf = len(self.labels())
        rng = RngStream(seed, 0)
        gen = _gen(RngStream(seed, 1))
        mc = np.empty((total_sweeps, nf))
        for i in range(total_sweeps):
            st = make_prior_state(self.kind, self.n, rng, **self._hyper())
            alpha = np.sqrt(prior_variance(st)) * gen.standard_normal(self.n)
            sigma2 = float(rv_inv_gamma(rng, self.d_sigma, self.e_sigma))
            mc[i] = self._functionals(alpha, sigma2, self._prior_states(gen))

        per_chain = total_sweeps // n_chains
        chain_means = np.empty((n_chains, nf))
        for r in range(n_chains):
            crng = RngStream(seed, 0).derive(r)
            cgen = _gen(RngStream(seed, 1).derive(r))
            eng = _EquationEngine(
                np.zeros(self.t),
                self.X,
                None,
                crng,
                prior=self.kind,
                prior_hyper=self._hyper(),
                sparsify=False,
                sv=False,
                tvp_off=False,
                d_sigma=self.d_sigma,
                e_sigma=self.e_sigma,
            )
            # replace the neutral production initialization with exact
            # prior draws so the chain is stationary from its first sweep
            eng.prior_state = make_prior_state(self.kind, self.n, crng, **self._hyper())
            a0 = np.sqrt(prior_variance(eng.prior_state))
            a0 = a0 * cgen.standard_normal(self.n)
            eng.active_alpha = a0
            eng.alpha = eng._to_param_vector(a0)
            eng.sigma2 = float(rv_inv_gamma(crng, self.d_sigma, self.e_sigma))
            eng.states = StateTrajectory(tilde_beta=self._prior_states(cgen))
            eng.y = self._simulate_y(eng, cgen)
            acc = np.zeros(nf)
            for i in range(per_chain):
                eng.sweep(1.0)
                eng.y = self._simulate_y(eng, cgen)
                acc += self._functionals(
                    eng.active_alpha, eng.sigma2, eng.states.tilde_beta
                )
            chain_means[r] = acc / per_chain
        return replicated_z_scores(mc, chain_means)
