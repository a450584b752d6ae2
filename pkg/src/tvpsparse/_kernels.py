"""Compiled linear-algebra kernels for the samplers.

Everything here is plain nopython numba (or interpreted numpy when numba
is disabled) and draws randomness from the Generator passed in, so both
backends walk the stream identically.
"""

import numpy as np

from ._compat import njit


@njit(cache=True)
def _chol_lower(A, L):
    """Lower Cholesky of A into L; returns False when A is not PD."""
    n = A.shape[0]
    for i in range(n):
        for j in range(i + 1):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if s <= 0.0:
                    return False
                L[i, i] = np.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
        for j in range(i + 1, n):
            L[i, j] = 0.0
    return True


@njit(cache=True)
def _chol_draw(C, mean, rng, out):
    """out = mean + chol(C) z with an escalating diagonal jitter ladder.

    Returns False only when C stays non-PD at the largest jitter.
    """
    n = C.shape[0]
    L = np.empty((n, n))
    scale = 0.0
    for i in range(n):
        if C[i, i] > scale:
            scale = C[i, i]
    if scale <= 0.0:
        scale = 1.0
    jitter = 0.0
    for _ in range(5):
        A = C.copy()
        if jitter > 0.0:
            for i in range(n):
                A[i, i] += jitter
        if _chol_lower(A, L):
            zv = np.empty(n)
            for i in range(n):
                zv[i] = rng.standard_normal()
            for i in range(n):
                acc = mean[i]
                for j in range(i + 1):
                    acc += L[i, j] * zv[j]
                out[i] = acc
            return True
        jitter = scale * 1e-12 if jitter == 0.0 else jitter * 100.0
    return False


@njit(cache=True)
def ffbs_core(yc, load, obs_var, rng, states):
    """Joint draw of the state history for a random-walk state space.

    Observation t: yc[t] = load[t] . s_t + e_t, e_t ~ N(0, obs_var[t]);
    state: s_t = s_{t-1} + N(0, I), s_0 = 0 exactly. Rows of ``load``
    that are entirely zero skip the measurement update. Returns the
    first time index at which filtering lost positive definiteness, or
    -1 on success (states is filled in place, T x K).
    """
    T, K = load.shape
    a = np.zeros((T, K))
    P = np.zeros((T, K, K))
    ap = np.zeros(K)
    Pp = np.zeros((K, K))
    u = np.empty(K)
    for t in range(T):
        # predict: random walk with unit innovation covariance
        if t == 0:
            for i in range(K):
                for j in range(K):
                    Pp[i, j] = 1.0 if i == j else 0.0
                ap[i] = 0.0
        else:
            for i in range(K):
                ap[i] = a[t - 1, i]
                for j in range(K):
                    Pp[i, j] = P[t - 1, i, j]
                Pp[i, i] += 1.0
        l = load[t]
        active = False
        for j in range(K):
            if l[j] != 0.0:
                active = True
                break
        if not active:
            for i in range(K):
                a[t, i] = ap[i]
                for j in range(K):
                    P[t, i, j] = Pp[i, j]
            continue
        # scalar-observation update in Joseph (symmetric rank) form
        F = obs_var[t]
        for i in range(K):
            s = 0.0
            for j in range(K):
                s += Pp[i, j] * l[j]
            u[i] = s
        for i in range(K):
            F += l[i] * u[i]
        if F <= 0.0:
            return t
        v = yc[t]
        for i in range(K):
            v -= l[i] * ap[i]
        for i in range(K):
            ki = u[i] / F
            a[t, i] = ap[i] + ki * v
        for i in range(K):
            ki = u[i] / F
            for j in range(i, K):
                kj = u[j] / F
                pij = Pp[i, j] - ki * u[j] - u[i] * kj + F * ki * kj
                P[t, i, j] = pij
                P[t, j, i] = pij
    # backward sampling
    ok = _chol_draw(P[T - 1], a[T - 1], rng, states[T - 1])
    if not ok:
        return T - 1
    C = np.empty((K, K))
    Ls = np.empty((K, K))
    Y = np.empty((K, K))
    mean = np.empty(K)
    S = np.empty((K, K))
    for t in range(T - 2, -1, -1):
        for i in range(K):
            for j in range(K):
                S[i, j] = P[t, i, j]
            S[i, i] += 1.0
        if not _chol_lower(S, Ls):
            return t
        # Y = Ls^{-1} P_t  (forward substitution, column blocks)
        for c in range(K):
            for i in range(K):
                s = P[t, i, c]
                for j in range(i):
                    s -= Ls[i, j] * Y[j, c]
                Y[i, c] = s / Ls[i, i]
        # conditional covariance C = P_t - Y'Y; equals the gain P_t (P_t+I)^{-1}
        YtY = np.dot(Y.T, Y)
        for i in range(K):
            for j in range(i, K):
                s = P[t, i, j] - YtY[i, j]
                C[i, j] = s
                C[j, i] = s
        for i in range(K):
            s = a[t, i]
            for j in range(K):
                s += C[i, j] * (states[t + 1, j] - a[t, j])
            mean[i] = s
        if not _chol_draw(C, mean, rng, states[t]):
            return t
    return -1


@njit(cache=True)
def sv_mixture_indicators(resid, probs, means, variances, rng, out):
    """Component draws for the log chi-square(1) mixture approximation."""
    T = resid.shape[0]
    n = probs.shape[0]
    w = np.empty(n)
    for t in range(T):
        tot = 0.0
        for i in range(n):
            d = resid[t] - means[i]
            w[i] = probs[i] * np.exp(-0.5 * d * d / variances[i]) / np.sqrt(variances[i])
            tot += w[i]
        u = rng.random() * tot
        acc = 0.0
        pick = n - 1
        for i in range(n):
            acc += w[i]
            if u <= acc:
                pick = i
                break
        out[t] = pick
    return out


@njit(cache=True)
def sv_ffbs(obs, obs_mean, obs_var, mu, rho, sig2, rng, h):
    """Scalar-state FFBS for the linearized volatility model.

    obs[t] = h_t + N(obs_mean[t], obs_var[t]);
    h_t = mu + rho (h_{t-1} - mu) + N(0, sig2), stationary start.
    """
    T = obs.shape[0]
    af = np.empty(T)
    pf = np.empty(T)
    ap = mu
    pp = sig2 / (1.0 - rho * rho)
    for t in range(T):
        if t > 0:
            ap = mu + rho * (af[t - 1] - mu)
            pp = rho * rho * pf[t - 1] + sig2
        F = pp + obs_var[t]
        k = pp / F
        v = obs[t] - obs_mean[t] - ap
        af[t] = ap + k * v
        pf[t] = (1.0 - k) * (1.0 - k) * pp + k * k * obs_var[t]
    h[T - 1] = af[T - 1] + np.sqrt(pf[T - 1]) * rng.standard_normal()
    for t in range(T - 2, -1, -1):
        prec = 1.0 / pf[t] + rho * rho / sig2
        var = 1.0 / prec
        m = var * (af[t] / pf[t] + rho * (h[t + 1] - mu) / sig2 + rho * rho * mu / sig2)
        h[t] = m + np.sqrt(var) * rng.standard_normal()
    return h
