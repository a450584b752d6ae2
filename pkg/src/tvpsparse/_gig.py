"""Generalized inverse Gaussian rejection sampler.

Implements a ratio-of-uniforms sampler (with and without mode shift)
plus a three-piece hat for the small-omega, order-below-one region,
so that draws stay cheap over every parameter regime the shrinkage
full conditionals produce. Works on the two-parameter standard form

    g(x) ~ x^(lam-1) * exp(-(omega/2) * (x + 1/x)),   x > 0,

with lam >= 0; negative orders are handled by inversion and general
(p, a, b) parameters by rescaling with sqrt(b/a).
"""

import math

import numpy as np

from ._compat import njit

# relative inflation of ratio-of-uniforms bounds; guards against the
# bounding box being fractionally undersized through root-finding error
_BOUND_PAD = 1.0 + 1e-9


@njit(cache=True)
def _gig_mode(lam, omega):
    # hypot keeps the root alive when omega^2 underflows (omega ~ 1e-162
    # already loses it), and is cancellation-safe in both regimes
    if lam >= 1.0:
        return (math.hypot(lam - 1.0, omega) + (lam - 1.0)) / omega
    return omega / (math.hypot(1.0 - lam, omega) + (1.0 - lam))


@njit(cache=True)
def _log_g(x, lam, omega):
    return (lam - 1.0) * math.log(x) - 0.5 * omega * (x + 1.0 / x)


@njit(cache=True)
def _rou_no_shift(lam, omega, rng):
    """Ratio of uniforms on {(u,v): 0 < u <= sqrt(g(v/u))}."""
    m = _gig_mode(lam, omega)
    lgm = _log_g(m, lam, omega)
    # maximizer of x^2 g(x)
    xp = (math.sqrt((lam + 1.0) ** 2 + omega * omega) + (lam + 1.0)) / omega
    vmax = xp * math.exp(0.5 * (_log_g(xp, lam, omega) - lgm)) * _BOUND_PAD
    while True:
        u = rng.random()
        if u <= 0.0:
            continue
        x = vmax * rng.random() / u
        if 2.0 * math.log(u) <= _log_g(x, lam, omega) - lgm:
            return x


@njit(cache=True)
def _rou_shift(lam, omega, rng):
    """Mode-shifted ratio of uniforms; efficient for concentrated densities."""
    m = _gig_mode(lam, omega)
    lgm = _log_g(m, lam, omega)
    # stationary points of (x-m)^2 g(x) solve x^3 + c2 x^2 + c1 x + c0 = 0
    c2 = -(2.0 * (lam + 1.0) / omega + m)
    c1 = 2.0 * (lam - 1.0) * m / omega - 1.0
    c0 = m
    pp = c1 - c2 * c2 / 3.0
    qq = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    sp = math.sqrt(-pp / 3.0)
    cosarg = -qq / (2.0 * sp ** 3)
    if cosarg > 1.0:
        cosarg = 1.0
    elif cosarg < -1.0:
        cosarg = -1.0
    th = math.acos(cosarg) / 3.0
    x_hi = 2.0 * sp * math.cos(th) - c2 / 3.0
    x_lo = 2.0 * sp * math.cos(th - 2.0 * math.pi / 3.0) - c2 / 3.0
    # polish with Newton on 2 + (x-m) dlog g(x) = 0
    for _ in range(3):
        for which in range(2):
            x = x_hi if which == 0 else x_lo
            dl = (lam - 1.0) / x - 0.5 * omega + 0.5 * omega / (x * x)
            d2 = -(lam - 1.0) / (x * x) - omega / (x ** 3)
            r = 2.0 + (x - m) * dl
            dr = 2.0 * dl + (x - m) * d2
            if dr != 0.0:
                xn = x - r / dr
                if which == 0 and xn > m:
                    x_hi = xn
                elif which == 1 and 0.0 < xn < m:
                    x_lo = xn
    if not (0.0 < x_lo < m < x_hi):
        return _rou_no_shift(lam, omega, rng)
    v_hi = (x_hi - m) * math.exp(0.5 * (_log_g(x_hi, lam, omega) - lgm)) * _BOUND_PAD
    v_lo = (x_lo - m) * math.exp(0.5 * (_log_g(x_lo, lam, omega) - lgm)) * _BOUND_PAD
    while True:
        u = rng.random()
        if u <= 0.0:
            continue
        v = v_lo + (v_hi - v_lo) * rng.random()
        x = m + v / u
        if x > 0.0 and 2.0 * math.log(u) <= _log_g(x, lam, omega) - lgm:
            return x


@njit(cache=True)
def _three_piece(lam, omega, rng):
    """Piecewise hat for lam in [0,1) and small omega.

    Pieces: constant g(mode) on (0, x0]; exp(-omega) * x^(lam-1) on
    (x0, x1] (a global majorant since x + 1/x >= 2); exponential tail
    x1^(lam-1) * exp(-omega x / 2) on (x1, inf).
    """
    m = _gig_mode(lam, omega)
    x0 = omega / (1.0 - lam)
    x1 = 2.0 / omega
    lx0 = math.log(x0)
    lx1 = math.log(x1)
    k0 = math.exp(_log_g(m, lam, omega))
    a0 = k0 * x0
    if x1 <= x0:
        x1 = x0
        lx1 = lx0
        a1 = 0.0
        dlog = 0.0
    else:
        # anchor at x1: exponents stay bounded even when the piece
        # spans hundreds of log-units (extreme a/b ratios)
        dlog = lx1 - lx0
        if lam > 0.0:
            a1 = -math.exp(-omega + lam * lx1) * math.expm1(-lam * dlog) / lam
        else:
            a1 = math.exp(-omega) * dlog
    a2 = math.exp((lam - 1.0) * lx1) * (2.0 / omega) * math.exp(-0.5 * omega * x1)
    total = a0 + a1 + a2
    while True:
        s = total * rng.random()
        if s <= a0:
            x = x0 * rng.random()
            log_h = math.log(k0)
        elif s <= a0 + a1:
            u = rng.random()
            if lam > 0.0:
                t = u + (1.0 - u) * math.exp(-lam * dlog)
                if t <= 0.0:
                    continue
                x = math.exp(lx1 + math.log(t) / lam)
            else:
                x = math.exp(lx0 + u * dlog)
            log_h = -omega + (lam - 1.0) * math.log(x)
        else:
            x = x1 + (2.0 / omega) * rng.standard_exponential()
            log_h = (lam - 1.0) * lx1 - 0.5 * omega * x
        if x <= 0.0 or x == math.inf:
            continue
        if math.log(rng.random()) <= _log_g(x, lam, omega) - log_h:
            return x


@njit(cache=True)
def _gig_standard(lam, omega, rng):
    if lam < 1.0 and omega <= min(0.5, (2.0 / 3.0) * math.sqrt(1.0 - lam)):
        return _three_piece(lam, omega, rng)
    if lam > 2.0 or omega > 3.0:
        return _rou_shift(lam, omega, rng)
    return _rou_no_shift(lam, omega, rng)


@njit(cache=True)
def _gig_draw_one(p, a, b, rng):
    # sqrt before multiplying: a*b underflows for near-denormal inputs
    sa = math.sqrt(a)
    sb = math.sqrt(b)
    omega = sa * sb
    eta = sb / sa
    if p >= 0.0:
        return eta * _gig_standard(p, omega, rng)
    return eta / _gig_standard(-p, omega, rng)


@njit(cache=True)
def _gig_draw_many(p, a, b, rng, out):
    for i in range(out.shape[0]):
        out[i] = _gig_draw_one(p[i], a[i], b[i], rng)


def gig_draw(p: np.ndarray, a: np.ndarray, b: np.ndarray, rng) -> np.ndarray:
    """Vector of GIG(p_i, a_i, b_i) draws; inputs must be pre-validated."""
    out = np.empty(p.shape[0])
    _gig_draw_many(p, a, b, rng, out)
    return out
