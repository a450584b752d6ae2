"""Random-variate generators shared by every Gibbs step.

Thin wrappers over ``numpy.random.Generator`` plus a hand-rolled
generalized inverse Gaussian sampler (see ``_gig``). All samplers take
an :class:`RngStream` or a raw ``numpy.random.Generator``; streams are
counter-based (Philox) so that (seed, stream_id) pins the sequence and
distinct stream ids are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._gig import gig_draw
from .errors import ParameterDomainError

# arguments below this are lifted to the clamp so the conditionals stay
# proper when coefficients collapse; must sit near the denormal floor,
# anything larger visibly biases the local-scale draws under heavy shrinkage
GIG_CLAMP = 1e-300


@dataclass(frozen=True)
class GigParams:
    """Order p and rates (a on x, b on 1/x) of a GIG density."""

    p: float
    a: float
    b: float


@dataclass(frozen=True)
class InvGaussParams:
    mu: float
    lam: float


@dataclass
class RngStream:
    """Reproducible random stream keyed by (seed, stream_id).

    ``derive`` hands out child streams for parallel units of work
    (equations, replications, forecast origins) without any chance of
    overlap, via the seed-sequence spawn-key mechanism.
    """

    seed: int
    stream_id: int = 0
    _key: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.stream_id < 0:
            raise ParameterDomainError("stream_id must be nonnegative")
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id,) + tuple(self._key)
        )
        self.generator = np.random.Generator(np.random.Philox(ss))

    def derive(self, *indices: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self._key + tuple(indices))


def _gen(rng) -> np.random.Generator:
    return rng.generator if isinstance(rng, RngStream) else rng


def _validate_gig(p, a, b):
    # zero rates are lifted to GIG_CLAMP afterwards, which keeps every
    # nonnegative combination proper; only negatives or non-finite
    # parameters are genuinely outside the domain
    ok = np.isfinite(p) & np.isfinite(a) & np.isfinite(b) & (a >= 0) & (b >= 0)
    if not np.all(ok):
        raise ParameterDomainError(
            "GIG parameters outside the proper region: rates must be "
            "nonnegative and the order finite"
        )


def sample_gig(params: GigParams, rng) -> float:
    """One draw from the density ~ x^(p-1) exp(-(a x + b / x) / 2)."""
    return float(gig_rvs(params.p, params.a, params.b, rng))


def gig_rvs(p, a, b, rng, size=None):
    """Vectorized GIG draws; broadcasts (p, a, b) and clamps tiny rates."""
    p, a, b = np.broadcast_arrays(
        np.asarray(p, float), np.asarray(a, float), np.asarray(b, float)
    )
    _validate_gig(p, a, b)
    if size is not None and p.ndim == 0:
        p, a, b = (np.broadcast_to(x, (size,)) for x in (p, a, b))
    scalar = p.ndim == 0
    p = np.atleast_1d(p).astype(float).ravel()
    a = np.maximum(np.atleast_1d(a).astype(float).ravel(), GIG_CLAMP)
    b = np.maximum(np.atleast_1d(b).astype(float).ravel(), GIG_CLAMP)
    out = gig_draw(p, a, b, _gen(rng))
    return float(out[0]) if scalar else out


def sample_inv_gaussian(params: InvGaussParams, rng) -> float:
    """Draw with mean mu and variance mu^3 / lam."""
    if not (params.mu > 0 and params.lam > 0):
        raise ParameterDomainError("inverse Gaussian needs mu>0 and lam>0")
    return float(_gen(rng).wald(params.mu, params.lam))


def inv_gaussian_rvs(mu, lam, rng):
    mu = np.asarray(mu, float)
    if np.any(mu <= 0) or np.any(np.asarray(lam) <= 0):
        raise ParameterDomainError("inverse Gaussian needs mu>0 and lam>0")
    return _gen(rng).wald(mu, lam)


def rv_gamma(rng, shape, rate, size=None):
    if np.any(np.asarray(shape) <= 0) or np.any(np.asarray(rate) <= 0):
        raise ParameterDomainError("gamma needs shape>0 and rate>0")
    return _gen(rng).gamma(shape, 1.0 / np.asarray(rate, float), size=size)


def rv_inv_gamma(rng, shape, scale, size=None):
    """X ~ invGamma(shape, scale), i.e. 1/X ~ Gamma(shape, rate=scale)."""
    return 1.0 / rv_gamma(rng, shape, scale, size=size)


def rv_beta(rng, a, b, size=None):
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
        raise ParameterDomainError("beta needs a>0 and b>0")
    return _gen(rng).beta(a, b, size=size)


def rv_bernoulli(rng, prob, size=None):
    prob = np.asarray(prob, float)
    if np.any(prob < 0) or np.any(prob > 1):
        raise ParameterDomainError("bernoulli needs p in [0,1]")
    u = _gen(rng).random(size=size if size is not None else prob.shape or None)
    return (u < prob).astype(np.int64)


def rv_exponential(rng, rate, size=None):
    if np.any(np.asarray(rate) <= 0):
        raise ParameterDomainError("exponential needs rate>0")
    return _gen(rng).standard_exponential(size=size) / rate


def rv_normal(rng, mean, var, size=None):
    if np.any(np.asarray(var) < 0):
        raise ParameterDomainError("normal needs var>=0")
    return mean + np.sqrt(var) * _gen(rng).standard_normal(size=size)


def rv_uniform(rng, lo, hi, size=None):
    if np.any(np.asarray(lo) >= np.asarray(hi)):
        raise ParameterDomainError("uniform needs lo < hi")
    return lo + (hi - lo) * _gen(rng).random(size=size)


_STANDARD = {
    "gamma": rv_gamma,
    "inv_gamma": rv_inv_gamma,
    "beta": rv_beta,
    "bernoulli": rv_bernoulli,
    "exponential": rv_exponential,
    "normal": rv_normal,
    "uniform": rv_uniform,
}


def sample_standard(dist: str, params: tuple, rng, size=None):
    """Dispatch to one of the named standard families.

    ``dist`` is one of gamma(shape,rate), inv_gamma(shape,scale),
    beta(a,b), bernoulli(p), exponential(rate), normal(mean,var),
    uniform(lo,hi); ``params`` the corresponding tuple.
    """
    try:
        fn = _STANDARD[dist]
    except KeyError:
        raise ParameterDomainError(f"unknown distribution {dist!r}") from None
    return fn(rng, *params, size=size)


def trunc_normal_rvs(rng, mean, sd, lo, hi) -> float:
    """Inverse-CDF draw from N(mean, sd^2) truncated to (lo, hi)."""
    from scipy.special import ndtr, ndtri

    if sd <= 0 or lo >= hi:
        raise ParameterDomainError("need sd>0 and lo<hi")
    plo = ndtr((lo - mean) / sd)
    phi = ndtr((hi - mean) / sd)
    u = plo + (phi - plo) * _gen(rng).random()
    # saturate instead of returning +-inf when both tail probs collapse
    u = min(max(u, 1e-15), 1.0 - 1e-15)
    x = mean + sd * ndtri(u)
    return float(min(max(x, math.nextafter(lo, hi)), math.nextafter(hi, lo)))


def norm_logpdf(x, var) -> float:
    return -0.5 * (math.log(2.0 * math.pi * var) + (x * x) / var)
