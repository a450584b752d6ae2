"""Non-centered design construction and state simulation.

The state block of every equation is a random walk with identity
innovation covariance starting from exactly zero, observed through
loadings that the constant parameter vector supplies. ``ffbs`` draws
the whole history jointly (Carter-Kohn style, covariance-form filter
with Joseph-stabilized updates).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import ffbs_core
from .dist_kernels import RngStream, _gen
from .errors import NumericalError, ParameterDomainError, ShapeError


@dataclass
class NcParamVector:
    """Constant block of an equation: initial coefficients and loadings.

    The concatenated order is (beta0, cov0, sqrt_v, sqrt_v_cov), i.e.
    all level terms first, then the loadings that multiply the
    standardized states. ``sqrt_v`` entries are sign-unrestricted.
    """

    beta0: np.ndarray
    sqrt_v: np.ndarray
    cov0: Optional[np.ndarray] = None
    sqrt_v_cov: Optional[np.ndarray] = None

    def __post_init__(self):
        self.beta0 = np.asarray(self.beta0, float)
        self.sqrt_v = np.asarray(self.sqrt_v, float)
        if (self.cov0 is None) != (self.sqrt_v_cov is None):
            raise ShapeError("cov0 and sqrt_v_cov must be supplied together")
        if self.cov0 is not None:
            self.cov0 = np.asarray(self.cov0, float)
            self.sqrt_v_cov = np.asarray(self.sqrt_v_cov, float)
        if self.beta0.shape != self.sqrt_v.shape:
            raise ShapeError("beta0 and sqrt_v must have matching length")
        if self.cov0 is not None and self.cov0.shape != self.sqrt_v_cov.shape:
            raise ShapeError("cov0 and sqrt_v_cov must have matching length")

    @property
    def n_cov(self) -> int:
        return 0 if self.cov0 is None else self.cov0.shape[0]

    @property
    def constants(self) -> np.ndarray:
        if self.cov0 is None:
            return self.beta0
        return np.concatenate([self.beta0, self.cov0])

    @property
    def loadings(self) -> np.ndarray:
        if self.sqrt_v_cov is None:
            return self.sqrt_v
        return np.concatenate([self.sqrt_v, self.sqrt_v_cov])

    def concat(self) -> np.ndarray:
        return np.concatenate([self.constants, self.loadings])

    @classmethod
    def from_concat(cls, alpha: np.ndarray, k: int, n_cov: int = 0) -> "NcParamVector":
        alpha = np.asarray(alpha, float)
        kw = k + n_cov
        if alpha.shape[0] != 2 * kw:
            raise ShapeError(f"expected length {2 * kw}, got {alpha.shape[0]}")
        const, load = alpha[:kw], alpha[kw:]
        if n_cov == 0:
            return cls(const, load)
        return cls(const[:k], load[:k], const[k:], load[k:])


@dataclass
class StateTrajectory:
    """History of standardized states; the t=0 value is pinned at zero."""

    tilde_beta: np.ndarray
    t0_value: np.ndarray = field(default=None)

    def __post_init__(self):
        self.tilde_beta = np.asarray(self.tilde_beta, float)
        if self.tilde_beta.ndim != 2:
            raise ShapeError("tilde_beta must be T x K_state")
        if self.t0_value is None:
            self.t0_value = np.zeros(self.tilde_beta.shape[1])


@dataclass
class NcDesign:
    """Per-draw regression design [W_t, states_t * W_t] and column norms."""

    Z: np.ndarray
    col_sq_norms: np.ndarray


def _stack_regressors(X: np.ndarray, contemp: Optional[np.ndarray]) -> np.ndarray:
    X = np.asarray(X, float)
    if X.ndim != 2:
        raise ShapeError("X must be T x K")
    if contemp is None:
        return X
    contemp = np.asarray(contemp, float)
    if contemp.ndim != 2 or contemp.shape[0] != X.shape[0]:
        raise ShapeError("contemporaneous block must be T x (i-1)")
    return np.hstack([X, contemp])


def build_design(
    X: np.ndarray,
    states: StateTrajectory,
    alpha: NcParamVector,
    contemp: Optional[np.ndarray] = None,
) -> NcDesign:
    """Assemble Z_t = [W_t', (states_t * W_t)'] for the current draw."""
    W = _stack_regressors(X, contemp)
    tb = states.tilde_beta
    if tb.shape != W.shape:
        raise ShapeError(f"states {tb.shape} do not match regressors {W.shape}")
    kw = W.shape[1]
    if alpha.concat().shape[0] != 2 * kw:
        raise ShapeError("parameter vector does not match design width")
    Z = np.hstack([W, tb * W])
    return NcDesign(Z=Z, col_sq_norms=(Z * Z).sum(axis=0))


def ffbs(
    y: np.ndarray,
    X: np.ndarray,
    alpha: NcParamVector,
    obs_var: np.ndarray,
    rng: RngStream,
    contemp: Optional[np.ndarray] = None,
) -> StateTrajectory:
    """Draw the standardized state history from its full conditional."""
    y = np.asarray(y, float)
    W = _stack_regressors(X, contemp)
    T, kw = W.shape
    if y.shape[0] != T:
        raise ShapeError("y and X disagree on T")
    obs_var = np.broadcast_to(np.asarray(obs_var, float), (T,)).copy()
    if np.any(obs_var <= 0):
        raise ParameterDomainError("observation variances must be positive")
    if alpha.constants.shape[0] != kw:
        raise ShapeError("parameter vector does not match design width")
    yc = y - W @ alpha.constants
    load = W * alpha.loadings
    states = np.empty((T, kw))
    bad_t = ffbs_core(yc, load, obs_var, _gen(rng), states)
    if bad_t >= 0:
        raise NumericalError(
            f"filter covariance lost positive definiteness at t={int(bad_t)}"
        )
    return StateTrajectory(tilde_beta=states)
