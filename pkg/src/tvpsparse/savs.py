"""Per-draw sparsification of parameter vectors and inclusion frequencies.

Each posterior draw of an equation's constant parameters is passed
through a signal-adaptive soft threshold: coordinate j survives only
if its magnitude stands up to the informativeness of its design
column. Inclusion probabilities are then simple retention frequencies
across draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ShapeError, UsageError
from .state_space import NcParamVector


@dataclass(frozen=True)
class SparsifiedDraw:
    """Thresholded parameter vector and its retention mask."""

    gamma_bar: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class PipTable:
    """Per-coefficient retention frequency over a set of draws."""

    pip: np.ndarray
    n_draws: int


def savs_sparsify(
    alpha: Union[NcParamVector, np.ndarray], col_sq_norms: np.ndarray
) -> SparsifiedDraw:
    """Soft-threshold one draw against its design column norms.

    gamma_j = sign(a_j) * ||Z_j||^-2 * max(|a_j|*||Z_j||^2 - |a_j|^-2, 0),
    so a coordinate is zeroed exactly when |a_j|^3 * ||Z_j||^2 <= 1.
    Zero coefficients and dead columns map to zero by convention.
    """
    vec = alpha.concat() if isinstance(alpha, NcParamVector) else np.asarray(alpha, float)
    nsq = np.asarray(col_sq_norms, float)
    if vec.shape != nsq.shape:
        raise ShapeError("alpha and column norms must have equal length")
    if not (np.all(np.isfinite(vec)) and np.all(np.isfinite(nsq))):
        raise UsageError("sparsifier inputs must be finite")
    aabs = np.abs(vec)
    # square then invert can overflow to inf for denormal alpha, which is
    # exactly the infinite penalty we want
    with np.errstate(divide="ignore", over="ignore"):
        penalty = np.where(aabs > 0.0, 1.0 / np.square(aabs), np.inf)
    surplus = np.maximum(aabs * nsq - penalty, 0.0)
    scale = np.where(nsq > 0.0, nsq, 1.0)
    gamma = np.sign(vec) * np.where(nsq > 0.0, surplus / scale, 0.0)
    return SparsifiedDraw(gamma_bar=gamma, mask=(gamma != 0.0).astype(np.int8))


def compute_pips(draws: Sequence[SparsifiedDraw]) -> PipTable:
    """Retention frequency per coefficient across draws."""
    if len(draws) == 0:
        raise UsageError("need at least one sparsified draw")
    dim = draws[0].mask.shape[0]
    counts = np.zeros(dim)
    for d in draws:
        if d.mask.shape[0] != dim:
            raise ShapeError("sparsified draws disagree on dimension")
        counts += d.mask
    return PipTable(pip=counts / len(draws), n_draws=len(draws))


def block_labels(k: int, n_cov: int = 0) -> list:
    """Block tag of each coordinate in the concatenated parameter order."""
    return (
        ["constant"] * k
        + ["cov-constant"] * n_cov
        + ["tv-loading"] * k
        + ["cov-loading"] * n_cov
    )
