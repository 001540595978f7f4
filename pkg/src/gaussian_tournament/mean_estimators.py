"""One-dimensional mean estimators with subgaussian deviations.

``psi_delta`` is the confidence-``delta`` estimator used everywhere else in
the package.  Median-of-means is the default; the trimmed mean exists for
cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (ConfigError, InadmissibleDeltaError, InsufficientSamplesError,
                     NonFiniteInputError)

C0_DEFAULT = 1.0 / 16.0
BLOCK_FACTOR = 8.0
KINDS = ("median-of-means", "trimmed-mean")


def _log_two_over(delta):
    return math.log(2.0 / delta)


def block_count(delta, min_block=1, log_term=None):
    """``max(min_block, ceil(8 ln(2/delta)))``.

    ``log_term`` may be given instead of ``delta`` when ``ln(2/delta)`` is
    known exactly (the chained estimators use ``delta = 2 exp(-a)``).
    """
    lt = _log_two_over(delta) if log_term is None else float(log_term)
    # guard against 8*ln(2/delta) landing a hair above an integer
    k = math.ceil(BLOCK_FACTOR * lt - 1e-9)
    return max(int(min_block), k, 1)


def delta_floor(n, c0=C0_DEFAULT):
    return 2.0 * math.exp(-c0 * n)


def check_delta(delta, n, c0=C0_DEFAULT):
    if not 0.0 < delta < 1.0:
        raise InadmissibleDeltaError("delta must lie in (0, 1)", delta=delta)
    floor = delta_floor(n, c0)
    if delta < floor * (1 - 1e-12):
        raise InadmissibleDeltaError(
            f"delta={delta:.3g} is below the admissible floor 2exp(-c0 N)={floor:.3g}",
            delta=delta, floor=floor, n=n, c0=c0)


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str = "median-of-means"
    delta: float = 0.01
    min_block: int = 1
    c0: float = C0_DEFAULT
    c_trim: float = 2.0
    n_blocks: int | None = None
    n_trim: int | None = None

    def __post_init__(self):
        aliases = {"mom": "median-of-means", "trimmed": "trimmed-mean"}
        object.__setattr__(self, "kind", aliases.get(self.kind, self.kind))
        if self.kind not in KINDS:
            raise ConfigError(f"unknown estimator kind {self.kind!r}", kind=self.kind)
        if not 0.0 < self.delta < 1.0:
            raise InadmissibleDeltaError("delta must lie in (0, 1)", delta=self.delta)
        if self.min_block < 1 or self.c0 <= 0 or self.c_trim <= 0:
            raise ConfigError("min_block >= 1, c0 > 0 and c_trim > 0 are required")

    @property
    def blocks(self):
        return self.n_blocks or block_count(self.delta, self.min_block)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _as_samples(samples):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        x = x.reshape(-1)
    if x.size == 0:
        raise InsufficientSamplesError("no samples", n=0)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("samples contain NaN or inf",
                                  n_bad=int(np.count_nonzero(~np.isfinite(x))))
    return x


def median_of_means(samples, delta=0.01, *, n_blocks=None, min_block=1, c0=C0_DEFAULT,
                    seed=None):
    """Median of ``k`` contiguous block means, ``k = ceil(8 ln(2/delta))``.

    With ``seed`` the samples are shuffled first.  ``n_blocks`` overrides
    the block count (and skips the admissibility check on ``delta``).
    """
    x = _as_samples(samples)
    n = x.size
    if n_blocks is None:
        check_delta(delta, n, c0)
        k = block_count(delta, min_block)
    else:
        k = int(n_blocks)
    if k < 1 or n < k:
        raise InsufficientSamplesError("insufficient samples for confidence",
                                       n=n, blocks=k, delta=delta)
    if seed is not None:
        x = np.random.default_rng(seed).permutation(x)
    return float(kernels.mom_columns(x[:, None], k)[0])


def mom_matrix(Z, k):
    """Column-wise median-of-means of ``Z`` (samples along axis 0) with ``k`` blocks."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if k < 1 or Z.shape[0] < k:
        raise InsufficientSamplesError("insufficient samples for confidence",
                                       n=Z.shape[0], blocks=k)
    if Z.shape[1] == 0:
        return np.zeros(0)
    return kernels.mom_columns(Z, int(k))


def trimmed_mean(samples, delta=0.01, *, c_trim=2.0, n_trim=None, c0=C0_DEFAULT, seed=None):
    """Drop the ``ceil(c_trim ln(2/delta))`` extreme values on each side and average.

    ``seed`` is accepted for interface parity; order does not matter here.
    """
    del seed
    x = _as_samples(samples)
    if n_trim is None:
        check_delta(delta, x.size, c0)
        m = math.ceil(c_trim * _log_two_over(delta) - 1e-9)
    else:
        m = int(n_trim)
    if 2 * m >= x.size:
        raise InsufficientSamplesError("trimming would remove all samples", n=x.size, trim=m)
    if m == 0:
        return float(x.mean())
    part = np.partition(x, (m - 1, x.size - m))
    return float(part[m:x.size - m].mean())


def psi_delta(samples, spec: EstimatorSpec, seed=None):
    if spec.kind == "median-of-means":
        return median_of_means(samples, spec.delta, n_blocks=spec.n_blocks,
                               min_block=spec.min_block, c0=spec.c0, seed=seed)
    return trimmed_mean(samples, spec.delta, c_trim=spec.c_trim, n_trim=spec.n_trim, c0=spec.c0)
