"""Class-prior and class-posterior estimators.

The test only needs an object with ``predict`` and a ``local`` flag; the
Nadaraya-Watson estimator with the Epanechnikov kernel is the built-in.
Because its support is bounded, a prediction at ``s`` depends only on
training points within one bandwidth of ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .core import DataError

__all__ = [
    "BandwidthError",
    "PriorEstimate",
    "KernelRegressor",
    "PosteriorRegressor",
    "epanechnikov",
    "estimate_prior",
    "nw_bandwidth",
    "fit_nw",
    "predict",
]


class BandwidthError(DataError):
    """The rule-of-thumb bandwidth is undefined for the given covariates."""


class PosteriorRegressor(Protocol):
    local: bool

    def predict(self, s) -> np.ndarray: ...


@dataclass(frozen=True)
class PriorEstimate:
    value: float
    n: int


def estimate_prior(labels) -> PriorEstimate:
    y = np.asarray(labels)
    if y.size == 0:
        raise DataError("cannot estimate the class prior from an empty index set")
    return PriorEstimate(float(np.mean(y)), int(y.size))


def nw_bandwidth(train_s) -> float:
    """Sample standard deviation over ``n ** (1/5)``."""
    s = np.asarray(train_s, dtype=float)
    if s.size < 2:
        raise BandwidthError(
            f"bandwidth rule needs at least 2 covariates, got {s.size}; pass h explicitly"
        )
    sd = float(np.std(s, ddof=1))
    if not sd > 0:
        raise BandwidthError("covariates are constant (sd = 0); pass h explicitly")
    return sd / s.size ** 0.2


def epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


@dataclass(frozen=True, eq=False)
class KernelRegressor:
    train_s: np.ndarray
    train_y: np.ndarray
    h: float
    fallback: float
    local = True

    def weights(self, s) -> np.ndarray:
        """Kernel weight matrix of shape ``(len(s), n_train)``."""
        q = np.atleast_1d(np.asarray(s, dtype=float))
        return epanechnikov((q[:, None] - self.train_s[None, :]) / self.h)

    def predict(self, s):
        scalar = np.ndim(s) == 0
        w = self.weights(s)
        num = w @ self.train_y
        den = w.sum(axis=1)
        covered = den > 0
        out = np.full(den.shape, self.fallback)
        out[covered] = num[covered] / den[covered]
        # guard against 1 + eps from rounding in the ratio
        np.clip(out, 0.0, 1.0, out=out)
        return float(out[0]) if scalar else out

    def coverage(self, s) -> np.ndarray:
        """Boolean mask: True where the query has nonzero kernel mass."""
        return self.weights(s).sum(axis=1) > 0


def fit_nw(train_s, train_y, h: float | None = None) -> KernelRegressor:
    s = np.asarray(train_s, dtype=float).ravel()
    y = np.asarray(train_y, dtype=float).ravel()
    if s.size != y.size:
        raise DataError(f"train_s has {s.size} entries but train_y has {y.size}")
    if s.size == 0:
        raise DataError("cannot fit a regressor on zero points")
    if h is None:
        h = nw_bandwidth(s)
    elif not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    s.setflags(write=False)
    y.setflags(write=False)
    return KernelRegressor(s, y, float(h), float(y.mean()))


def predict(regressor: PosteriorRegressor, s):
    return regressor.predict(s)
