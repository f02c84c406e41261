"""Dependent labeled series from a logistic model with AR(1) latent drivers.

Covariates follow a stationary AR(1) process ``S_t = U'_t`` with lag-one
autocorrelation ``phi_prime``; labels are ``Bernoulli(logistic(gamma *
H_delta(S_t) + U_t))`` where ``U_t`` is an independent AR(1) process with
autocorrelation ``phi``. ``gamma = 0`` is the null of no association.

Settings:
    A  phi = phi_prime = 0       (IID pairs)
    B  phi = 0, phi_prime > 0    (autocorrelated covariates only)
    C  phi > 0, phi_prime > 0    (autocorrelated labels given covariates)
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit

from .core import LabeledSeries, Rng

__all__ = [
    "SyntheticConfig",
    "SETTINGS",
    "simulate_ar1",
    "hard_threshold",
    "logistic",
    "generate",
]

# (phi, phi_prime) per dependence setting
SETTINGS = {"A": (0.0, 0.0), "B": (0.0, 0.8), "C": (0.8, 0.8)}


@dataclass(frozen=True)
class SyntheticConfig:
    n: int
    gamma: float = 0.0
    delta: float = 0.25
    phi: float = 0.0
    phi_prime: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        for name in ("phi", "phi_prime"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def for_setting(cls, setting: str, n: int, **kw) -> SyntheticConfig:
        phi, phi_prime = SETTINGS[setting.upper()]
        return cls(n=n, phi=phi, phi_prime=phi_prime, **kw)

    def with_seed(self, seed: int) -> SyntheticConfig:
        return replace(self, seed=seed)


def logistic(x):
    return expit(x)


def simulate_ar1(n: int, phi: float, rng: Rng | np.random.Generator) -> np.ndarray:
    """Stationary AR(1) with unit marginal variance.

    ``U_0 ~ N(0, 1)`` and ``U_t = phi * U_{t-1} + sqrt(1 - phi^2) * eps_t``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= phi <= 1.0:
        raise ValueError("phi must lie in [0, 1]")
    gen = rng.generator() if isinstance(rng, Rng) else rng
    eps = gen.standard_normal(n)
    if phi == 0.0:
        return eps
    if phi == 1.0:
        return np.full(n, eps[0])
    drive = eps.copy()
    drive[1:] *= np.sqrt(1.0 - phi * phi)
    return lfilter([1.0], [1.0, -phi], drive)


def hard_threshold(s, delta: float):
    """Zero out values with ``|s| < delta``; scalars in, scalars out."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    arr = np.asarray(s, dtype=float)
    out = np.where(np.abs(arr) < delta, 0.0, arr)
    return float(out) if out.ndim == 0 else out


def generate(config: SyntheticConfig, rng: Rng | None = None) -> LabeledSeries:
    """Draw one series of length ``config.n``.

    Streams 0, 1, 2 of ``rng`` (default ``Rng(config.seed)``) drive the
    covariate AR(1), the latent label AR(1) and the Bernoulli draws.
    """
    rng = Rng(config.seed) if rng is None else rng
    s = simulate_ar1(config.n, config.phi_prime, rng.child(0))
    u = simulate_ar1(config.n, config.phi, rng.child(1))
    p = logistic(config.gamma * hard_threshold(s, config.delta) + u)
    y = (rng.child(2).generator().random(config.n) < p).astype(np.int8)
    return LabeledSeries(np.arange(config.n), s, y)
