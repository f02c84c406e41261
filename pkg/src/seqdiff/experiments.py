"""Monte Carlo studies of validity, power and local posterior differences.

Every trial draws its data from ``Rng(base_seed).child(trial)`` and its
null replicates from a stream keyed by the trial and the null model, so a
study is reproducible from ``(sweep, base_seed)`` regardless of the number
of worker processes. Cells that share generator parameters share data
(common random numbers), which sharpens between-cell comparisons.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import integrate, stats

from .core import Rng, block_splits
from .dtest import TestConfig, local_test, run_test
from .regressors import fit_nw
from .synthgen import SETTINGS, SyntheticConfig, generate, hard_threshold, logistic

__all__ = [
    "ExperimentSweep",
    "QQTable",
    "ConfidenceBand",
    "PowerRow",
    "LPDCurves",
    "binomial_band",
    "clopper_pearson",
    "qq_deviations",
    "mc_confidence_band",
    "run_validity",
    "run_power",
    "run_local_validity",
    "run_lpd_recovery",
    "true_posterior",
    "true_prior",
    "true_lpd",
    "oracle_posterior_difference",
]

SWEEP_PARAMS = ("gamma", "phi", "phi_prime", "t1_size")
# replicate streams sit beside the data streams 0-2 used by `generate`
_NULL_STREAM = {"mc_bootstrap": 10, "permutation": 11}
_LOCAL_STREAM = 12


@dataclass(frozen=True)
class ExperimentSweep:
    """One setting, one null model, one parameter swept over ``values``.

    Parameters not swept take the values given here; ``phi``/``phi_prime``
    default to those of ``setting`` unless set explicitly.
    """

    setting: str = "C"
    param: str = "gamma"
    values: tuple[float, ...] = (0.0,)
    trials: int = 500
    base_seed: int = 0
    test: TestConfig = field(default_factory=TestConfig)
    gamma: float = 0.0
    delta: float = 0.25
    phi: float | None = None
    phi_prime: float | None = None
    t1_size: int = 250
    t2_size: int = 250
    v_size: int = 250

    def __post_init__(self):
        if self.setting.upper() not in SETTINGS:
            raise ValueError(f"setting must be one of {sorted(SETTINGS)}, got {self.setting!r}")
        object.__setattr__(self, "setting", self.setting.upper())
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"param must be one of {SWEEP_PARAMS}, got {self.param!r}")
        vals = tuple(float(v) for v in np.atleast_1d(self.values))
        if not vals:
            raise ValueError("parameter grid is empty")
        object.__setattr__(self, "values", vals)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        phi, phi_prime = SETTINGS[self.setting]
        if self.phi is None:
            object.__setattr__(self, "phi", phi)
        if self.phi_prime is None:
            object.__setattr__(self, "phi_prime", phi_prime)

    def cell(self, value: float) -> dict:
        """Generator and size parameters for one grid value."""
        p = dict(gamma=self.gamma, delta=self.delta, phi=self.phi, phi_prime=self.phi_prime,
                 t1_size=self.t1_size, t2_size=self.t2_size, v_size=self.v_size)
        p[self.param] = int(value) if self.param == "t1_size" else float(value)
        return p


def _trial_data(cell: dict, base_seed: int, trial: int):
    n = cell["t1_size"] + cell["t2_size"] + cell["v_size"]
    cfg = SyntheticConfig(n=n, gamma=cell["gamma"], delta=cell["delta"],
                          phi=cell["phi"], phi_prime=cell["phi_prime"])
    data = generate(cfg, Rng(base_seed).child(trial))
    return data, block_splits(cell["t1_size"], cell["t2_size"], cell["v_size"])


def _one_trial(args) -> float:
    cell, base_seed, trial, test = args
    data, splits = _trial_data(cell, base_seed, trial)
    rng = Rng(base_seed).child(trial, _NULL_STREAM[test.null_model])
    return run_test(data, splits, test, rng).p_value


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def trial_pvalues(sweep: ExperimentSweep, value: float, workers: int = 1) -> np.ndarray:
    cell = sweep.cell(value)
    jobs = [(cell, sweep.base_seed, t, sweep.test) for t in range(sweep.trials)]
    return np.asarray(_map(_one_trial, jobs, workers))


# --- calibration -----------------------------------------------------------

def binomial_band(n: int, p: float = 0.05, z: float = 1.96) -> tuple[float, float]:
    """Normal-approximation band ``p +/- z sqrt(p(1-p)/n)`` for a rejection rate."""
    half = z * np.sqrt(p * (1 - p) / n)
    return p - half, p + half


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True, eq=False)
class QQTable:
    pvalues: np.ndarray  # sorted
    quantiles: np.ndarray
    deviations: np.ndarray


def qq_deviations(pvalues) -> QQTable:
    """Sorted p-values minus the uniform plotting positions ``i / (n + 1)``."""
    p = np.sort(np.asarray(pvalues, dtype=float))
    q = np.arange(1, p.size + 1) / (p.size + 1)
    return QQTable(p, q, p - q)


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    """Envelopes of QQ deviations for ``trials`` uniform deviates.

    ``lower``/``upper`` are pointwise quantiles. ``sim_lower``/``sim_upper``
    widen them to a simultaneous band: the same fraction ``level`` of the
    simulated curves lies entirely inside.
    """

    quantiles: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    center: np.ndarray
    sim_lower: np.ndarray
    sim_upper: np.ndarray
    level: float

    def contains(self, deviations, simultaneous: bool = True) -> np.ndarray:
        lo, hi = (self.sim_lower, self.sim_upper) if simultaneous else (self.lower, self.upper)
        d = np.asarray(deviations)
        return (d >= lo) & (d <= hi)


def mc_confidence_band(
    trials: int = 500, sims: int = 10_000, level: float = 0.95, rng: Rng | None = None,
    replicates: int | None = None,
) -> ConfidenceBand:
    """QQ-deviation envelopes from ``sims`` samples of ``trials`` null p-values.

    With ``replicates=B`` the null p-values are drawn from the law of a
    Monte Carlo p-value with ``B`` replicates, uniform on
    ``{1/(B+1), ..., 1}``; otherwise they are continuous uniforms.
    """
    rng = Rng(0) if rng is None else rng
    gen = rng.generator()
    q = np.arange(1, trials + 1) / (trials + 1)
    dev = np.empty((sims, trials))
    chunk = max(1, 2_000_000 // trials)
    for start in range(0, sims, chunk):
        stop = min(sims, start + chunk)
        if replicates is None:
            u = gen.random((stop - start, trials))
        else:
            u = gen.integers(1, replicates + 2, (stop - start, trials)) / (replicates + 1)
        dev[start:stop] = np.sort(u, axis=1) - q
    tail = (1 - level) / 2
    lower, upper = np.quantile(dev, [tail, 1 - tail], axis=0)
    center = dev.mean(axis=0)

    # simultaneous band: a curve lies inside the band built from order
    # statistics m and sims-1-m at every quantile iff its most extreme
    # pointwise rank is >= m; pick the largest m with enough coverage
    ranks = dev.argsort(axis=0).argsort(axis=0)
    extreme = np.minimum(ranks, sims - 1 - ranks).min(axis=1)
    counts = np.bincount(extreme, minlength=sims)
    inside = np.cumsum(counts[::-1])[::-1] / sims  # inside[m] = P(extreme >= m)
    m = int(np.flatnonzero(inside >= level).max())
    ordered = np.sort(dev, axis=0)
    sim_lo, sim_hi = ordered[m], ordered[sims - 1 - m]
    return ConfidenceBand(q, lower, upper, center, sim_lo, sim_hi, level)


# --- studies ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ValidityResult:
    setting: str
    null_model: str
    pvalues: np.ndarray
    qq: QQTable
    rejection_rate: float


def run_validity(sweep: ExperimentSweep, workers: int = 1, level: float = 0.05) -> ValidityResult:
    """P-values of ``sweep.trials`` null data sets (gamma forced to 0)."""
    sweep = replace(sweep, gamma=0.0, param="gamma", values=(0.0,))
    p = trial_pvalues(sweep, 0.0, workers)
    return ValidityResult(sweep.setting, sweep.test.null_model, p, qq_deviations(p),
                          float(np.mean(p <= level)))


@dataclass(frozen=True)
class PowerRow:
    value: float
    trials: int
    rejections: int
    power: float
    ci_low: float
    ci_high: float


def run_power(sweep: ExperimentSweep, workers: int = 1, level: float = 0.05) -> list[PowerRow]:
    """Rejection fraction at ``level`` per grid value, with Clopper-Pearson 95% CIs."""
    rows = []
    for value in sweep.values:
        p = trial_pvalues(sweep, value, workers)
        k = int(np.count_nonzero(p <= level))
        lo, hi = clopper_pearson(k, p.size)
        rows.append(PowerRow(value, p.size, k, k / p.size, lo, hi))
    return rows


def _one_local(args) -> float:
    cell, base_seed, trial, test, center, eps = args
    data, splits = _trial_data(cell, base_seed, trial)
    rng = Rng(base_seed).child(trial, _LOCAL_STREAM)
    return local_test(data, splits, center, eps, test, rng).p_value


def run_local_validity(
    sweep: ExperimentSweep, center: float = 0.0, epsilon: float = 0.5, workers: int = 1
) -> np.ndarray:
    """Local-test p-values over ``sweep.trials`` data sets at ``sweep.gamma``."""
    cell = sweep.cell(sweep.values[0]) if sweep.param != "gamma" else sweep.cell(sweep.gamma)
    jobs = [(cell, sweep.base_seed, t, sweep.test, center, epsilon) for t in range(sweep.trials)]
    return np.asarray(_map(_one_local, jobs, workers))


# --- true posterior under the synthetic model --------------------------------

_GH_X, _GH_W = np.polynomial.hermite_e.hermegauss(64)
_GH_W = _GH_W / _GH_W.sum()


def true_posterior(s, gamma: float, delta: float) -> np.ndarray:
    """``P(Y=1 | S=s) = E_U[logistic(gamma H_delta(s) + U)]``, ``U ~ N(0,1)``."""
    sig = gamma * np.atleast_1d(hard_threshold(np.asarray(s, dtype=float), delta))
    return logistic(sig[:, None] + _GH_X[None, :]) @ _GH_W


def true_prior(gamma: float, delta: float) -> float:
    """``P(Y=1)`` integrating the posterior against the standard normal."""
    inner = stats.norm.cdf(delta) - stats.norm.cdf(-delta)
    mid = inner * float(true_posterior(0.0, gamma, delta)[0])

    def f(x):
        return float(true_posterior(x, gamma, delta)[0]) * stats.norm.pdf(x)

    left = integrate.quad(f, -np.inf, -delta, epsabs=1e-12, epsrel=1e-12)[0]
    right = integrate.quad(f, delta, np.inf, epsabs=1e-12, epsrel=1e-12)[0]
    return left + mid + right


def true_lpd(s, gamma: float, delta: float) -> np.ndarray:
    return true_posterior(s, gamma, delta) - true_prior(gamma, delta)


@dataclass(frozen=True, eq=False)
class LPDCurves:
    grid: np.ndarray
    sizes: tuple[int, ...]
    mean: np.ndarray  # (len(sizes), len(grid))
    sd: np.ndarray
    truth: np.ndarray
    fallback_fraction: np.ndarray


def _one_lpd(args):
    cell, base_seed, trial, grid = args
    data, splits = _trial_data(cell, base_seed, trial)
    s1, y1 = data.covariates[splits.t1], data.labels[splits.t1]
    reg = fit_nw(s1, y1)
    prior = float(y1.mean())
    covered = reg.coverage(grid)
    lpd = np.where(covered, reg.predict(grid) - prior, 0.0)
    return lpd, ~covered


def run_lpd_recovery(
    sweep: ExperimentSweep,
    sizes: Sequence[int] = (250, 1000, 4000),
    grid: Sequence[float] | None = None,
    workers: int = 1,
) -> LPDCurves:
    """Mean and sd of estimated LPD curves across trials, per training size."""
    if not (sweep.gamma > 0 and sweep.delta > 0):
        raise ValueError("LPD recovery needs gamma > 0 and delta > 0")
    grid = np.linspace(-2, 2, 81) if grid is None else np.asarray(grid, dtype=float)
    means, sds, fb = [], [], []
    for n in sizes:
        cell = replace(sweep, param="t1_size", values=(n,)).cell(n)
        jobs = [(cell, sweep.base_seed, t, grid) for t in range(sweep.trials)]
        out = _map(_one_lpd, jobs, workers)
        lpd = np.array([o[0] for o in out])
        means.append(lpd.mean(axis=0))
        sds.append(lpd.std(axis=0, ddof=1) if len(out) > 1 else np.zeros(grid.size))
        fb.append(np.mean([o[1] for o in out], axis=0))
    return LPDCurves(grid, tuple(int(n) for n in sizes), np.array(means), np.array(sds),
                     true_lpd(grid, sweep.gamma, sweep.delta), np.array(fb))


# --- discrete oracle ---------------------------------------------------------

def oracle_posterior_difference(p_given_1, p_given_0, prior: float, s: int,
                                tol: float = 1e-12) -> tuple[float, float]:
    """Posterior difference at support point ``s`` computed two ways.

    Returns ``(bayes, scaled)`` where ``bayes = P(Y=1|s) - prior`` and
    ``scaled = (p1 - p0) / (p1 / (1 - prior) + p0 / prior)``; raises if they
    disagree by more than ``tol``.
    """
    p1 = np.asarray(p_given_1, dtype=float)
    p0 = np.asarray(p_given_0, dtype=float)
    if p1.shape != p0.shape:
        raise ValueError("class-conditional arrays must have the same shape")
    if np.any(p1 < 0) or np.any(p0 < 0):
        raise ValueError("densities must be non-negative")
    if not (np.isclose(p1.sum(), 1.0) and np.isclose(p0.sum(), 1.0)):
        raise ValueError("class-conditional densities must sum to 1")
    if not 0.0 < prior < 1.0:
        raise ValueError("prior must lie in (0, 1)")
    a, b = p1[s], p0[s]
    marginal = prior * a + (1 - prior) * b
    if marginal == 0:
        raise ValueError(f"zero total density at support point {s}")
    bayes = prior * a / marginal - prior
    scaled = (a - b) / (a / (1 - prior) + b / prior)
    if abs(bayes - scaled) > tol:
        raise AssertionError(f"identity violated at {s}: {bayes!r} != {scaled!r}")
    return float(bayes), float(scaled)


# --- output --------------------------------------------------------------

def write_rows(path: str | Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
