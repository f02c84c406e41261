"""Order-k binary Markov chain for the marginal label process.

Histories are encoded as integers whose binary expansion lists the k most
recent labels oldest first, so the newest label is the least significant
bit. ``"0011"`` therefore means ``y[t-4]=0, y[t-3]=0, y[t-2]=1, y[t-1]=1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import DataError, Rng

__all__ = [
    "MarkovLabelModel",
    "fit_markov",
    "sample_labels",
    "sample_label_batch",
    "transition_counts",
    "write_model_csv",
    "read_model_csv",
]

BURN_IN_PER_ORDER = 100
MAX_ORDER = 20


@dataclass(frozen=True, eq=False)
class MarkovLabelModel:
    """Fitted order-k chain.

    ``prob_one[h]`` is ``P(y_t = 1 | history h)``; ``kgram_dist[h]`` is the
    empirical frequency of history ``h`` among the k-grams of the fitting
    data and seeds sampling.
    """

    k: int
    prob_one: np.ndarray
    alpha: float = 0.5
    kgram_dist: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.prob_one, dtype=float)
        if not 0 <= self.k <= MAX_ORDER:
            raise ValueError(f"order k must lie in [0, {MAX_ORDER}], got {self.k}")
        if p.shape != (2 ** self.k,):
            raise ValueError(f"order {self.k} needs {2 ** self.k} probabilities, got {p.shape}")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        p.setflags(write=False)
        object.__setattr__(self, "prob_one", p)
        d = self.kgram_dist
        if d is None:
            d = self.stationary_distribution()
        d = np.asarray(d, dtype=float)
        if d.shape != p.shape or np.any(d < 0) or not np.isclose(d.sum(), 1.0):
            raise ValueError("kgram_dist must be a probability vector over histories")
        d.setflags(write=False)
        object.__setattr__(self, "kgram_dist", d)

    @property
    def n_states(self) -> int:
        return 2 ** self.k

    @property
    def burn_in(self) -> int:
        return BURN_IN_PER_ORDER * self.k

    def history_bits(self, h: int) -> str:
        return format(h, f"0{self.k}b") if self.k else ""

    def transition_matrix(self) -> np.ndarray:
        """Dense ``2^k x 2^k`` matrix over histories (k >= 1)."""
        m = self.n_states
        mask = m - 1
        P = np.zeros((m, m))
        for h in range(m):
            nxt = (h << 1) & mask
            P[h, nxt] += 1.0 - self.prob_one[h]
            P[h, nxt | 1] += self.prob_one[h]
        return P

    def stationary_distribution(self) -> np.ndarray:
        """Stationary law over histories of the fitted chain.

        For a reducible chain this returns the limit reached from the
        uniform start, which is one of possibly several stationary laws.
        """
        if self.k == 0:
            return np.ones(1)
        P = self.transition_matrix()
        pi = np.full(self.n_states, 1.0 / self.n_states)
        # power iteration with averaging handles periodic chains
        Q = 0.5 * (P + np.eye(self.n_states))
        for _ in range(10_000):
            nxt = pi @ Q
            if np.abs(nxt - pi).max() < 1e-14:
                pi = nxt
                break
            pi = nxt
        return pi / pi.sum()


def _as_runs(labels) -> list[np.ndarray]:
    if isinstance(labels, np.ndarray) and labels.ndim == 1:
        seqs = [labels]
    elif len(labels) and np.ndim(labels[0]) == 0:
        seqs = [np.asarray(labels)]
    else:
        seqs = [np.asarray(r) for r in labels]
    out = []
    for r in seqs:
        r = np.asarray(r).ravel()
        if np.any((r != 0) & (r != 1)):
            raise DataError("labels must be 0 or 1")
        out.append(r.astype(np.int64))
    return out


def _codes(run: np.ndarray, k: int) -> np.ndarray:
    """History code preceding each position ``t >= k`` of ``run``."""
    n = len(run) - k
    codes = np.zeros(n, dtype=np.int64)
    for j in range(k):
        codes = (codes << 1) | run[j : j + n]
    return codes


def transition_counts(labels, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Counts of ``(history -> 0)`` and ``(history -> 1)`` within each run."""
    m = 2 ** k
    to0 = np.zeros(m)
    to1 = np.zeros(m)
    for run in _as_runs(labels):
        if len(run) <= k:
            continue
        codes = _codes(run, k)
        nxt = run[k:]
        to1 += np.bincount(codes[nxt == 1], minlength=m)
        to0 += np.bincount(codes[nxt == 0], minlength=m)
    return to0, to1


def fit_markov(labels, k: int, alpha: float = 0.5, init: str = "empirical") -> MarkovLabelModel:
    """Smoothed maximum-likelihood fit of an order-k chain.

    ``labels`` is one label sequence or a list of contiguous runs;
    transitions are never counted across run boundaries. Each row is
    ``(n(h->1) + alpha) / (n(h->.) + 2 alpha)``. With ``alpha = 0`` an
    unobserved history falls back to the overall label frequency.

    ``init`` selects the law of the initial k-gram used when sampling:
    ``"empirical"`` (observed k-gram frequencies) or ``"stationary"``.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if not 0 <= k <= MAX_ORDER:
        raise ValueError(f"order k must lie in [0, {MAX_ORDER}]")
    if init not in ("empirical", "stationary"):
        raise ValueError("init must be 'empirical' or 'stationary'")
    runs = _as_runs(labels)
    if not any(len(r) > k for r in runs):
        total = sum(len(r) for r in runs)
        raise DataError(
            f"need a contiguous run longer than k={k} to fit the label chain, "
            f"got {total} labels"
        )
    to0, to1 = transition_counts(runs, k)
    tot = to0 + to1
    with np.errstate(invalid="ignore", divide="ignore"):
        p = (to1 + alpha) / (tot + 2 * alpha)
    undefined = ~np.isfinite(p)
    if undefined.any():
        p[undefined] = np.concatenate(runs).mean()

    kgram = None
    if init == "empirical":
        counts = np.zeros(2 ** k)
        for run in runs:
            if len(run) >= k:
                full = _codes(np.append(run, 0), k)
                counts += np.bincount(full, minlength=2 ** k)
        kgram = counts / counts.sum()
    return MarkovLabelModel(k=k, prob_one=p, alpha=float(alpha), kgram_dist=kgram)


def _simulate(model: MarkovLabelModel, init_codes: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Run ``len(init_codes)`` chains in lockstep from their initial histories."""
    mask = model.n_states - 1
    code = init_codes.astype(np.int64)
    out = np.empty(uniforms.shape, dtype=np.int8)
    p = model.prob_one
    for t in range(uniforms.shape[1]):
        y = (uniforms[:, t] < p[code]).astype(np.int64)
        out[:, t] = y
        code = ((code << 1) | y) & mask
    return out


def _draws(model: MarkovLabelModel, n: int, rng: Rng) -> tuple[int, np.ndarray]:
    gen = rng.generator()
    init = int(gen.choice(model.n_states, p=model.kgram_dist)) if model.k else 0
    return init, gen.random(model.burn_in + n)


def sample_label_batch(model: MarkovLabelModel, n: int, rngs: Sequence[Rng]) -> np.ndarray:
    """One length-``n`` label series per stream, shape ``(len(rngs), n)``.

    Row ``i`` equals ``sample_labels(model, n, rngs[i])``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    inits = np.empty(len(rngs), dtype=np.int64)
    u = np.empty((len(rngs), model.burn_in + n))
    for i, r in enumerate(rngs):
        inits[i], u[i] = _draws(model, n, r)
    if model.k == 0:
        return (u < model.prob_one[0]).astype(np.int8)
    return _simulate(model, inits, u)[:, model.burn_in :]


def sample_labels(model: MarkovLabelModel, n: int, rng: Rng) -> np.ndarray:
    """Initial k-gram from ``model.kgram_dist``, ``100 k`` burn-in draws, then ``n`` labels."""
    return sample_label_batch(model, n, [rng])[0]


def write_model_csv(model: MarkovLabelModel, path: str | Path) -> None:
    lines = ["history_bits,prob_one"]
    lines += [f"{model.history_bits(h)},{float(model.prob_one[h])!r}" for h in range(model.n_states)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_model_csv(path: str | Path) -> MarkovLabelModel:
    rows = Path(path).read_text().splitlines()
    if not rows or rows[0].strip() != "history_bits,prob_one":
        raise DataError(f"{path}: expected header 'history_bits,prob_one'")
    entries = [r.split(",") for r in rows[1:] if r.strip()]
    k = len(entries[0][0].strip()) if entries else 0
    p = np.full(2 ** k, np.nan)
    for bits, prob in entries:
        bits = bits.strip()
        if len(bits) != k or set(bits) - {"0", "1"}:
            raise DataError(f"{path}: malformed history {bits!r}")
        p[int(bits, 2) if k else 0] = float(prob)
    if np.isnan(p).any():
        raise DataError(f"{path}: missing histories for order {k}")
    return MarkovLabelModel(k=k, prob_one=p)
