"""Shared domain types, dataset splits and seeded random streams."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DataError",
    "LabeledSeries",
    "SplitSpec",
    "Rng",
    "split_series",
    "block_splits",
    "read_series_csv",
    "write_series_csv",
    "read_splits_csv",
    "write_splits_csv",
]


class DataError(ValueError):
    """Input data violates a structural requirement (bad labels, bad lengths, ...)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Rng:
    """A reproducible random stream identified by ``(seed, stream)``.

    ``stream`` is a tuple of non-negative integers so that nested work
    (trial -> replicate) can derive independent child streams without
    sharing generator state. Identical ``(seed, stream)`` always yields the
    same draws.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.stream, int):
            object.__setattr__(self, "stream", (self.stream,))
        if self.seed < 0 or any(s < 0 for s in self.stream):
            raise ValueError("seed and stream ids must be non-negative")

    def child(self, *ids: int) -> Rng:
        return Rng(self.seed, self.stream + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class LabeledSeries:
    """Time-indexed pairs ``(s_t, y_t)`` with scalar covariate and binary label."""

    times: np.ndarray
    covariates: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times)
        s = np.asarray(self.covariates, dtype=float)
        y = np.asarray(self.labels)
        if not (t.ndim == s.ndim == y.ndim == 1):
            raise DataError("times, covariates and labels must be 1-d")
        if not (len(t) == len(s) == len(y)):
            raise DataError(
                f"length mismatch: times={len(t)}, covariates={len(s)}, labels={len(y)}"
            )
        if len(t) and not np.issubdtype(t.dtype, np.integer):
            if not np.all(np.equal(np.mod(t, 1), 0)):
                raise DataError("times must be integers")
        t = t.astype(np.int64)
        if np.any(np.diff(t) <= 0):
            raise DataError("times must be strictly increasing")
        bad = np.flatnonzero((y != 0) & (y != 1))
        if bad.size:
            raise DataError(f"label at index {bad[0]} is {y[bad[0]]!r}, expected 0 or 1")
        if not np.all(np.isfinite(s)):
            raise DataError("covariates must be finite")
        object.__setattr__(self, "times", _frozen(t.copy()))
        object.__setattr__(self, "covariates", _frozen(s.copy()))
        object.__setattr__(self, "labels", _frozen(y.astype(np.int8)))

    @classmethod
    def from_arrays(cls, covariates, labels, times=None) -> LabeledSeries:
        covariates = np.asarray(covariates, dtype=float)
        if times is None:
            times = np.arange(len(covariates))
        return cls(np.asarray(times), covariates, np.asarray(labels))

    def __len__(self) -> int:
        return len(self.times)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledSeries):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.covariates, other.covariates)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SplitSpec:
    """Disjoint index sets: train (t1), label holdout (t2) and evaluation (v)."""

    t1: np.ndarray
    t2: np.ndarray
    v: np.ndarray
    contiguous: bool = field(default=True, compare=False)

    def __post_init__(self):
        parts = []
        for name in ("t1", "t2", "v"):
            a = np.asarray(getattr(self, name), dtype=np.int64).ravel()
            if np.any(a < 0):
                raise DataError(f"{name} contains negative indices")
            if len(np.unique(a)) != len(a):
                raise DataError(f"{name} contains duplicate indices")
            object.__setattr__(self, name, _frozen(a.copy()))
            parts.append(set(a.tolist()))
        if parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2]:
            raise DataError("split index sets must be pairwise disjoint")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplitSpec):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in ("t1", "t2", "v"))

    __hash__ = None

    def check_against(self, n: int) -> None:
        for name in ("t1", "t2", "v"):
            a = getattr(self, name)
            if a.size and a.max() >= n:
                raise DataError(f"{name} index {a.max()} out of range for series of length {n}")


def runs(indices: np.ndarray) -> list[np.ndarray]:
    """Split sorted ``indices`` into maximal runs of consecutive integers."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return []
    idx = np.sort(idx)
    breaks = np.flatnonzero(np.diff(idx) != 1) + 1
    return np.split(idx, breaks)


def split_series(
    series: LabeledSeries | int,
    fractions: Sequence[float],
    rng: Rng,
    *,
    interleaved: bool = False,
) -> SplitSpec:
    """Split a series into train / label-holdout / evaluation index sets.

    By default the three sets are contiguous blocks laid out in time order
    (train, holdout, evaluation). When the fractions leave slack, the
    leftover indices are placed as gaps between blocks at positions drawn
    from ``rng``. ``interleaved=True`` assigns individual time points at
    random and is only appropriate for IID data.
    """
    n = series if isinstance(series, int) else len(series)
    fr = [float(f) for f in fractions]
    if len(fr) != 3:
        raise ValueError("fractions must have three entries")
    if any(f < 0 for f in fr):
        raise ValueError("fractions must be non-negative")
    if sum(fr) > 1 + 1e-12:
        raise ValueError("fractions must sum to at most 1")
    if n < 3:
        raise DataError(f"series of length {n} is too short for three non-empty blocks")
    # 1e-9 guards exact fractions like 1/3 against float round-down
    sizes = [int(np.floor(f * n + 1e-9)) for f in fr]
    if any(s == 0 for s in sizes):
        raise DataError(f"fractions {fr} give an empty block for series of length {n}")

    gen = rng.generator()
    if interleaved:
        perm = gen.permutation(n)
        a, b, c = sizes
        return SplitSpec(
            np.sort(perm[:a]), np.sort(perm[a : a + b]), np.sort(perm[a + b : a + b + c]),
            contiguous=False,
        )

    slack = n - sum(sizes)
    # distribute slack over the four gaps (before, between, between, after)
    cuts = np.sort(gen.integers(0, slack + 1, size=3)) if slack else np.zeros(3, dtype=int)
    gaps = np.diff(np.concatenate([[0], cuts, [slack]]))
    blocks = []
    pos = int(gaps[0])
    for size, gap in zip(sizes, gaps[1:]):
        blocks.append(np.arange(pos, pos + size))
        pos += size + int(gap)
    return SplitSpec(*blocks, contiguous=True)


def block_splits(t1: int, t2: int, v: int) -> SplitSpec:
    """Contiguous blocks ``[0, t1)``, ``[t1, t1+t2)``, ``[t1+t2, t1+t2+v)``."""
    if min(t1, t2, v) < 0:
        raise ValueError("block sizes must be non-negative")
    return SplitSpec(np.arange(t1), np.arange(t1, t1 + t2), np.arange(t1 + t2, t1 + t2 + v))


# --- CSV I/O --------------------------------------------------------------

def _parse_int(text: str, row: int, col: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"row {row}: column {col!r} value {text!r} is not an integer") from None


def read_series_csv(path: str | Path) -> LabeledSeries:
    """Read a ``t,s,y`` CSV. Row numbers in errors count the header as row 1."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != ["t", "s", "y"]:
            raise DataError(f"{path}: expected header 't,s,y', got {','.join(header)!r}")
        t, s, y = [], [], []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"row {rownum}: expected 3 fields, got {len(row)}")
            t.append(_parse_int(row[0], rownum, "t"))
            try:
                s.append(float(row[1]))
            except ValueError:
                raise DataError(f"row {rownum}: column 's' value {row[1]!r} is not a number") from None
            yv = row[2].strip()
            if yv not in ("0", "1"):
                raise DataError(f"row {rownum}: label y={yv!r} is not 0 or 1")
            y.append(int(yv))
    return LabeledSeries(np.asarray(t, dtype=np.int64), np.asarray(s), np.asarray(y))


def series_to_csv(series: LabeledSeries) -> str:
    buf = io.StringIO()
    buf.write("t,s,y\n")
    for t, s, y in zip(series.times, series.covariates, series.labels):
        buf.write(f"{int(t)},{float(s)!r},{int(y)}\n")
    return buf.getvalue()


def write_series_csv(series: LabeledSeries, path: str | Path) -> None:
    Path(path).write_text(series_to_csv(series))


def write_splits_csv(splits: SplitSpec, path: str | Path) -> None:
    """Write splits as ``set,index`` rows with set in {t1, t2, v}."""
    lines = ["set,index"]
    for name in ("t1", "t2", "v"):
        lines.extend(f"{name},{int(i)}" for i in getattr(splits, name))
    Path(path).write_text("\n".join(lines) + "\n")


def read_splits_csv(path: str | Path) -> SplitSpec:
    sets: dict[str, list[int]] = {"t1": [], "t2": [], "v": []}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["set", "index"]:
            raise DataError(f"{path}: expected header 'set,index'")
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            name = row[0].strip()
            if name not in sets:
                raise DataError(f"row {rownum}: unknown split set {name!r}")
            sets[name].append(_parse_int(row[1], rownum, "index"))
    return SplitSpec(np.asarray(sets["t1"]), np.asarray(sets["t2"]), np.asarray(sets["v"]))


def as_index_array(indices: Iterable[int]) -> np.ndarray:
    return np.asarray(list(indices), dtype=np.int64)
