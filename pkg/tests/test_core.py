import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqdiff.core import (DataError, LabeledSeries, Rng, SplitSpec, block_splits, read_series_csv,
                          read_splits_csv, split_series, write_series_csv, write_splits_csv)


def _series(n, seed=0):
    g = np.random.default_rng(seed)
    return LabeledSeries.from_arrays(g.standard_normal(n), g.integers(0, 2, n))


def test_thirds_of_300_are_blocks_of_100(rng):
    sp = split_series(_series(300), (1 / 3, 1 / 3, 1 / 3), rng)
    assert [len(sp.t1), len(sp.t2), len(sp.v)] == [100, 100, 100]
    for part in (sp.t1, sp.t2, sp.v):
        assert np.all(np.diff(part) == 1)
    assert sp.t1[-1] < sp.t2[0] and sp.t2[-1] < sp.v[0]


def test_too_short_series_is_rejected(rng):
    with pytest.raises(DataError):
        split_series(_series(2), (1 / 3, 1 / 3, 1 / 3), rng)


def test_split_is_deterministic():
    a = split_series(_series(97), (0.3, 0.3, 0.2), Rng(5))
    b = split_series(_series(97), (0.3, 0.3, 0.2), Rng(5))
    assert a == b


@pytest.mark.parametrize("fractions", [(-0.1, 0.5, 0.5), (0.5, 0.5, 0.5), (0.5, 0.5)])
def test_bad_fractions(rng, fractions):
    with pytest.raises(ValueError):
        split_series(_series(30), fractions, rng)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 400), f=st.tuples(*[st.floats(0.05, 0.33)] * 3),
       seed=st.integers(0, 2**32), interleaved=st.booleans())
def test_splits_pairwise_disjoint(n, f, seed, interleaved):
    try:
        sp = split_series(n, f, Rng(seed), interleaved=interleaved)
    except DataError:
        return
    a, b, c = set(sp.t1), set(sp.t2), set(sp.v)
    assert not (a & b) and not (a & c) and not (b & c)
    assert max(a | b | c) < n


def test_overlapping_split_rejected():
    with pytest.raises(DataError):
        SplitSpec(np.arange(5), np.arange(4, 8), np.arange(10, 12))


def test_rng_streams_reproducible_and_distinct():
    x = Rng(1, (2, 3)).generator().random(5)
    assert np.array_equal(x, Rng(1, (2, 3)).generator().random(5))
    assert not np.array_equal(x, Rng(1, (2, 4)).generator().random(5))
    assert not np.array_equal(x, Rng(2, (2, 3)).generator().random(5))
    assert Rng(1).child(2, 3) == Rng(1, (2, 3))


def test_series_validation():
    with pytest.raises(DataError):
        LabeledSeries.from_arrays([0.1, 0.2], [0, 2])
    with pytest.raises(DataError):
        LabeledSeries.from_arrays([0.1, 0.2], [0])
    with pytest.raises(DataError):
        LabeledSeries(np.array([0, 0]), np.zeros(2), np.zeros(2))


def test_series_csv_roundtrip(tmp_path):
    s = _series(50, seed=3)
    p = tmp_path / "d.csv"
    write_series_csv(s, p)
    assert p.read_text().splitlines()[0] == "t,s,y"
    assert read_series_csv(p) == s


def test_csv_bad_label_names_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,s,y\n0,0.5,1\n1,0.25,2\n")
    with pytest.raises(DataError, match="row 3"):
        read_series_csv(p)


def test_splits_csv_roundtrip(tmp_path):
    sp = block_splits(4, 3, 2)
    write_splits_csv(sp, tmp_path / "s.csv")
    assert read_splits_csv(tmp_path / "s.csv") == sp
