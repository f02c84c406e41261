import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqdiff.core import DataError, Rng
from seqdiff.labelmodel import (MarkovLabelModel, fit_markov, read_model_csv, sample_label_batch,
                                sample_labels, transition_counts, write_model_csv)


def count_oracle(seq, k, alpha):
    """Count history -> next transitions with plain Python dictionaries."""
    ones, tot = {}, {}
    for i in range(k, len(seq)):
        key = tuple(seq[i - k:i])
        tot[key] = tot.get(key, 0) + 1
        ones[key] = ones.get(key, 0) + seq[i]
    out = []
    for h in range(2 ** k):
        key = tuple(int(b) for b in format(h, f"0{k}b")) if k else ()
        out.append((ones.get(key, 0) + alpha) / (tot.get(key, 0) + 2 * alpha))
    return out


def test_alternating_sequence():
    m = fit_markov([0, 1] * 5, k=1, alpha=0.0)
    assert m.prob_one[0] == 1.0 and m.prob_one[1] == 0.0


def test_laplace_smoothing_all_zeros():
    m = fit_markov(np.zeros(10, int), k=1, alpha=1.0)
    assert m.prob_one[0] == pytest.approx(1 / 11)
    assert m.prob_one[1] == 0.5


def test_order_zero_is_label_mean():
    y = [1, 0, 0, 1, 1, 1, 0, 1]
    assert fit_markov(y, k=0, alpha=0.0).prob_one[0] == np.mean(y)


def test_too_short_to_fit():
    with pytest.raises(DataError):
        fit_markov([0, 1, 1], k=3)


def test_history_encoding_newest_bit_last():
    # history (y_{t-2}, y_{t-1}) = (1, 0) -> code 0b10
    m = fit_markov([1, 0, 1, 1, 0, 1], k=2, alpha=0.0)
    assert m.history_bits(2) == "10"
    assert m.prob_one[2] == 1.0


def test_mle_matches_counting_oracle_1000_sequences():
    g = np.random.default_rng(7)
    for _ in range(1000):
        k = int(g.integers(0, 5))
        seq = g.integers(0, 2, int(g.integers(k + 1, 60))).tolist()
        alpha = float(g.choice([0.5, 1.0]))
        got = fit_markov(seq, k, alpha).prob_one
        np.testing.assert_allclose(got, count_oracle(seq, k, alpha), rtol=0, atol=1e-15)


def test_counts_do_not_cross_runs():
    to0, to1 = transition_counts([np.array([0, 1]), np.array([1, 1])], 1)
    # within runs: 0->1 and 1->1; the boundary 1|1 pair between runs is not counted twice
    assert to1.tolist() == [1, 1] and to0.tolist() == [0, 0]


def test_absorbing_and_alternating_sampling():
    ones = MarkovLabelModel(k=2, prob_one=np.ones(4))
    assert np.all(sample_labels(ones, 50, Rng(1)) == 1)
    alt = MarkovLabelModel(k=1, prob_one=np.array([1.0, 0.0]), kgram_dist=np.array([0.5, 0.5]))
    y = sample_labels(alt, 51, Rng(2))
    assert np.all(np.diff(y) != 0)


def test_bernoulli_sample_mean():
    m = MarkovLabelModel(k=0, prob_one=np.array([0.3]))
    assert 0.29 <= sample_labels(m, 100_000, Rng(3)).mean() <= 0.31


def test_sampling_deterministic_and_batch_consistent():
    m = fit_markov(np.random.default_rng(0).integers(0, 2, 300), k=3)
    rngs = [Rng(4, (b,)) for b in range(5)]
    batch = sample_label_batch(m, 40, rngs)
    for b, r in enumerate(rngs):
        assert np.array_equal(batch[b], sample_labels(m, 40, r))
    assert np.array_equal(batch, sample_label_batch(m, 40, rngs))


def test_long_run_fraction_matches_stationary():
    a, b = 0.3, 0.6  # P(1|0), P(1|1)
    m = MarkovLabelModel(k=1, prob_one=np.array([a, b]))
    n = 100_000
    y = sample_labels(m, n, Rng(5))
    pi = a / (a + 1 - b)
    # lag-1 correlation rho = b - a inflates the variance by (1+rho)/(1-rho)
    rho = b - a
    se = np.sqrt(pi * (1 - pi) / n * (1 + rho) / (1 - rho))
    assert abs(y.mean() - pi) < 3 * se
    assert m.stationary_distribution()[1] == pytest.approx(pi, abs=1e-9)


def test_fit_sample_roundtrip():
    m = MarkovLabelModel(k=1, prob_one=np.array([0.2, 0.7]))
    fit = fit_markov(sample_labels(m, 100_000, Rng(6)), k=1)
    np.testing.assert_allclose(fit.prob_one, [0.2, 0.7], atol=0.02)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(0, 6), seed=st.integers(0, 2**32 - 1))
def test_table_complete_and_in_range(k, seed):
    y = np.random.default_rng(seed).integers(0, 2, 40)
    m = fit_markov(y, k)
    assert m.prob_one.shape == (2 ** k,)
    assert np.all((m.prob_one > 0) & (m.prob_one < 1))


def test_model_csv_roundtrip(tmp_path):
    m = fit_markov(np.random.default_rng(1).integers(0, 2, 200), k=3)
    write_model_csv(m, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().startswith("history_bits,prob_one\n000,")
    back = read_model_csv(tmp_path / "m.csv")
    assert np.array_equal(back.prob_one, m.prob_one)
