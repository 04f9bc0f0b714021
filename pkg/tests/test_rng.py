import numpy as np
import pytest

from sparsedepth.rng import make_rng, split_seed


def test_same_key_same_draws():
    a = make_rng(42, 0).random(100)
    b = make_rng(42, 0).random(100)
    assert np.array_equal(a, b)


def test_different_streams_differ():
    a = make_rng(42, 0).random(100)
    b = make_rng(42, 1).random(100)
    assert not np.array_equal(a, b)


def test_different_seeds_differ():
    a = make_rng(1, 0).random(100)
    b = make_rng(2, 0).random(100)
    assert not np.array_equal(a, b)


def test_split_seed_is_stable_and_distinct():
    pairs = [split_seed(7, i) for i in range(100)]
    assert len(set(pairs)) == 100
    assert pairs == [split_seed(7, i) for i in range(100)]


def test_none_seed_rejected():
    with pytest.raises(ValueError):
        make_rng(None)
