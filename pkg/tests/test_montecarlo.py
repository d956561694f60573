import numpy as np
import pytest

from prominence.errors import DomainError
from prominence.montecarlo import (SHARD_SIZE, mean_and_stderr, run_sharded, shard_rng,
                                   shard_sizes)


def draw_sum(rng, k):
    x = rng.random(k)
    return x.sum(), k


def test_shard_sizes_cover_n():
    assert shard_sizes(SHARD_SIZE * 2 + 5) == [SHARD_SIZE, SHARD_SIZE, 5]
    assert sum(shard_sizes(10)) == 10


def test_results_independent_of_worker_count():
    one = run_sharded(draw_sum, 300_000, seed=4, workers=1)
    many = run_sharded(draw_sum, 300_000, seed=4, workers=4)
    assert one == many


def test_distinct_shards_and_seeds_differ():
    assert shard_rng(1, 0).random() != shard_rng(1, 1).random()
    assert shard_rng(1, 0).random() != shard_rng(2, 0).random()
    assert shard_rng(1, 0).random() == shard_rng(1, 0).random()


def test_seed_and_n_required():
    with pytest.raises(DomainError):
        run_sharded(draw_sum, 10, seed=None)
    with pytest.raises(DomainError):
        run_sharded(draw_sum, 0, seed=1)


def test_mean_and_stderr():
    x = np.random.default_rng(0).normal(size=1000)
    mean, se = mean_and_stderr(x.sum(), np.dot(x, x), len(x))
    assert mean == pytest.approx(x.mean())
    assert se == pytest.approx(x.std(ddof=1) / np.sqrt(len(x)))
