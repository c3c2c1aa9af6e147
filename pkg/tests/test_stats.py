import math

import numpy as np
import pytest

from socialpricing.stats import Estimate, chunk_sizes, generators


def test_estimate_matches_numpy():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    e = Estimate.of(x)
    assert e.mean == pytest.approx(x.mean())
    assert e.stderr == pytest.approx(x.std(ddof=1) / math.sqrt(x.size))


def test_merge_is_associative_and_matches_pooled():
    a, b, c = (Estimate.of(np.arange(k, k + 5.0)) for k in (0, 3, 10))
    left, right = a.merge(b).merge(c), a.merge(b.merge(c))
    pooled = Estimate.of(np.concatenate([np.arange(k, k + 5.0) for k in (0, 3, 10)]))
    assert left == right
    assert left.mean == pytest.approx(pooled.mean)
    assert left.stderr == pytest.approx(pooled.stderr)


def test_empty_and_constant_samples():
    assert math.isnan(Estimate.empty().mean)
    assert math.isnan(Estimate.of([3.0]).stderr)
    assert Estimate.of(np.full(10, 0.1)).stderr == pytest.approx(0.0, abs=1e-9)
    assert Estimate.empty().merge(Estimate.of([2.0])).mean == 2.0


def test_chunk_sizes():
    assert chunk_sizes(10, chunk=4) == [4, 4, 2]
    assert chunk_sizes(8, chunk=4) == [4, 4]
    assert sum(chunk_sizes(1_000_003)) == 1_000_003
    with pytest.raises(ValueError):
        chunk_sizes(0)


def test_generators_are_deterministic_and_distinct():
    a = [g.random(3) for g in generators(5, 2)]
    b = [g.random(3) for g in generators(5, 2)]
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert not np.array_equal(a[0], a[1])
