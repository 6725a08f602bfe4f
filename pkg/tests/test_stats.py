import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, strategies as st

from galleryflow.stats import normalized_entropy, pearson, rankdata, spearman


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=30))
def test_rankdata_matches_scipy(values):
    ours = rankdata(values)
    ref = scipy.stats.rankdata(values)
    assert np.allclose(ours, ref)


@given(
    st.lists(st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 6)), min_size=3, max_size=25),
    st.randoms(use_true_random=False),
)
def test_pearson_matches_scipy(xs, rnd):
    ys = [round(rnd.uniform(-10, 10), 6) for _ in xs]
    ours = pearson(xs, ys)
    if math.isnan(ours):
        assert len(set(xs)) == 1 or len(set(ys)) == 1
        return
    ref = scipy.stats.pearsonr(xs, ys).statistic
    assert ours == pytest.approx(ref, abs=1e-10)


def test_spearman_matches_scipy_with_ties():
    x = [1, 2, 2, 3, 5, 5, 5, 9]
    y = [3, 1, 4, 4, 2, 8, 8, 7]
    assert spearman(x, y) == pytest.approx(scipy.stats.spearmanr(x, y).statistic, abs=1e-12)


def test_pearson_zero_variance_is_nan():
    assert math.isnan(pearson([1, 1, 1], [2, 3, 4]))


def test_entropy_point_mass_and_uniform():
    assert normalized_entropy([0, 5, 0], 3) == 0.0
    assert normalized_entropy([2, 2, 2, 2], 4) == pytest.approx(1.0, abs=1e-12)


def test_entropy_empty_raises():
    with pytest.raises(ValueError):
        normalized_entropy([0, 0], 2)
