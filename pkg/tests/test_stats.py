import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aoiviol.stats import RunningMoments, batch_means_se


def test_batch_means_matches_iid_error_for_iid_data():
    x = np.random.default_rng(0).normal(size=200_000)
    assert batch_means_se(x) == pytest.approx(1 / np.sqrt(len(x)), rel=0.25)


def test_batch_means_ratio_of_constants_is_zero():
    assert batch_means_se(np.full(1000, 2.0), np.full(1000, 4.0)) == pytest.approx(0.0, abs=1e-15)


def test_batch_means_sees_positive_correlation():
    rng = np.random.default_rng(1)
    x = np.repeat(rng.normal(size=10_000), 20)  # runs of 20 identical values
    iid = x.std() / np.sqrt(len(x))
    assert batch_means_se(x) > 3 * iid


@given(arrays(float, st.integers(2, 300), elements=st.floats(-1e3, 1e3)), st.integers(1, 299))
@settings(max_examples=80, deadline=None)
def test_running_moments_merge_equals_whole(x, cut):
    cut = min(cut, len(x) - 1)
    a = RunningMoments().update(x[:cut])
    b = RunningMoments().update(x[cut:])
    whole = RunningMoments().update(x)
    merged = a.merge(b)
    assert merged.mean == pytest.approx(whole.mean, abs=1e-9)
    assert merged.variance == pytest.approx(np.var(x, ddof=1), rel=1e-7, abs=1e-7)
