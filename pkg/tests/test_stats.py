import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ks_2samp

from yuleperc import stats
from yuleperc.errors import ParameterError

finite = st.floats(-1e6, 1e6, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=60)


def test_ks_two_sample_examples():
    assert stats.ks_two_sample([1, 2, 3], [1, 2, 3]).statistic == 0.0
    assert stats.ks_two_sample([0], [1]).statistic == 1.0


@pytest.mark.filterwarnings("ignore:divide by zero:RuntimeWarning")  # scipy p-value on tiny samples
@given(samples, samples)
@settings(max_examples=200, deadline=None)
def test_ks_two_sample_matches_scipy_and_is_symmetric(x, y):
    d = stats.ks_two_sample(x, y).statistic
    assert d == pytest.approx(ks_2samp(x, y, method="asymp").statistic, abs=1e-12)
    assert d == stats.ks_two_sample(y, x).statistic
    assert 0.0 <= d <= 1.0


@given(samples, samples)
@settings(max_examples=100, deadline=None)
def test_ks_invariant_under_monotone_map(x, y):
    # power-of-two scaling is exact, so ties and order survive the map
    f = lambda v: 8.0 * np.asarray(v)
    assert stats.ks_two_sample(x, y).statistic == stats.ks_two_sample(f(x), f(y)).statistic


def test_ks_threshold():
    rep = stats.ks_two_sample(np.arange(50000), np.arange(50000))
    assert rep.threshold_at(1e-3) == pytest.approx(1.9495 * math.sqrt(2 / 50000), rel=1e-3)


def test_ks_one_sample():
    assert stats.ks_one_sample([0.0], lambda x: 0.5 + math.atan(x) / math.pi).statistic == 0.5
    rng = np.random.default_rng(3)
    u = rng.random(10_000)
    assert stats.ks_one_sample(u, lambda x: x).statistic <= 0.025


@pytest.mark.parametrize("fn", [stats.summarize, lambda x: stats.ks_two_sample(x, [1.0]),
                                lambda x: stats.empirical_cf(x, [1.0])])
def test_empty_inputs_rejected(fn):
    with pytest.raises(ParameterError):
        fn([])


def test_empirical_cf_trivial_cases():
    (v, se_re, se_im), = stats.empirical_cf([1.0, 5.0, -2.0], [0.0])
    assert v == 1 + 0j and se_re == 0 and se_im == 0
    for th, (v, se_re, se_im) in zip([0.3, 2.0], stats.empirical_cf(np.full(10, 1.7), [0.3, 2.0])):
        assert v == pytest.approx(complex(math.cos(1.7 * th), math.sin(1.7 * th)), abs=1e-15)
        assert se_re == pytest.approx(0, abs=1e-15) and se_im == pytest.approx(0, abs=1e-15)


def test_empirical_cf_modulus():
    x = np.random.default_rng(1).standard_cauchy(500)
    for v, se_re, se_im in stats.empirical_cf(x, np.linspace(-3, 3, 13)):
        assert abs(v) <= 1 + max(se_re, se_im)


def test_summarize_and_merge():
    s = stats.summarize([1, 2, 3])
    assert s.mean == 2 and s.median == 2 and s.count == 3 and s.variance == 1


@given(samples, samples, samples)
@settings(max_examples=200, deadline=None)
def test_moments_merge_associative_commutative(a, b, c):
    ma, mb, mc = (stats.Moments.of(v) for v in (a, b, c))
    left = ma.merge(mb).merge(mc)
    right = ma.merge(mb.merge(mc))
    swapped = mc.merge(ma).merge(mb)
    whole = stats.Moments.of(a + b + c)
    for m in (left, right, swapped):
        assert m.count == whole.count
        assert m.mean == pytest.approx(whole.mean, rel=1e-12, abs=1e-6)
        assert m.variance == pytest.approx(whole.variance, rel=1e-9, abs=1e-3)


def test_merge_example():
    merged = stats.Moments.of([1.0]).merge(stats.Moments.of([2.0, 3.0]))
    whole = stats.summarize([1, 2, 3])
    assert (merged.count, merged.mean, merged.variance) == (3, whole.mean, whole.variance)
