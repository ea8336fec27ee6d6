import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstwobign

import oracles
from migrantnet.errors import ValidationError
from migrantnet.stats import (
    compare_groups,
    group_summary,
    histogram,
    kolmogorov_q,
    ks_pvalue,
    ks_statistic,
    ks_two_sample,
)

samples = st.lists(st.integers(-20, 20).map(float), min_size=1, max_size=25)


def test_identical_samples():
    r = ks_two_sample([1, 2, 3], [1, 2, 3])
    assert (r.d_statistic, r.p_value) == (0.0, 1.0)


def test_disjoint_supports():
    assert ks_two_sample([1, 2], [10, 20]).d_statistic == 1.0


def test_half_overlap():
    assert ks_two_sample([1, 2, 3, 4], [3, 4, 5, 6]).d_statistic == 0.5
    assert oracles.ks_d_enumerate([1, 2, 3, 4], [3, 4, 5, 6]) == 0.5


def test_empty_rejected():
    with pytest.raises(ValidationError):
        ks_two_sample([], [1.0])
    with pytest.raises(ValidationError):
        ks_two_sample([np.nan], [1.0])


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_d_matches_enumeration(a, b):
    assert ks_statistic(a, b) == pytest.approx(oracles.ks_d_enumerate(a, b), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(samples, samples)
def test_symmetry(a, b):
    ab, ba = ks_two_sample(a, b), ks_two_sample(b, a)
    assert (ab.d_statistic, ab.p_value) == (ba.d_statistic, ba.p_value)


@settings(max_examples=50, deadline=None)
@given(samples, samples)
def test_monotone_transform_invariance(a, b):
    f = lambda v: np.exp(np.asarray(v) / 5.0) * 3.0 + 1.0  # noqa: E731
    assert ks_statistic(f(a), f(b)) == ks_statistic(a, b)


@pytest.mark.parametrize("lam", [0.3, 0.5, 0.8, 1.0, 1.36, 2.0, 3.0])
def test_q_matches_reference_distribution(lam):
    assert kolmogorov_q(lam) == pytest.approx(kstwobign.sf(lam), abs=1e-10)


def test_critical_value_p():
    d = 1.358 * math.sqrt((100 + 100) / (100 * 100))
    assert abs(ks_pvalue(d, 100, 100) - 0.05) <= 0.01


def test_p_decreases_with_d():
    ps = [ks_pvalue(d, 50, 80) for d in np.linspace(0.01, 0.9, 30)]
    assert all(x >= y for x, y in zip(ps, ps[1:]))
    assert all(0.0 <= p <= 1.0 for p in ps)


def test_histogram_log_bins():
    edges, counts = histogram([1, 10, 100], bins=3, log_x=True)
    assert counts.tolist() == [1, 1, 1]
    np.testing.assert_allclose(edges, [1, 10 ** (2 / 3), 10 ** (4 / 3), 100])


def test_histogram_constant_and_errors():
    _, counts = histogram([4.0] * 7, bins=5)
    assert (counts > 0).sum() == 1 and counts.sum() == 7
    with pytest.raises(ValidationError, match="-3.0"):
        histogram([1, -3, 2], log_x=True)
    with pytest.raises(ValidationError):
        histogram([1], bins=0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-3, 1e6), min_size=1, max_size=100), st.integers(1, 30), st.booleans())
def test_histogram_conserves_counts(values, bins, log_x):
    edges, counts = histogram(values, bins=bins, log_x=log_x)
    assert counts.sum() == len(values)
    assert len(edges) == bins + 1


def test_group_summary_and_compare():
    s = group_summary({"Migrant": [1, 2, 3], "Native": []})
    assert s["Migrant"] == {"count": 3, "mean": 2.0, "min": 1.0, "max": 3.0}
    assert s["Native"]["mean"] is None
    out = compare_groups({"Migrant": [1, 2, 3, 4], "Native": [3, 4, 5, 6]})
    assert out["D"] == 0.5 and out["n1"] == 4 and out["n2"] == 4
    assert compare_groups({"Migrant": [1.0]})["D"] is None
