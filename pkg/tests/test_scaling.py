import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fxmst.errors import ConfigError, InsufficientSupportError
from fxmst.mstgraph import MstTree
from fxmst.nullmodel import pa_tree
from fxmst.scaling import (
    GOOD,
    POOR,
    FitConfig,
    PowerFit,
    degree_distribution,
    discreteness_floor,
    dumps_cumulative,
    dumps_fit_line,
    fit_loglog,
    fit_power,
    group_fit,
)


def _tree(edges, base="USD"):
    nodes = sorted({x for e in edges for x in e})
    mult = {n: sum(n in e for e in edges) for n in nodes}
    return MstTree(base, tuple(nodes), tuple((a, b, 0.5) for a, b in edges), mult)


STAR = _tree([("AAA", "BBB"), ("AAA", "CCC"), ("AAA", "DDD"), ("AAA", "EEE")])
PATH = _tree([("AAA", "BBB"), ("BBB", "CCC"), ("CCC", "DDD")])


def test_star():
    d = degree_distribution(STAR)
    assert d.counts == {1: 4, 4: 1}
    assert d.cumulative == {1: 5, 2: 1, 3: 1, 4: 1}
    assert d.normalized[1] == 1.0
    assert d.K_max == 4


def test_path():
    d = degree_distribution(PATH)
    assert d.counts == {1: 2, 2: 2}
    assert d.cumulative == {1: 4, 2: 2}


@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=80))
def test_distribution_identities(seed, n):
    degrees = pa_tree(n, -0.2, seed)
    d = degree_distribution(degrees)
    assert d.cumulative[1] == n and d.normalized[1] == 1.0
    assert sum(d.counts.values()) == n
    assert sum(k * v for k, v in d.counts.items()) == 2 * (n - 1)
    for K in range(1, d.K_max + 1):
        assert d.cumulative[K] == d.cumulative.get(K + 1, 0) + d.counts.get(K, 0)
    assert d.cumulative[d.K_max] >= 1


def test_empty_sequence():
    with pytest.raises(ValueError):
        degree_distribution([])


# --- fitting ---------------------------------------------------------------------


def test_exact_log_linear_recovery():
    K = np.array([1, 2, 4, 8])
    fit = fit_loglog(K, 64 * K**-1.5)
    assert abs(fit.alpha - 1.5) <= 1e-9
    assert fit.delta_alpha < 1e-9
    assert fit.amplitude == pytest.approx(64.0, rel=1e-12)
    assert fit.quality_flag == GOOD


@given(
    st.floats(min_value=0.3, max_value=4.0),
    st.floats(min_value=1.0, max_value=500.0),
    st.integers(min_value=3, max_value=30),
)
def test_noiseless_power_laws(alpha, amp, kmax):
    K = np.arange(1, kmax + 1)
    fit = fit_loglog(K, amp * K ** (-alpha))
    assert abs(fit.alpha - alpha) <= 1e-9
    assert fit.delta_alpha < 1e-9
    assert fit.relative_error == fit.delta_alpha / fit.alpha


def test_standard_error_matches_closed_form():
    # slope SE by hand with exact rational sums on x = ln K
    K = np.array([1, 2, 3, 4, 5, 7])
    y = np.array([40, 19, 11, 8, 5, 2])
    fit = fit_loglog(K, y)
    x, z = np.log(K), np.log(y)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, ssr, *_ = np.linalg.lstsq(A, z, rcond=None)
    se = math.sqrt(ssr[0] / (len(x) - 2) / np.sum((x - x.mean()) ** 2))
    assert fit.alpha == pytest.approx(-coef[0], abs=1e-12)
    assert fit.delta_alpha == pytest.approx(se, rel=1e-10)


def test_fit_power_on_star_and_amplitudes():
    fit = fit_power(degree_distribution(STAR))
    assert fit.points_used == ((1, 5.0), (2, 1.0), (3, 1.0), (4, 1.0))
    assert fit.amplitude_F == pytest.approx(fit.amplitude / 5)
    assert fit.predict(1) == pytest.approx(fit.amplitude)


def test_insufficient_support():
    with pytest.raises(InsufficientSupportError):
        fit_power(degree_distribution(PATH))
    with pytest.raises(InsufficientSupportError):
        fit_loglog([1, 2], [4, 1])


def test_quality_flag_threshold():
    K = np.array([1, 2, 3, 4, 5])
    y = np.array([50.0, 10.0, 9.0, 2.0, 1.9])
    fit = fit_loglog(K, y)
    assert fit.quality_flag == (POOR if fit.relative_error > 0.09 else GOOD)
    strict = fit_loglog(K, y, FitConfig(poor_threshold=fit.relative_error / 2))
    lax = fit_loglog(K, y, FitConfig(poor_threshold=fit.relative_error * 2))
    assert strict.quality_flag == POOR and lax.quality_flag == GOOD


def test_fit_config_validation():
    with pytest.raises(ConfigError):
        FitConfig(poor_threshold=0)
    with pytest.raises(ConfigError):
        FitConfig(min_points=2)


# --- discreteness floor ------------------------------------------------------------


@pytest.mark.parametrize("N, expected", [(59, Fraction(1, 236)), (1, Fraction(1, 4)), (250, Fraction(1, 1000))])
def test_discreteness_floor(N, expected):
    b = discreteness_floor(N)
    assert b.delta_mean == 0.25
    assert b.delta_F == float(expected)
    assert b.relative_floor == b.delta_F


def test_discreteness_floor_59_is_about_0004():
    assert round(discreteness_floor(59).delta_F, 6) == 0.004237


def test_discreteness_floor_rejects_zero():
    with pytest.raises(ValueError):
        discreteness_floor(0)


# --- groups ------------------------------------------------------------------------


def test_group_of_one_equals_tree_fit():
    tree = _tree([("AAA", "BBB"), ("AAA", "CCC"), ("AAA", "DDD"), ("DDD", "EEE"), ("DDD", "FFF"), ("GGG", "AAA")])
    fit = fit_power(degree_distribution(tree))
    row = group_fit([(tree, 3.5)], "A")
    assert (row.alpha, row.delta_alpha, row.relative_error) == (fit.alpha, fit.delta_alpha, fit.relative_error)
    assert row.lambda_max == 3.5 and row.count == 1


def test_homogeneous_ensemble():
    fits = []
    for i in range(40):
        fits.append((fit_power(degree_distribution(pa_tree(59, -0.17, 11, i))), 20.0 + i))
    row = group_fit(fits, "B")
    alphas = np.array([f.alpha for f, _ in fits])
    assert abs(row.alpha - alphas.mean()) <= row.alpha_std
    assert row.alpha == pytest.approx(alphas.mean(), abs=1e-12)
    assert row.relative_error == pytest.approx(np.mean([f.relative_error for f, _ in fits]))
    assert row.lambda_max == pytest.approx(39.5)


def test_empty_group():
    with pytest.raises(ValueError):
        group_fit([], "C")


def test_plot_exports():
    d = degree_distribution(STAR)
    fit = fit_power(d)
    lines = dumps_cumulative(d, fit).splitlines()
    assert lines[0] == "K,N_K,F_K,fit_N_K"
    assert lines[1].startswith("1,5,1.0,")
    assert dumps_cumulative(d).splitlines()[0] == "K,N_K,F_K"
    curve = dumps_fit_line(fit, d.K_max, samples=5).splitlines()
    assert curve[0] == "K,N_fit" and len(curve) == 6
    assert curve[-1].startswith("4,")


def test_power_fit_is_plain_data():
    fit = PowerFit(1.5, 0.1, 0.1 / 1.5, 10.0, 1.0, ((1, 10.0),), GOOD)
    assert fit.predict(4) == pytest.approx(10 * 4**-1.5)
