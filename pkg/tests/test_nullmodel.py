import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_panel
from fxmst.corrnet import Regime, correlation, spectrum
from fxmst.errors import ConfigError, UnknownCurrencyError
from fxmst.nullmodel import (
    MarketModel,
    attachment_offset,
    default_fict_sigma,
    fictitious_currency,
    generate_market,
    pa_tree,
    preferential_attachment_tree,
    rng_for,
    shuffle_returns,
    synthetic_code,
)
from fxmst.pipeline import analyse_base
from fxmst.scaling import degree_distribution, fit_power
from fxmst.timeseries import ReturnMatrix, rebase, returns, triangle_residual


def _ret(values):
    values = np.asarray(values, dtype=float)
    codes = tuple(synthetic_code("R", i) for i in range(values.shape[0]))
    return ReturnMatrix("USD", codes, 1, values, values * 2)


# --- shuffling ----------------------------------------------------------------------


def test_single_column_unchanged():
    r = _ret([[0.3], [-1.0]])
    assert np.array_equal(shuffle_returns(r, 9).values, r.values)


@given(st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=30)
def test_shuffle_preserves_rows(seed):
    values = np.random.default_rng(0).normal(size=(4, 25))
    r = _ret(values)
    s = shuffle_returns(r, seed)
    assert np.array_equal(np.sort(s.values, axis=1), np.sort(values, axis=1))
    # the raw grid follows the same permutation
    assert np.array_equal(s.raw, s.values * 2)


def test_shuffle_is_deterministic_and_row_local():
    values = np.random.default_rng(1).normal(size=(5, 40))
    a = shuffle_returns(_ret(values), 42)
    b = shuffle_returns(_ret(values), 42)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, shuffle_returns(_ret(values), 43).values)
    # row i only depends on its own substream: dropping later rows leaves it alone
    c = shuffle_returns(_ret(values[:2]), 42)
    assert np.array_equal(c.values, a.values[:2])


def test_shuffle_keeps_trace():
    p = random_panel(np.random.default_rng(4), n=8, steps=120)
    C = correlation(shuffle_returns(returns(p), 5))
    assert abs(np.trace(C.entries) - C.N) <= 1e-9


def test_seed_range():
    with pytest.raises(ValueError):
        rng_for(-1, 0)
    with pytest.raises(ValueError):
        rng_for(2**64, 0)


# --- fictitious currency ----------------------------------------------------------


def test_zero_noise_fict_tracks_anchor():
    p = random_panel(np.random.default_rng(2), n=6, steps=150)
    q = fictitious_currency(p, "EUR", sigma=1e-12, seed=3)
    ret = returns(rebase(q, "GBP"))
    C = correlation(ret)
    i, j = ret.currencies.index("FIC"), ret.currencies.index("EUR")
    assert C.entries[i, j] > 1 - 1e-9


@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from(["walk", "level"]))
@settings(max_examples=25)
def test_fict_triangles_close(seed, mode):
    p = random_panel(np.random.default_rng(seed), n=6, steps=60)
    q = fictitious_currency(p, "USD", seed=seed, mode=mode)
    for other in ("AUD", "EUR", "JPY"):
        assert triangle_residual(q, "FIC", "USD", other) <= 1e-10
        assert triangle_residual(q, "FIC", "CHF", other) <= 1e-10


def test_fict_sigma_default_and_walk_statistics():
    p = random_panel(np.random.default_rng(8), n=6, steps=3000, vol=0.02)
    sigma = default_fict_sigma(p)
    assert sigma == pytest.approx(0.02, rel=0.1)
    q = fictitious_currency(p, p.base, seed=1)
    assert np.diff(np.log(q.rate("FIC"))).std() == pytest.approx(sigma, rel=0.05)


def test_fict_errors():
    p = random_panel(np.random.default_rng(2), n=4, steps=40)
    with pytest.raises(UnknownCurrencyError):
        fictitious_currency(p, "XXX")
    with pytest.raises(ValueError):
        fictitious_currency(p, "USD", sigma=0.0)
    with pytest.raises(ValueError):
        fictitious_currency(p, "USD", mode="bogus")
    with pytest.raises(ValueError):
        fictitious_currency(fictitious_currency(p, "USD"), "USD")


# --- synthetic market -------------------------------------------------------------


def test_independent_market():
    m = MarketModel(n_currencies=12, hub_strength=0.0, blocs=(), drifters=0, T=1657, reference_coupling=0.0)
    ret = returns(generate_market(m, 7))
    C = correlation(ret).entries
    off = C[~np.eye(C.shape[0], dtype=bool)]
    assert np.max(np.abs(off)) < 3 / np.sqrt(ret.T)


def test_single_common_factor():
    n = 20
    m = MarketModel(n_currencies=n, hub_strength=1.0, blocs=((n - 2, 1.0),), drifters=0, T=400, reference_coupling=0.0)
    rep = spectrum(correlation(returns(generate_market(m, 1))))
    assert rep.lambda_max == pytest.approx(n - 1, abs=1e-9)
    assert rep.regime is Regime.INDEPENDENT_DRIFT


def test_generator_determinism_and_layout():
    m = MarketModel()
    a, b = generate_market(m, 11), generate_market(m, 11)
    assert a.equals(b)
    assert not a.equals(generate_market(m, 12))
    assert a.n == 60 and a.base == "REF" and a.rates.shape == (1658, 59)
    assert len(set(a.all_codes)) == 60
    groups = m.groups()
    assert {c for c, _ in groups.items()} == set(a.all_codes)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"hub_strength": 1.5},
        {"blocs": ((0, 0.5),)},
        {"blocs": ((10, 1.2),)},
        {"n_currencies": 10, "blocs": ((8, 0.5),), "drifters": 2},
        {"T": 1},
        {"reference_coupling": -0.1},
        {"reference": "HUB"},
    ],
)
def test_model_validation(kwargs):
    with pytest.raises(ConfigError):
        MarketModel(**kwargs)


def test_model_config_round_trip(tmp_path):
    m = MarketModel(n_currencies=30, blocs=((6, 0.5), (4, 0.8)), drifters=3)
    path = tmp_path / "m.json"
    path.write_text(json.dumps({**m.to_dict(), "seed": 3}))
    assert MarketModel.load(path) == m
    path.write_text(json.dumps({"n_currency": 3}))
    with pytest.raises(ConfigError):
        MarketModel.load(path)


def test_mixed_model_has_a_hub_and_scales():
    m = MarketModel(blocs=((25, 0.7), (18, 0.7)), drifters=5)
    for seed in range(6):
        r = analyse_base(generate_market(m, seed), "REF", with_spectrum=False)
        assert r.tree.multiplicities["HUB"] >= 8
        assert 1.3 < r.fit.alpha < 2.3


def test_default_market_regimes():
    p = generate_market(MarketModel(), 4)
    regimes = {b: analyse_base(p, b).spectrum.regime for b in ("REF", "HUB", "DAA")}
    assert regimes == {"REF": Regime.TYPICAL, "HUB": Regime.USD_TIED, "DAA": Regime.INDEPENDENT_DRIFT}


def test_hub_base_fits_worse():
    m = MarketModel()
    hub, other = [], []
    for seed in range(10):
        p = generate_market(m, seed)
        hub.append(analyse_base(p, "HUB", with_spectrum=False).fit.relative_error)
        other.append(analyse_base(p, "REF", with_spectrum=False).fit.relative_error)
    assert np.mean(hub) > np.mean(other)


# --- preferential attachment ------------------------------------------------------


def test_pa_tree_is_a_tree():
    t = pa_tree(59, -0.17, 3)
    assert t.N == 59 and len(t.edges) == 58
    assert sum(t.multiplicities.values()) == 116
    assert pa_tree(59, -0.17, 3).edges == t.edges


def test_attachment_offset_calibration():
    offset = attachment_offset(1.43, 59)
    assert -0.99 < offset < 0.5
    alphas = [fit_power(degree_distribution(preferential_attachment_tree(59, 1.43, 99, i))).alpha for i in range(100)]
    assert abs(np.mean(alphas) - 1.43) <= 0.15
    with pytest.raises(ValueError):
        attachment_offset(50.0, 59)


def test_synthetic_code():
    assert synthetic_code("T", 0) == "TAA"
    assert synthetic_code("", 27) == "ABB"
    with pytest.raises(ValueError):
        synthetic_code("BA", 26)


def test_fict_sits_near_the_typical_drift_border():
    fracs = []
    for seed in range(5):
        panel = fictitious_currency(generate_market(MarketModel(), seed), "HUB", seed=seed)
        r = analyse_base(panel, "FIC", variant="fict")
        fracs.append(r.spectrum.lambda_max / r.N)
        assert 1.3 < r.fit.alpha < 2.3
    assert abs(np.mean(fracs) - 0.65) <= 0.1
