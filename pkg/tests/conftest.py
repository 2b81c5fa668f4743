import hypothesis
import numpy as np
import pytest

from fxmst.nullmodel import business_days
from fxmst.timeseries import RatePanel

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")


def random_panel(rng, n=6, steps=200, base="USD", vol=0.01):
    codes = ["AUD", "CHF", "EUR", "GBP", "JPY", "NOK", "SEK", "CAD", "NZD", "DKK", "PLN"]
    codes = [c for c in codes if c != base][: n - 1]
    log_rates = rng.uniform(-1, 1, size=len(codes)) + np.cumsum(rng.normal(0, vol, size=(steps, len(codes))), axis=0)
    return RatePanel(base, tuple(codes), business_days(steps), np.exp(log_rates))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def panel(rng):
    return random_panel(rng)


def write_rates(path, panel):
    from fxmst.timeseries import write_panel

    write_panel(panel, path)
    return path
