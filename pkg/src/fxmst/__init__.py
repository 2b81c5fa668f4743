"""Correlation networks, minimal spanning trees and power-law scaling for FX rate panels."""

from .corrnet import CorrelationMatrix, Regime, RegimeConfig, SpectrumReport, classify_regime, correlation, spectrum
from .currencies import CurrencyCode, Group, GroupTable
from .mstgraph import DistanceMatrix, MstTree, build_mst, distances, export_dot
from .nullmodel import MarketModel, fictitious_currency, generate_market, shuffle_returns
from .scaling import (
    DegreeDistribution,
    FitConfig,
    PowerFit,
    degree_distribution,
    discreteness_floor,
    fit_power,
    group_fit,
)
from .timeseries import CleaningConfig, RatePanel, ReturnMatrix, load_panel, rebase, returns, triangle_residual

__version__ = "0.1.0"
