"""Per-base analysis: rebase -> returns -> correlation -> spectrum -> MST -> fit."""

from __future__ import annotations

from dataclasses import dataclass

from .corrnet import RegimeConfig, correlation, spectrum
from .errors import InsufficientSupportError
from .mstgraph import build_mst, distances
from .nullmodel import shuffle_returns
from .scaling import FitConfig, degree_distribution, fit_power
from .timeseries import rebase, returns


@dataclass(frozen=True, eq=False)
class BaseResult:
    base: str
    variant: str  # "real", "rm" or "fict"
    corr: object
    spectrum: object
    tree: object
    dist: object
    fit: object  # PowerFit, or None when the tree has too few distinct K
    fit_error: str | None = None

    @property
    def N(self):
        return self.tree.N

    @property
    def lambda_max(self):
        return self.spectrum.lambda_max if self.spectrum is not None else None


def analyse_returns(ret, variant="real", regime=None, fit_config=None, with_spectrum=True):
    C = correlation(ret)
    report = spectrum(C, regime or RegimeConfig()) if with_spectrum else None
    tree = build_mst(distances(C))
    dist = degree_distribution(tree)
    try:
        fit, err = fit_power(dist, fit_config or FitConfig()), None
    except InsufficientSupportError as exc:
        fit, err = None, str(exc)
    return BaseResult(ret.base, variant, C, report, tree, dist, fit, err)


def analyse_base(
    panel, base, tau=1, regime=None, fit_config=None, shuffle_seed=None, with_spectrum=True, variant=None
):
    """Run the chain for one base; ``shuffle_seed`` switches to the r.m. null model."""
    ret = returns(rebase(panel, base), tau)
    if shuffle_seed is not None:
        ret = shuffle_returns(ret, shuffle_seed)
    variant = variant or ("rm" if shuffle_seed is not None else "real")
    return analyse_returns(ret, variant, regime, fit_config, with_spectrum)
