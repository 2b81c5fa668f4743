"""Cumulative multiplicity distributions and inverse-power fits."""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientSupportError

GOOD = "GOOD"
POOR = "POOR"


@dataclass(frozen=True)
class FitConfig:
    poor_threshold: float = 0.09
    min_points: int = 3

    def __post_init__(self):
        if not self.poor_threshold > 0:
            raise ConfigError("poor_threshold must be positive")
        if self.min_points < 3:
            raise ConfigError("a slope with a standard error needs at least 3 points")


@dataclass(frozen=True)
class DegreeDistribution:
    N_total: int
    counts: dict  # K -> nodes with exactly K legs
    cumulative: dict  # K -> nodes with K or more legs, K = 1..K_max
    normalized: dict  # K -> cumulative / N_total
    K_max: int


@dataclass(frozen=True)
class PowerFit:
    alpha: float
    delta_alpha: float
    relative_error: float
    amplitude: float
    amplitude_F: float
    points_used: tuple
    quality_flag: str
    intercept: float = 0.0

    def predict(self, K):
        return self.amplitude * np.asarray(K, dtype=float) ** (-self.alpha)


@dataclass(frozen=True)
class DiscretenessBound:
    delta_mean: float
    delta_F: float
    relative_floor: float


def degree_distribution(tree_or_degrees):
    """Counts ``N'(K)`` and the suffix sums ``N(K)``, ``F(K)`` of a tree's multiplicities."""
    if hasattr(tree_or_degrees, "multiplicities"):
        degrees = list(tree_or_degrees.multiplicities.values())
    elif isinstance(tree_or_degrees, dict):
        degrees = list(tree_or_degrees.values())
    else:
        degrees = list(tree_or_degrees)
    if not degrees:
        raise ValueError("empty degree sequence")
    N = len(degrees)
    counts = Counter(int(k) for k in degrees)
    K_max = max(counts)
    cumulative = {}
    running = 0
    for K in range(K_max, 0, -1):
        running += counts.get(K, 0)
        cumulative[K] = running
    cumulative = dict(sorted(cumulative.items()))
    return DegreeDistribution(
        N_total=N,
        counts=dict(sorted(counts.items())),
        cumulative=cumulative,
        normalized={K: v / N for K, v in cumulative.items()},
        K_max=K_max,
    )


def fit_loglog(K, y, config=None, N_total=None):
    """OLS of ``ln y`` on ``ln K``; returns a PowerFit with ``alpha = -slope``.

    ``delta_alpha`` is the usual slope standard error,
    ``sqrt(SSR / (n - 2) / Sxx)``.
    """
    config = config or FitConfig()
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (y >= 1) if N_total is not None else (y > 0)
    K, y = K[keep], y[keep]
    if len(np.unique(K)) < config.min_points:
        raise InsufficientSupportError(
            f"power fit needs {config.min_points} distinct K values, got {len(np.unique(K))}"
        )
    x = np.log(K)
    z = np.log(y)
    n = len(x)
    xm, zm = x.mean(), z.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (z - zm)) / sxx)
    intercept = float(zm - slope * xm)
    resid = z - (intercept + slope * x)
    ssr = float(np.sum(resid**2))
    se = math.sqrt(ssr / (n - 2) / sxx)
    alpha = -slope
    if not alpha > 0:
        raise InsufficientSupportError(f"fitted exponent is not positive (alpha={alpha:.4g})")
    rel = se / alpha
    amplitude = math.exp(intercept)
    return PowerFit(
        alpha=alpha,
        delta_alpha=se,
        relative_error=rel,
        amplitude=amplitude,
        amplitude_F=amplitude / N_total if N_total else amplitude,
        points_used=tuple((int(k) if float(k).is_integer() else float(k), float(v)) for k, v in zip(K, y)),
        quality_flag=POOR if rel > config.poor_threshold else GOOD,
        intercept=intercept,
    )


def fit_power(dist, config=None):
    """Inverse-power fit ``N(K) ~ A K^-alpha`` over ``K = 1..K_max``."""
    Ks = sorted(dist.cumulative)
    return fit_loglog(Ks, [dist.cumulative[k] for k in Ks], config, N_total=dist.N_total)


def discreteness_floor(N_total):
    """Expected rounding deviation of an integer-valued N(K) and its normalized size.

    The nearest-integer deviation is uniform on ``[0, 1/2]`` for a perfect
    fit, so its mean is 1/4; divided by ``N`` it bounds how well ``F(K)``
    can be fitted.  ``relative_floor`` uses ``F <= 1``.
    """
    if N_total < 1:
        raise ValueError("N_total must be >= 1")
    delta = 0.25
    delta_F = delta / N_total
    return DiscretenessBound(delta_mean=delta, delta_F=delta_F, relative_floor=delta_F / 1.0)


@dataclass(frozen=True)
class GroupRow:
    label: str
    alpha: float
    delta_alpha: float
    relative_error: float
    lambda_max: float
    count: int
    alpha_std: float = 0.0


def group_fit(entries, label="", config=None):
    """Average per-tree fits over a currency group (one Table 1 row).

    ``entries`` is a sequence of ``(tree_or_fit, lambda_max)`` pairs.  alpha,
    delta_alpha, delta_alpha/alpha and lambda_max are plain arithmetic means of
    the per-tree values.
    """
    entries = list(entries)
    if not entries:
        raise ValueError(f"group {label!r} is empty")
    fits = []
    lams = []
    for item, lam in entries:
        fit = item if isinstance(item, PowerFit) else fit_power(degree_distribution(item), config)
        fits.append(fit)
        lams.append(float(lam))
    alphas = np.array([f.alpha for f in fits])
    return GroupRow(
        label=label,
        alpha=float(alphas.mean()),
        delta_alpha=float(np.mean([f.delta_alpha for f in fits])),
        relative_error=float(np.mean([f.relative_error for f in fits])),
        lambda_max=float(np.mean(lams)),
        count=len(fits),
        alpha_std=float(alphas.std()),
    )


def dumps_cumulative(dist, fit=None):
    """``K,N(K),F(K)`` rows, plus the fitted value when a fit is given."""
    buf = io.StringIO()
    buf.write("K,N_K,F_K" + (",fit_N_K" if fit else "") + "\n")
    for K, v in dist.cumulative.items():
        row = f"{K},{v},{dist.normalized[K]!r}"
        if fit:
            row += f",{float(fit.predict(K))!r}"
        buf.write(row + "\n")
    return buf.getvalue()


def dumps_fit_line(fit, K_max, samples=50):
    """Log-spaced samples of the fitted curve for plotting."""
    Ks = np.geomspace(1.0, max(K_max, 1.0 + 1e-9), samples)
    buf = io.StringIO()
    buf.write("K,N_fit\n")
    for K, v in zip(Ks, fit.predict(Ks)):
        buf.write(f"{K:.10g},{v:.10g}\n")
    return buf.getvalue()
