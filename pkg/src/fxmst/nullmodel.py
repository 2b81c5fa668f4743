"""Null models and synthetic markets.

Randomness comes from numpy's PCG64 bit generator.  Every stochastic step
draws from its own substream ``SeedSequence(seed, spawn_key=(stream, index))``
where ``stream`` identifies the operation and ``index`` the series, so the
output for one series never depends on how many other series were drawn or
in which order.
"""

from __future__ import annotations

import json
import math
import string
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .currencies import Group, GroupTable
from .errors import ConfigError, InsufficientSupportError, UnknownCurrencyError
from .mstgraph import MstTree
from .scaling import degree_distribution, fit_power
from .timeseries import RatePanel, ReturnMatrix

# substream identifiers
_HUB, _SERIES, _TOPOLOGY, _SHUFFLE, _FICT, _LEVEL, _PA = range(7)

FIC_CODE = "FIC"
START_DATE = "1998-12-01"


def rng_for(seed, stream, index=0):
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream, index))
    return np.random.Generator(np.random.PCG64(ss))


def business_days(count, start=START_DATE):
    return np.busday_offset(np.datetime64(start, "D"), np.arange(count), roll="forward")


def synthetic_code(prefix, index):
    """Three-letter code ``prefix`` + base-26 letters of ``index``."""
    width = 3 - len(prefix)
    letters = []
    for _ in range(width):
        index, r = divmod(index, 26)
        letters.append(string.ascii_uppercase[r])
    if index:
        raise ValueError("synthetic code space exhausted")
    return prefix + "".join(reversed(letters))


# ---------------------------------------------------------------------------
# Shuffled ("r.m.") null model


def shuffle_returns(ret, seed):
    """Permute every return row independently, destroying cross-correlations.

    Row ``i`` is permuted by a Fisher-Yates shuffle driven by substream ``i``;
    the raw and normalized grids share the permutation.
    """
    values = np.array(ret.values)
    raw = np.array(ret.raw)
    for i in range(ret.N):
        perm = rng_for(seed, _SHUFFLE, i).permutation(ret.T)
        values[i] = values[i, perm]
        raw[i] = raw[i, perm]
    return ReturnMatrix(ret.base, ret.currencies, ret.tau, values, raw, ret.degenerate)


# ---------------------------------------------------------------------------
# Fictitious Gaussian currency


def default_fict_sigma(panel):
    """Median standard deviation of the panel's one-day log-returns."""
    r = np.diff(np.log(panel.rates), axis=0)
    return float(np.median(r.std(axis=0)))


def fictitious_currency(panel, anchor, sigma=None, seed=0, mode="walk", code=FIC_CODE):
    """Append a currency whose rate to ``anchor`` is Gaussian noise.

    ``mode="walk"`` makes the log-rate a Gaussian random walk with step
    ``sigma``; ``mode="level"`` draws i.i.d. log-normal levels instead.
    Rates against the panel base go through the anchor, so every triangle
    involving the new currency closes exactly.
    """
    if anchor not in panel.all_codes:
        raise UnknownCurrencyError(anchor)
    if code in panel.all_codes:
        raise ValueError(f"currency {code} already present")
    if sigma is None:
        sigma = default_fict_sigma(panel)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    steps = len(panel.timestamps)
    z = rng_for(seed, _FICT).standard_normal(steps)
    if mode == "walk":
        log_level = np.concatenate([[0.0], np.cumsum(sigma * z[1:])])
    elif mode == "level":
        log_level = sigma * z
    else:
        raise ValueError(f"unknown fictitious-currency mode {mode!r}")
    series = np.exp(log_level) * panel.rate(anchor)
    return panel.with_series(code, series)


# ---------------------------------------------------------------------------
# Synthetic market


@dataclass(frozen=True)
class MarketModel:
    """Latent-factor market quoted against a reference currency.

    One currency (the hub) carries the common factor itself; every tied
    currency and each bloc leader loads on it with weight ``sqrt(hub_strength)``.
    Inside a bloc of ``(size, intra)`` the members form a peg tree grown by
    preferential attachment and each member loads on its parent with weight
    ``sqrt(intra)``.  Drifters are independent, more volatile random walks with
    a trend.

    The reference currency behaves like a tied currency scaled by
    ``sqrt(reference_coupling)``.  With coupling 0 it is a quiet numeraire and
    returns in the reference base show the latent correlations directly; with
    coupling 1 it is an ordinary member of the market.
    """

    n_currencies: int = 60
    hub_strength: float = 0.6
    blocs: tuple = ((20, 0.7), (15, 0.7), (8, 0.7))
    drifters: int = 5
    T: int = 1657
    vol: float = 0.006
    drifter_vol: float = 3.0
    drifter_trend: float = 0.3
    bloc_attachment: float = 0.0
    reference_coupling: float = 1.0
    reference: str = "REF"
    hub: str = "HUB"

    def __post_init__(self):
        object.__setattr__(self, "blocs", tuple((int(s), float(r)) for s, r in self.blocs))
        if not 0.0 <= self.hub_strength <= 1.0:
            raise ConfigError("hub_strength must lie in [0, 1]")
        for size, intra in self.blocs:
            if size < 1 or not 0.0 <= intra <= 1.0:
                raise ConfigError(f"bad bloc ({size}, {intra}): need size >= 1 and intra in [0, 1]")
        if self.drifters < 0 or self.T < 2 or self.vol <= 0 or self.drifter_vol <= 0:
            raise ConfigError("drifters >= 0, T >= 2, vol > 0 and drifter_vol > 0 are required")
        if not 0.0 <= self.reference_coupling <= 1.0:
            raise ConfigError("reference_coupling must lie in [0, 1]")
        if self.bloc_attachment <= -1.0:
            raise ConfigError("bloc_attachment must exceed -1")
        if self.n_tied < 0:
            raise ConfigError(
                f"blocs ({sum(s for s, _ in self.blocs)}) + drifters ({self.drifters}) + hub "
                f"+ reference exceed n_currencies ({self.n_currencies})"
            )
        if self.reference == self.hub:
            raise ConfigError("reference and hub must differ")

    @property
    def n_tied(self):
        return self.n_currencies - 2 - sum(s for s, _ in self.blocs) - self.drifters

    def layout(self):
        """List of ``(code, role, group)`` in column order (reference excluded)."""
        rows = [(self.hub, "hub", Group.A_STAR)]
        rows += [(synthetic_code("T", i), "tied", Group.A) for i in range(self.n_tied)]
        for b, (size, _) in enumerate(self.blocs):
            prefix = "B" + string.ascii_uppercase[b % 26]
            for k in range(size):
                if k == 0:
                    rows.append((prefix + "A", "leader", Group.A_STAR))
                else:
                    rows.append((synthetic_code(prefix, k), f"bloc{b}", Group.B if b % 2 == 0 else Group.C))
        rows += [(synthetic_code("D", i), "drifter", Group.METAL) for i in range(self.drifters)]
        codes = [r[0] for r in rows] + [self.reference]
        if len(set(codes)) != len(codes):
            raise ConfigError("synthetic currency codes collide; rename reference or hub")
        return rows

    def groups(self):
        table = {code: group for code, _, group in self.layout()}
        table[self.reference] = Group.A_STAR
        return GroupTable(table)

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known - {"seed"}
        if unknown:
            raise ConfigError(f"unknown market model keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k in known}
        if "blocs" in kwargs:
            kwargs["blocs"] = tuple(tuple(b) for b in kwargs["blocs"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"market model {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        d = asdict(self)
        d["blocs"] = [list(b) for b in self.blocs]
        return d


def _pa_parents(size, offset, rng):
    """Parent index of every node in a tree grown by attachment ~ (degree + offset)."""
    parents = [-1]
    weight = np.zeros(size)
    if size > 0:
        weight[0] = 1.0 + offset
    for i in range(1, size):
        cum = np.cumsum(weight[:i])
        j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        j = min(j, i - 1)
        parents.append(j)
        weight[j] += 1.0
        weight[i] = 1.0 + offset
    return parents


def latent_returns(model, seed):
    """Latent value returns: rows follow ``model.layout()``, then the reference."""
    layout = model.layout()
    T = model.T
    f = rng_for(seed, _HUB).standard_normal(T)
    a, b = math.sqrt(model.hub_strength), math.sqrt(1.0 - model.hub_strength)
    g = np.empty((len(layout) + 1, T))
    g[0] = f
    row = 1
    for i in range(model.n_tied):
        g[row] = a * f + b * rng_for(seed, _SERIES, row).standard_normal(T)
        row += 1
    for bi, (size, intra) in enumerate(model.blocs):
        parents = _pa_parents(size, model.bloc_attachment, rng_for(seed, _TOPOLOGY, bi))
        start = row
        pa, pb = math.sqrt(intra), math.sqrt(1.0 - intra)
        for k in range(size):
            noise = rng_for(seed, _SERIES, row).standard_normal(T)
            if parents[k] < 0:
                g[row] = a * f + b * noise
            else:
                g[row] = pa * g[start + parents[k]] + pb * noise
            row += 1
    for _ in range(model.drifters):
        z = rng_for(seed, _SERIES, row).standard_normal(T)
        g[row] = model.drifter_trend + model.drifter_vol * z
        row += 1
    c = math.sqrt(model.reference_coupling)
    g[row] = c * (a * f + b * rng_for(seed, _SERIES, row).standard_normal(T))
    return model.vol * g


def generate_market(model, seed):
    """Rate panel (base = model reference) for a synthetic market, pure in ``seed``."""
    layout = model.layout()
    g = latent_returns(model, seed)
    g = g[:-1] - g[-1]
    start = rng_for(seed, _LEVEL).uniform(-2.0, 2.0, size=len(layout))
    log_rates = start[:, None] + np.concatenate([np.zeros((len(layout), 1)), np.cumsum(g, axis=1)], axis=1)
    return RatePanel(
        model.reference,
        tuple(code for code, _, _ in layout),
        business_days(model.T + 1),
        np.exp(log_rates.T),
    )


# ---------------------------------------------------------------------------
# Preferential-attachment trees


def pa_tree(n, offset, seed, index=0):
    """Tree on ``n`` nodes grown with attachment probability ~ (K + offset)."""
    if n < 2:
        raise ValueError("tree needs at least 2 nodes")
    parents = _pa_parents(n, offset, rng_for(seed, _PA, index))
    codes = tuple(synthetic_code("", i) for i in range(n))
    edges = []
    degree = [0] * n
    for child, parent in enumerate(parents):
        if parent < 0:
            continue
        a, b = sorted((codes[child], codes[parent]))
        edges.append((a, b, 1.0))
        degree[child] += 1
        degree[parent] += 1
    return MstTree(None, codes, tuple(edges), dict(zip(codes, degree)))


CALIBRATION_SEED = 0x5EED
CALIBRATION_TREES = 200


def _mean_fitted_alpha(n, offset, trees=CALIBRATION_TREES):
    alphas = []
    for i in range(trees):
        try:
            alphas.append(fit_power(degree_distribution(pa_tree(n, offset, CALIBRATION_SEED, i))).alpha)
        except InsufficientSupportError:
            continue
    return float(np.mean(alphas))


@lru_cache(maxsize=64)
def attachment_offset(alpha, n):
    """Offset whose ``n``-node trees have mean fitted exponent ``alpha``.

    The log-log fit of N(K) on small trees is biased well below the
    asymptotic ``2 + offset``, so the offset is found by bisection against
    the fit itself on a fixed calibration ensemble.
    """
    lo, hi = -0.99, 20.0
    f_lo, f_hi = _mean_fitted_alpha(n, lo), _mean_fitted_alpha(n, hi)
    if not f_lo <= alpha <= f_hi:
        raise ValueError(f"alpha={alpha} outside reachable range [{f_lo:.3f}, {f_hi:.3f}] for n={n}")
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if _mean_fitted_alpha(n, mid) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-3:
            break
    return 0.5 * (lo + hi)


def preferential_attachment_tree(n, alpha, seed, index=0):
    """Preferential-attachment tree whose fitted exponent targets ``alpha``."""
    return pa_tree(n, attachment_offset(float(alpha), int(n)), seed, index)
