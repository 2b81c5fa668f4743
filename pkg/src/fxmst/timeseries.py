"""Exchange-rate panels: ingestion, cleaning, rebasing and log-returns.

A panel holds ``x_A^B(t)``, the value of one unit of currency ``A`` expressed
in the base currency ``B``.  Cross rates follow ``x_A^C = x_A^B / x_C^B``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .currencies import check_code
from .errors import (
    ConfigError,
    InsufficientDataError,
    ParseError,
    SeriesRejectedError,
    UnknownCurrencyError,
)

log = logging.getLogger(__name__)

POLICIES = ("drop-day", "clip", "interpolate")

# rows whose return standard deviation falls below this are treated as constant
DEGENERATE_STD = 1e-12


@dataclass(frozen=True)
class CleaningConfig:
    threshold: float = 5.0
    policy: str = "drop-day"
    min_length: int = 30
    gap_policy: str = "intersect"
    max_passes: int = 20

    def __post_init__(self):
        if not self.threshold > 0:
            raise ConfigError(f"jump threshold must be positive, got {self.threshold}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown repair policy {self.policy!r}; expected one of {POLICIES}")
        if self.gap_policy != "intersect":
            raise ConfigError(f"unknown gap policy {self.gap_policy!r}; only 'intersect' is supported")
        if self.min_length < 2:
            raise ConfigError("min_length must be at least 2")


@dataclass(frozen=True, eq=False)
class RatePanel:
    base: str
    currencies: tuple
    timestamps: np.ndarray  # datetime64[D], strictly increasing
    rates: np.ndarray  # (T+1, N), all finite and > 0

    def __post_init__(self):
        check_code(self.base)
        currencies = tuple(check_code(c) for c in self.currencies)
        object.__setattr__(self, "currencies", currencies)
        if len(set(currencies)) != len(currencies):
            raise ValueError("duplicate currency in panel")
        if self.base in currencies:
            raise ValueError(f"base {self.base} must not appear among the panel currencies")
        ts = np.asarray(self.timestamps, dtype="datetime64[D]")
        rates = np.array(self.rates, dtype=float)
        if rates.ndim != 2 or rates.shape != (len(ts), len(currencies)):
            raise ValueError(f"rates shape {rates.shape} does not match ({len(ts)}, {len(currencies)})")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0):
            raise ValueError("rates must be finite and strictly positive")
        if len(ts) > 1 and not np.all(ts[1:] > ts[:-1]):
            raise ValueError("timestamps must be strictly increasing")
        ts.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "rates", rates)

    @property
    def n(self):
        """Total number of currencies including the base."""
        return len(self.currencies) + 1

    @property
    def N(self):
        return len(self.currencies)

    @property
    def all_codes(self):
        return (self.base,) + self.currencies

    def index(self, code):
        try:
            return self.currencies.index(code)
        except ValueError:
            raise UnknownCurrencyError(code) from None

    def rate(self, code):
        """Series of ``code`` in the panel's base; the base itself is 1."""
        if code == self.base:
            return np.ones(len(self.timestamps))
        return self.rates[:, self.index(code)]

    def cross(self, a, b):
        """Series ``x_a^b`` derived through the panel base."""
        if a == b:
            raise ValueError("cross rate needs two distinct currencies")
        return self.rate(a) / self.rate(b)

    def equals(self, other):
        return (
            self.base == other.base
            and self.currencies == other.currencies
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.rates, other.rates)
        )

    def with_series(self, code, series):
        """Return a copy with one extra currency column appended."""
        series = np.asarray(series, dtype=float).reshape(-1, 1)
        return RatePanel(self.base, self.currencies + (code,), self.timestamps, np.hstack([self.rates, series]))

    def select(self, codes):
        idx = [self.index(c) for c in codes]
        return RatePanel(self.base, tuple(codes), self.timestamps, self.rates[:, idx])


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    base: str
    currencies: tuple
    tau: int
    values: np.ndarray  # N x T normalized returns g
    raw: np.ndarray  # N x T log-returns G
    degenerate: tuple = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        raw = np.array(self.raw, dtype=float)
        if values.shape != raw.shape or values.ndim != 2 or values.shape[0] != len(self.currencies):
            raise ValueError("values/raw shape mismatch")
        degenerate = tuple(bool(d) for d in self.degenerate) or (False,) * len(self.currencies)
        if len(degenerate) != len(self.currencies):
            raise ValueError("degenerate flags length mismatch")
        values.setflags(write=False)
        raw.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "degenerate", degenerate)
        object.__setattr__(self, "currencies", tuple(self.currencies))

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def T(self):
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# Parsing and serialization


def _parse_date(text, lineno):
    try:
        return np.datetime64(text.strip(), "D")
    except ValueError:
        raise ParseError(f"bad date {text!r}; expected YYYY-MM-DD", lineno) from None


def parse_panel(text, config=None):
    """Parse long-form ``date,currency,rate`` text into a cleaned panel.

    The reference currency is declared in a leading comment line of the form
    ``# reference: USD``.  Comma and tab delimiters are both accepted.
    """
    config = config or CleaningConfig()
    reference = None
    header_seen = False
    delimiter = ","
    series = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            key, sep, value = body.partition(":")
            if not sep:
                key, sep, value = body.partition("=")
            if sep and key.strip().lower() == "reference":
                try:
                    reference = check_code(value.strip())
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
            continue
        if not header_seen:
            delimiter = "\t" if "\t" in line else ","
            cols = [c.strip().lower() for c in line.split(delimiter)]
            if cols != ["date", "currency", "rate"]:
                raise ParseError(f"expected header 'date,currency,rate', got {stripped!r}", lineno)
            header_seen = True
            continue
        cells = next(csv.reader([line], delimiter=delimiter))
        if len(cells) != 3:
            raise ParseError(f"expected 3 fields, got {len(cells)}", lineno)
        date = _parse_date(cells[0], lineno)
        code = cells[1].strip()
        try:
            check_code(code)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        try:
            rate = float(cells[2])
        except ValueError:
            raise ParseError(f"bad rate {cells[2]!r}", lineno) from None
        if not math.isfinite(rate) or rate <= 0:
            raise ParseError(f"rate must be finite and positive, got {cells[2].strip()}", lineno)
        per_code = series.setdefault(code, {})
        if date in per_code:
            raise ParseError(f"duplicate row for {code} on {date}", lineno)
        per_code[date] = rate
    if not header_seen:
        raise ParseError("missing header row 'date,currency,rate'")
    if reference is None:
        raise ParseError("missing '# reference: XXX' declaration")
    series.pop(reference, None)
    if len(series) < 1:
        raise InsufficientDataError("input holds no currency besides the reference")

    short = sorted(c for c, s in series.items() if len(s) < config.min_length)
    if short:
        raise SeriesRejectedError(short, config.min_length)

    codes = sorted(series)
    common = set.intersection(*(set(s) for s in series.values()))
    if len(common) < config.min_length:
        raise SeriesRejectedError(codes, config.min_length)
    dates = np.array(sorted(common), dtype="datetime64[D]")
    rates = np.array([[series[c][d] for c in codes] for d in dates], dtype=float)
    return clean_panel(RatePanel(reference, tuple(codes), dates, rates), config)


def load_panel(source, config=None):
    """Read a rate file from ``source`` (path or text stream) and clean it."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    return parse_panel(text, config)


def dumps_panel(panel):
    buf = io.StringIO()
    buf.write(f"# reference: {panel.base}\n")
    buf.write("date,currency,rate\n")
    for i, ts in enumerate(panel.timestamps):
        day = str(ts)
        for j, code in enumerate(panel.currencies):
            buf.write(f"{day},{code},{float(panel.rates[i, j])!r}\n")
    return buf.getvalue()


def write_panel(panel, path):
    Path(path).write_text(dumps_panel(panel), encoding="utf-8")


# ---------------------------------------------------------------------------
# Cleaning


def _deviations(logx):
    changes = np.diff(logx)
    sigma = changes.std()
    return changes - changes.mean(), sigma


def _spike_days(logx, threshold):
    """Indices of isolated misprint days and a count of lone (level-shift) jumps.

    A spike shows up as two consecutive flagged one-day changes of opposite
    sign; the day between them is the offender.  A flagged change into the
    final day is also treated as a spike.
    """
    dev, sigma = _deviations(logx)
    if sigma == 0:
        return [], 0
    flagged = np.abs(dev) > threshold * sigma
    days = []
    covered = np.zeros_like(flagged)
    T = len(dev)
    for d in range(1, T):
        if flagged[d - 1] and flagged[d] and not covered[d - 1] and np.sign(dev[d - 1]) != np.sign(dev[d]):
            days.append(d)
            covered[d - 1] = covered[d] = True
    if T >= 1 and flagged[T - 1] and not covered[T - 1]:
        days.append(T)
        covered[T - 1] = True
    lone = int(np.count_nonzero(flagged & ~covered))
    return days, lone


def clean_panel(panel, config=None):
    """Repair jumps larger than ``threshold`` standard deviations.

    ``drop-day`` removes spike timestamps from every series, ``interpolate``
    replaces the spike value with the geometric mean of its neighbours, and
    ``clip`` limits every flagged one-day log-change to ``mean +- threshold*sigma``.
    The first two are iterated to a fixed point with sigma recomputed on each
    pass, so cleaning a cleaned panel is a no-op.
    """
    config = config or CleaningConfig()
    logx = np.log(panel.rates)
    timestamps = panel.timestamps
    if config.policy == "clip":
        out = logx.copy()
        for j in range(logx.shape[1]):
            dev, sigma = _deviations(logx[:, j])
            if sigma == 0:
                continue
            limit = config.threshold * sigma
            if not np.any(np.abs(dev) > limit):
                continue
            changes = np.diff(logx[:, j])
            mean = changes.mean()
            clipped = mean + np.clip(changes - mean, -limit, limit)
            out[1:, j] = logx[0, j] + np.cumsum(clipped)
        if np.array_equal(out, logx):
            return panel
        return _rebuild(panel, timestamps, out, config)

    changed = False
    for _ in range(config.max_passes):
        drop = set()
        repaired = 0
        lone_total = 0
        for j in range(logx.shape[1]):
            days, lone = _spike_days(logx[:, j], config.threshold)
            lone_total += lone
            if config.policy == "drop-day":
                drop.update(days)
                continue
            for d in days:
                if d == len(logx) - 1:
                    logx[d, j] = logx[d - 1, j]
                else:
                    logx[d, j] = 0.5 * (logx[d - 1, j] + logx[d + 1, j])
                repaired += 1
        if drop:
            keep = np.ones(len(logx), dtype=bool)
            keep[sorted(drop)] = False
            logx = logx[keep]
            timestamps = timestamps[keep]
            log.info("dropped %d jump day(s) across all series", len(drop))
            if len(timestamps) < config.min_length:
                raise SeriesRejectedError(panel.currencies, config.min_length)
        if not (drop or repaired):
            if lone_total:
                log.warning("%d level-shift jump(s) left in place by policy %s", lone_total, config.policy)
            break
        changed = True
    else:
        log.warning("jump repair did not reach a fixed point in %d passes", config.max_passes)
    if not changed:
        return panel
    return _rebuild(panel, timestamps, logx, config)


def _rebuild(panel, timestamps, logx, config):
    if len(timestamps) < config.min_length:
        raise SeriesRejectedError(panel.currencies, config.min_length)
    return RatePanel(panel.base, panel.currencies, timestamps, np.exp(logx))


# ---------------------------------------------------------------------------
# Rebasing and returns


def rebase(panel, new_base):
    """Express every rate in ``new_base``; the old base becomes a column.

    The old base takes the column position previously held by ``new_base`` so
    a round trip restores the original ordering.
    """
    if new_base == panel.base:
        return panel
    k = panel.index(new_base)
    pivot = panel.rates[:, k]
    rates = panel.rates / pivot[:, None]
    rates[:, k] = 1.0 / pivot
    currencies = list(panel.currencies)
    currencies[k] = panel.base
    return RatePanel(new_base, tuple(currencies), panel.timestamps, rates)


def _normalize(raw):
    mean = raw.mean(axis=1, keepdims=True)
    std = raw.std(axis=1, keepdims=True)
    degenerate = std[:, 0] < DEGENERATE_STD
    safe = np.where(degenerate[:, None], 1.0, std)
    values = (raw - mean) / safe
    values[degenerate] = 0.0
    return values, degenerate


def log_returns(rates, tau=1):
    """Non-overlapping log-returns ``ln x(t+tau) - ln x(t)`` along axis 0."""
    logx = np.log(np.asarray(rates, dtype=float))[::tau]
    return np.diff(logx, axis=0)


def returns(panel, tau=1):
    """Raw and standardized log-return matrix (rows = currencies) at horizon ``tau``.

    Returns are sampled every ``tau`` trading days.  Each row is standardized
    with its mean and population standard deviation; constant rows become
    zeros and are flagged as degenerate.
    """
    if not isinstance(tau, (int, np.integer)) or tau < 1:
        raise ValueError(f"tau must be a positive integer, got {tau!r}")
    if tau >= len(panel.timestamps):
        raise InsufficientDataError(
            f"tau={tau} needs more than {len(panel.timestamps)} timestamps"
        )
    raw = log_returns(panel.rates, tau).T
    if raw.shape[1] < 1:
        raise InsufficientDataError("no return intervals")
    values, degenerate = _normalize(raw)
    for code, flag in zip(panel.currencies, degenerate):
        if flag:
            log.warning("constant return series for %s in base %s", code, panel.base)
    return ReturnMatrix(panel.base, panel.currencies, int(tau), values, raw, tuple(degenerate))


def triangle_residual_series(x_ab, x_bc, x_ca, tau=1):
    """Max-abs ``G_a^b + G_b^c + G_c^a`` over time for three rate series."""
    total = log_returns(x_ab, tau) + log_returns(x_bc, tau) + log_returns(x_ca, tau)
    return float(np.max(np.abs(total))) if total.size else 0.0


def triangle_residual(panel, a, b, c, tau=1):
    codes = panel.all_codes
    for code in (a, b, c):
        if code not in codes:
            raise UnknownCurrencyError(code)
    if len({a, b, c}) != 3:
        raise ValueError("triangle rule needs three distinct currencies")
    return triangle_residual_series(panel.cross(a, b), panel.cross(b, c), panel.cross(c, a), tau)
