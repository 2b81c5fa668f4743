"""Correlation matrices of normalized returns and their eigenvalue spectra."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientDataError, NumericalError

MAX_SWEEPS = 100
NEGATIVE_TOL = 1e-8
SEPARATION_EPS = 1e-12


class Regime(str, enum.Enum):
    INDEPENDENT_DRIFT = "INDEPENDENT_DRIFT"
    TYPICAL = "TYPICAL"
    USD_TIED = "USD_TIED"


@dataclass(frozen=True)
class RegimeConfig:
    low_frac: float = 0.4
    high_frac: float = 0.65

    def __post_init__(self):
        if not 0 < self.low_frac < self.high_frac < 1:
            raise ConfigError(
                f"regime thresholds need 0 < low < high < 1, got ({self.low_frac}, {self.high_frac})"
            )


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    base: str
    currencies: tuple
    entries: np.ndarray
    T: int
    degenerate: tuple = ()

    @property
    def N(self):
        return len(self.currencies)

    def trace(self):
        return float(np.trace(self.entries))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray  # ascending
    lambda_max: float
    lambda_second: float
    regime: Regime
    thresholds: tuple
    base: str | None = None
    sweeps: int = 0

    @property
    def N(self):
        return len(self.eigenvalues)


def correlation(ret):
    """``C = M M^T / T`` over the standardized return rows of ``ret``.

    Each pair is computed once from the upper triangle and mirrored so the
    result is exactly symmetric.  The diagonal is exactly one; entries that
    involve a constant (degenerate) row are zero off the diagonal.
    """
    M = ret.values
    N, T = M.shape
    if N < 2 or T < 2:
        raise InsufficientDataError(f"correlation needs N >= 2 and T >= 2, got N={N}, T={T}")
    C = (M @ M.T) / T
    upper = np.triu(C, k=1)
    C = upper + upper.T
    np.clip(C, -1.0, 1.0, out=C)
    degenerate = np.array(ret.degenerate, dtype=bool)
    C[degenerate, :] = 0.0
    C[:, degenerate] = 0.0
    np.fill_diagonal(C, 1.0)
    C.setflags(write=False)
    return CorrelationMatrix(ret.base, tuple(ret.currencies), C, T, tuple(ret.degenerate))


def _round_robin(n):
    """Rounds of disjoint index pairs covering every pair of ``range(n)`` once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _max_off(A):
    off = np.abs(A - np.diag(np.diag(A)))
    return float(off.max()) if off.size else 0.0


def jacobi_eigenvalues(A, tol=None, max_sweeps=MAX_SWEEPS):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps follow a round-robin ordering: each round annihilates a set of
    disjoint off-diagonal pairs, so one round is a single row update and a
    single column update.  Iteration stops once the largest off-diagonal
    magnitude is at most ``tol`` (default ``1e-12 * N`` scaled by the largest
    diagonal magnitude when that exceeds one).

    Returns ``(eigenvalues ascending, sweeps used)``.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    if not np.array_equal(A, A.T):
        raise ValueError("matrix must be symmetric")
    if n == 0:
        return np.empty(0), 0
    if tol is None:
        tol = 1e-12 * n * max(1.0, float(np.abs(np.diag(A)).max()))
    rounds = _round_robin(n)
    sweeps = 0
    off = _max_off(A)
    while off > tol:
        if sweeps >= max_sweeps:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps (max off-diagonal {off:.3e})",
                off_norm=float(np.sqrt(np.sum(np.triu(A, 1) ** 2) * 2)),
            )
        for p, q in rounds:
            if p.size == 0:
                continue
            apq = A[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            rp, rq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p], A[:, q]
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
        sweeps += 1
        off = _max_off(A)
    return np.sort(np.diag(A)), sweeps


def classify_regime(report_or_lambda, N, low_frac=0.4, high_frac=0.65):
    lam = report_or_lambda.lambda_max if isinstance(report_or_lambda, SpectrumReport) else float(report_or_lambda)
    if N < 2:
        raise ValueError("regime classification needs N >= 2")
    if lam > high_frac * N:
        return Regime.INDEPENDENT_DRIFT
    if lam < low_frac * N:
        return Regime.USD_TIED
    return Regime.TYPICAL


def spectrum(C, regime=None):
    """Full spectrum of a correlation matrix plus its Fig.-1 style regime."""
    regime = regime or RegimeConfig()
    entries = C.entries if isinstance(C, CorrelationMatrix) else np.asarray(C, dtype=float)
    base = C.base if isinstance(C, CorrelationMatrix) else None
    N = entries.shape[0]
    if N < 2:
        raise InsufficientDataError("spectrum needs N >= 2")
    eig, sweeps = jacobi_eigenvalues(entries)
    if eig[0] < -NEGATIVE_TOL:
        raise NumericalError(f"correlation matrix is not positive semidefinite: smallest eigenvalue {eig[0]:.3e}")
    eig = np.maximum(eig, 0.0)
    eig.setflags(write=False)
    lam_max = float(eig[-1])
    return SpectrumReport(
        eigenvalues=eig,
        lambda_max=lam_max,
        lambda_second=float(eig[-2]),
        regime=classify_regime(lam_max, N, regime.low_frac, regime.high_frac),
        thresholds=(regime.low_frac, regime.high_frac),
        base=base,
        sweeps=sweeps,
    )


def second_eigenvalue_separation(report):
    """Gap of the second-largest eigenvalue over the bulk below it.

    ``(l[N-1] - l[N-2]) / (l[N-2] - l[1] + eps)``; large values mean the
    second eigenvalue stands clear of the rest of the spectrum.
    """
    eig = report.eigenvalues
    if len(eig) < 3:
        raise InsufficientDataError("separation needs N >= 3")
    return float((eig[-2] - eig[-3]) / (eig[-3] - eig[0] + SEPARATION_EPS))


SPECTRUM_HEADER = "base,N,lambda_max,lambda_second,lambda_max_over_N,regime"


def spectrum_row(report):
    N = report.N
    return (
        f"{report.base},{N},{report.lambda_max:.10g},{report.lambda_second:.10g},"
        f"{report.lambda_max / N:.10g},{report.regime.value}"
    )


def dumps_spectra(reports):
    """Fig. 1 data: one row per base currency, sorted by lambda_max descending."""
    buf = io.StringIO()
    buf.write(SPECTRUM_HEADER + "\n")
    for r in sorted(reports, key=lambda r: (-r.lambda_max, r.base or "")):
        buf.write(spectrum_row(r) + "\n")
    return buf.getvalue()
