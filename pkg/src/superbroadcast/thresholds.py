"""Superbroadcasting boundary: critical purity r*, maximal fan-out M*, asymptotics."""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError
from .scaling import INF, Covariance, ScalingProfile, scaling_factor, scaling_profile

GRID_STEP = 1e-3
# No probes below the first node: cancellation in the term sums grows like
# eps/r there, enough to lift p above 1 where its r -> 0 limit is exactly 1
# (e.g. N=3, M=4 universal).
SCAN_GRID = np.arange(1, 1001) * GRID_STEP


@lru_cache(maxsize=8)
def _scan_profile(N: int, covariance: Covariance) -> ScalingProfile:
    return scaling_profile(N, SCAN_GRID, covariance)


@dataclass(frozen=True)
class ThresholdRecord:
    N: int
    M: float
    covariance: Covariance
    r_star: Optional[float]


def _sign_change(values: np.ndarray) -> Optional[int]:
    """Index k of the last transition values[k] > 1 >= values[k+1]."""
    above = values > 1.0
    idx = np.nonzero(above[:-1] & ~above[1:])[0]
    return int(idx[-1]) if len(idx) else None


def _refine_peak(N: int, M: float, covariance: Covariance, grid: np.ndarray,
                 values: np.ndarray) -> Optional[tuple[float, int]]:
    """Look between grid nodes around the best node for a value above 1."""
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda r: -scaling_factor(N, M, r, covariance),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    if -res.fun > 1.0:
        nxt = int(np.searchsorted(grid, res.x, side="right"))
        if nxt < len(grid) and values[nxt] <= 1.0:
            return float(res.x), nxt
    return None


def _bracket(profile: ScalingProfile, M: float, compensated: bool = True):
    values = profile.evaluate(M, compensated=compensated)
    k = _sign_change(values)
    if k is not None:
        return float(profile.r[k]), float(profile.r[k + 1])
    if values.max() > 1.0 - 1e-3:
        found = _refine_peak(profile.N, M, profile.covariance, profile.r, values)
        if found is not None:
            return found[0], float(profile.r[found[1]])
    return None


def critical_purity(N: int, M: float, covariance: Covariance | str,
                    profile: Optional[ScalingProfile] = None) -> Optional[float]:
    """Largest r in (0, 1) with p^{N,M}(r) = 1, or None without superbroadcasting.

    ``M`` may be ``math.inf`` for the large-fan-out limit.
    """
    covariance = Covariance(covariance)
    if M != INF and M < N:
        raise DomainError(f"need M >= N, got N={N}, M={M}")
    if profile is None:
        profile = _scan_profile(N, covariance)
    br = _bracket(profile, M)
    if br is None:
        return None
    lo, hi = br
    f = lambda r: scaling_factor(N, M, r, covariance) - 1.0  # noqa: E731
    if f(hi) == 0.0:
        return hi
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def threshold_record(N: int, M: float, covariance: Covariance | str) -> ThresholdRecord:
    covariance = Covariance(covariance)
    return ThresholdRecord(N, M, covariance, critical_purity(N, M, covariance))


def max_output_copies(N: int, covariance: Covariance | str, search_cap: int = 2000,
                      detect_infinity: bool = True) -> Union[int, float, None]:
    """M*(N): largest output count that still allows superbroadcasting.

    Returns ``math.inf`` when the M -> infinity limit itself superbroadcasts
    (only checked with ``detect_infinity``), otherwise the largest
    M in (N, search_cap] with a critical purity, or None if there is none.
    """
    covariance = Covariance(covariance)
    if N < 1:
        raise DomainError("N must be at least 1")
    if search_cap < N:
        raise DomainError("search_cap must be at least N")
    profile = _scan_profile(N, covariance)
    if detect_infinity and _bracket(profile, INF) is not None:
        return INF
    for M in range(search_cap, N, -1):
        # Uncompensated sums only decide which M to look at closely.
        values = profile.evaluate(M, compensated=False)
        if values.max() < 1.0 - 1e-3:
            continue
        if _bracket(profile, M) is not None:
            return M
    return None


def _fit_points(covariance: Covariance, which: str, N_values: Iterable[int]):
    Ns, gaps = [], []
    for N in N_values:
        if which == "N+1":
            M = N + 1
        elif which == "Mstar":
            M = max_output_copies(N, covariance)
            if M is None:
                continue
        else:
            raise DomainError(f"which must be 'N+1' or 'Mstar', got {which!r}")
        r_star = critical_purity(N, M, covariance)
        if r_star is not None:
            Ns.append(N)
            gaps.append(1.0 - r_star)
    return np.array(Ns, dtype=float), np.array(gaps)


def asymptotic_fit(covariance: Covariance | str, which: str,
                   N_range: Iterable[int]) -> tuple[float, float]:
    """Least-squares fit of 1 - r* = c N^a on log-log axes; returns (c, a)."""
    covariance = Covariance(covariance)
    Ns, gaps = _fit_points(covariance, which, N_range)
    if len(Ns) < 3:
        raise DomainError("need at least 3 points with a critical purity to fit")
    slope, intercept = np.polyfit(np.log(Ns), np.log(gaps), 1)
    return math.exp(intercept), float(slope)
