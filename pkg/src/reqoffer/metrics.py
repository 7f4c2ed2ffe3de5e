"""Survivability statistics over per-vertex outcome records.

All functions are pure: they take SurvivalRecord sequences (or profiles
derived from them) and return plain values, so per-realization results
can be merged for ensemble aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DEATH_NO_MONEY, CENSORED, SurvivalRecord


@dataclass
class DegreeProfile:
    """Per-degree means: lifetime, money-death fraction, and saves.

    Arrays are aligned and sorted by degree; counts let profiles from
    different realizations merge exactly.
    """

    degrees: np.ndarray
    counts: np.ndarray
    mean_lifetime: np.ndarray
    mu: np.ndarray  # fraction of the degree class that died holding too little money
    mean_saves: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class LowHighDecomposition:
    f_low: float
    f_high: float
    mean_low: float | None
    mean_high: float | None
    reconstruction: float


def survival_summary(records: Sequence[SurvivalRecord]) -> tuple[float, int]:
    """Network average lifetime and the lifetime of the longest survivor."""
    if not records:
        raise ValueError("no records to summarize")
    lifetimes = np.array([r.lifetime for r in records], dtype=np.float64)
    return float(lifetimes.mean()), int(lifetimes.max())


def censored_count(records: Sequence[SurvivalRecord]) -> int:
    return sum(r.cause == CENSORED for r in records)


def degree_profile(records: Sequence[SurvivalRecord]) -> DegreeProfile:
    """Group records by original degree and average within each class."""
    if not records:
        raise ValueError("no records to profile")
    deg = np.array([r.degree for r in records], dtype=np.int64)
    lifetime = np.array([r.lifetime for r in records], dtype=np.float64)
    money_death = np.array([r.cause == DEATH_NO_MONEY for r in records], dtype=np.float64)
    saves = np.array([r.saves for r in records], dtype=np.float64)

    degrees, inverse = np.unique(deg, return_inverse=True)
    counts = np.bincount(inverse)
    return DegreeProfile(
        degrees=degrees,
        counts=counts,
        mean_lifetime=np.bincount(inverse, weights=lifetime) / counts,
        mu=np.bincount(inverse, weights=money_death) / counts,
        mean_saves=np.bincount(inverse, weights=saves) / counts,
    )


def merge_profiles(profiles: Iterable[DegreeProfile]) -> DegreeProfile:
    """Pool degree profiles, weighting every mean by its class count."""
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no profiles to merge")
    all_degrees = np.unique(np.concatenate([p.degrees for p in profiles]))
    counts = np.zeros(len(all_degrees), dtype=np.int64)
    lifetime_sum = np.zeros(len(all_degrees))
    mu_sum = np.zeros(len(all_degrees))
    saves_sum = np.zeros(len(all_degrees))
    for p in profiles:
        at = np.searchsorted(all_degrees, p.degrees)
        counts[at] += p.counts
        lifetime_sum[at] += p.counts * p.mean_lifetime
        mu_sum[at] += p.counts * p.mu
        saves_sum[at] += p.counts * p.mean_saves
    return DegreeProfile(
        degrees=all_degrees,
        counts=counts,
        mean_lifetime=lifetime_sum / counts,
        mu=mu_sum / counts,
        mean_saves=saves_sum / counts,
    )


def low_high_from_profile(profile: DegreeProfile, k_split: int) -> LowHighDecomposition:
    """Split a profile at k_split (low: k <= k_split - 1) and average each
    side; empty sides report no mean and contribute nothing to the
    reconstruction."""
    low = profile.degrees < k_split
    n = profile.total
    n_low = int(profile.counts[low].sum())
    n_high = n - n_low
    f_low = n_low / n
    f_high = 1.0 - f_low
    mean_low = (
        float(np.sum(profile.counts[low] * profile.mean_lifetime[low]) / n_low)
        if n_low
        else None
    )
    mean_high = (
        float(np.sum(profile.counts[~low] * profile.mean_lifetime[~low]) / n_high)
        if n_high
        else None
    )
    reconstruction = 0.0
    if mean_low is not None:
        reconstruction += f_low * mean_low
    if mean_high is not None:
        reconstruction += f_high * mean_high
    return LowHighDecomposition(f_low, f_high, mean_low, mean_high, reconstruction)


def low_high_decomposition(
    records: Sequence[SurvivalRecord],
    profile: DegreeProfile | None,
    k_split: int,
) -> LowHighDecomposition:
    """Average lifetime decomposed over low-degree (k < k_split) and
    high-degree vertices; the weighted recombination of the two sides
    reproduces the overall mean exactly. Pass a precomputed profile to
    skip regrouping the records."""
    if profile is None:
        profile = degree_profile(records)
    return low_high_from_profile(profile, k_split)


def mean_and_sem(values) -> tuple[float, float]:
    """Sample mean and its standard error (nan for fewer than 2 values)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values")
    if arr.size == 1:
        return float(arr[0]), float("nan")
    return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))
