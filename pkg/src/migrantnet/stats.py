"""Two-sample Kolmogorov-Smirnov test, group summaries and histograms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import ValidationError

KS_METHOD = "asymptotic Kolmogorov distribution with Stephens small-sample correction"


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float
    n1: int
    n2: int

    def as_dict(self):
        return asdict(self)


def kolmogorov_q(lam: float, eps: float = 1e-12) -> float:
    """``Q(lam) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2)``, clipped to [0, 1]."""
    if lam < 1e-3:
        return 1.0
    total = 0.0
    k = 1
    while True:
        term = 2.0 * (-1) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < eps or k > 10_000:
            break
        k += 1
    return min(1.0, max(0.0, total))


def ks_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    grid = np.unique(np.concatenate([a, b]))
    # right-continuous ECDFs at every distinct pooled value handle ties on both sides
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_pvalue(d: float, n1: int, n2: int) -> float:
    ne = n1 * n2 / (n1 + n2)
    sq = math.sqrt(ne)
    return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)


def ks_two_sample(a, b) -> KsResult:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if len(a) == 0 or len(b) == 0:
        raise ValidationError("KS test needs two non-empty samples")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValidationError("KS test samples must be finite")
    d = ks_statistic(a, b)
    return KsResult(d, ks_pvalue(d, len(a), len(b)), len(a), len(b))


def summary(values) -> dict:
    values = np.asarray(list(values), dtype=np.float64)
    if len(values) == 0:
        return {"count": 0, "mean": None, "min": None, "max": None}
    return {"count": int(len(values)), "mean": float(values.mean()),
            "min": float(values.min()), "max": float(values.max())}


def group_summary(values_by_group: Mapping[str, Iterable[float]]) -> dict:
    return {g: summary(v) for g, v in values_by_group.items()}


def histogram(values, bins: int = 20, log_x: bool = False, value_range=None):
    """Equal-width bins over the data range, in linear or log10 space.

    Returns ``(edges, counts)``; counts always sum to ``len(values)``.
    """
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    values = np.asarray(list(values), dtype=np.float64)
    if log_x:
        bad = values[values <= 0]
        if len(bad):
            shown = ", ".join(repr(float(v)) for v in bad[:10])
            raise ValidationError(
                f"log-scale histogram needs positive values; {len(bad)} offending value(s): {shown}")
    if len(values) == 0:
        return np.array([]), np.array([], dtype=np.int64)
    domain = np.log10(values) if log_x else values
    if value_range is not None:
        lo, hi = (np.log10(value_range) if log_x else value_range)
    else:
        lo, hi = float(domain.min()), float(domain.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(domain, bins=edges)
    return (10.0 ** edges if log_x else edges), counts


def compare_groups(values_by_group: Mapping[str, Iterable[float]], first="Migrant",
                   second="Native") -> dict:
    """Summaries of both groups plus the KS result between them (``None`` if a group is empty)."""
    a = np.asarray(list(values_by_group.get(first, ())), dtype=np.float64)
    b = np.asarray(list(values_by_group.get(second, ())), dtype=np.float64)
    ks: Optional[KsResult] = ks_two_sample(a, b) if len(a) and len(b) else None
    return {
        "groups": {first: summary(a), second: summary(b)},
        "D": None if ks is None else ks.d_statistic,
        "p": None if ks is None else ks.p_value,
        "n1": len(a), "n2": len(b),
    }
