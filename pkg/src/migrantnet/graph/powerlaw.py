"""Discrete power-law fit with the Clauset-Shalizi-Newman ``xmin`` scan."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from ..errors import DegenerateFitError

MIN_TAIL = 50
_ALPHA_BOUNDS = (1.0 + 1e-6, 20.0)


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    xmin: int
    ks_distance: float
    n_tail: int
    n_total: int
    warning: Optional[str] = None

    def as_dict(self):
        return asdict(self)


def approx_alpha(tail, xmin) -> float:
    """Closed-form approximation ``1 + n / sum(ln(x / (xmin - 1/2)))`` to the discrete MLE."""
    s = np.log(np.asarray(tail, dtype=np.float64) / (xmin - 0.5)).sum()
    return 1.0 + len(tail) / s if s > 0 else math.inf


def discrete_mle(tail, xmin) -> float:
    """Maximizer of ``-alpha * sum(ln x) - n * ln zeta(alpha, xmin)``."""
    tail = np.asarray(tail, dtype=np.float64)
    n = len(tail)
    sum_log = np.log(tail).sum()

    def nll(alpha):
        return alpha * sum_log + n * math.log(zeta(alpha, xmin))

    res = minimize_scalar(nll, bounds=_ALPHA_BOUNDS, method="bounded",
                          options={"xatol": 1e-10, "maxiter": 500})
    return float(res.x)


def ks_distance(tail, alpha, xmin) -> float:
    """Largest gap between the empirical and fitted CDFs over the tail's support."""
    tail = np.sort(np.asarray(tail))
    values, counts = np.unique(tail, return_counts=True)
    emp = np.cumsum(counts) / len(tail)
    model = 1.0 - zeta(alpha, values + 1.0) / zeta(alpha, xmin)
    return float(np.max(np.abs(emp - model)))


def _fit_at(x, xmin):
    tail = x[x >= xmin]
    alpha = discrete_mle(tail, xmin)
    return alpha, ks_distance(tail, alpha, xmin), len(tail)


def fit_power_law(degrees, xmin: Optional[int] = None, min_tail: int = MIN_TAIL) -> PowerLawFit:
    """Fit ``P(x) ~ x^-alpha`` for ``x >= xmin`` to positive integer data.

    Without an explicit ``xmin`` every observed value whose tail holds at
    least ``min_tail`` samples and two distinct values is tried, and the one
    minimizing the KS distance wins. If no candidate reaches ``min_tail``
    all candidates are scanned and the result carries a warning.
    """
    x = np.asarray(degrees)
    # sorted so floating-point sums do not depend on input order
    x = np.sort(x[x >= 1].astype(np.int64))
    n_total = len(x)
    values = np.unique(x)
    if len(values) < 2:
        raise DegenerateFitError("power-law fit rejected: fewer than two distinct positive values")
    if xmin is not None:
        if (x >= xmin).sum() == 0 or len(np.unique(x[x >= xmin])) < 2:
            raise DegenerateFitError(f"power-law fit rejected: degenerate tail at xmin={xmin}")
        alpha, d, n_tail = _fit_at(x, xmin)
        best = (d, xmin, alpha, n_tail)
    else:
        # tail size at each candidate (values[:-1] keeps >= 2 distinct values in the tail)
        tail_sizes = n_total - np.searchsorted(x, values[:-1], side="left")
        cands = values[:-1][tail_sizes >= min_tail]
        if len(cands) == 0:
            cands = values[:-1]
        best = None
        for xm in cands:
            alpha, d, n_tail = _fit_at(x, int(xm))
            if best is None or d < best[0]:
                best = (d, int(xm), alpha, n_tail)
    d, xm, alpha, n_tail = best
    warnings = []
    if n_tail < min_tail:
        warnings.append(f"only {n_tail} samples in the tail (< {min_tail}); estimate is unreliable")
    if alpha > _ALPHA_BOUNDS[1] - 1e-3:
        warnings.append(f"alpha reached the search bound {_ALPHA_BOUNDS[1]}; tail decays faster "
                        "than any power law in range")
    warning = "; ".join(warnings) or None
    return PowerLawFit(alpha=alpha, xmin=xm, ks_distance=d, n_tail=n_tail,
                       n_total=n_total, warning=warning)
