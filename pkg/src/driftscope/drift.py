"""Covariate and label drift metrics between year slices.

Numeric features are compared with the population stability index (natural
log, over baseline-quantile bins) and the two-sample Kolmogorov-Smirnov
test; categorical features with base-2 Jensen-Shannon divergence and a
Pearson chi-square test. Binning is always derived from the baseline year
and reused for every comparison against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import chdtrc, kolmogorov

from .errors import DegenerateDataError, InputError, ShapeError
from .panel import Schema, YearSlice
from .validation import as_vector

DEFAULT_BINS = 10
DEFAULT_EPSILON = 1e-6
DEFAULT_PSI_THRESHOLD = 0.25
DEFAULT_CHI2_ALPHA = 0.05


@dataclass(frozen=True)
class BinSpec:
    """Bin edges with infinite sentinels at both ends."""

    edges: tuple  # length k+1, strictly increasing, edges[0]=-inf, edges[-1]=+inf
    epsilon: float = DEFAULT_EPSILON

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def histogram(self, values) -> np.ndarray:
        v = as_vector(values, "values")
        idx = np.searchsorted(np.asarray(self.edges[1:-1]), v, side="right")
        return np.bincount(idx, minlength=self.n_bins).astype(np.float64)


def quantile_bins(baseline_values, k: int = DEFAULT_BINS,
                  epsilon: float = DEFAULT_EPSILON) -> BinSpec:
    """Interior edges at the j/k empirical quantiles of the baseline sample."""
    v = as_vector(baseline_values, "baseline_values")
    if v.size < k:
        raise InputError(f"need at least k={k} baseline values, got {v.size}")
    if v.min() == v.max():
        # constant baseline: every quantile coincides, nothing to split
        return BinSpec(edges=(-np.inf, np.inf), epsilon=epsilon)
    qs = np.quantile(v, [j / k for j in range(1, k)], method="linear")
    interior = np.unique(qs)
    edges = (-np.inf, *interior.tolist(), np.inf)
    return BinSpec(edges=edges, epsilon=epsilon)


def _smoothed_proportions(counts: np.ndarray, epsilon: float) -> np.ndarray:
    total = counts.sum()
    if total <= 0:
        raise InputError("histogram totals must be positive")
    p = counts / total + epsilon
    return p / p.sum()


def psi(p_counts, q_counts, epsilon: float = DEFAULT_EPSILON) -> float:
    """Population stability index, natural log, epsilon-smoothed."""
    p = as_vector(p_counts, "p_counts")
    q = as_vector(q_counts, "q_counts")
    if p.size != q.size:
        raise ShapeError(f"histogram sizes differ: {p.size} vs {q.size}")
    ph = _smoothed_proportions(p, epsilon)
    qh = _smoothed_proportions(q, epsilon)
    return float(np.sum((ph - qh) * np.log(ph / qh)))


def ks_two_sample(xs, ys):
    """Two-sample KS statistic and asymptotic p-value.

    The p-value uses the Kolmogorov limiting distribution with effective
    sample size n_x*n_y/(n_x+n_y); it is approximate below ~35 points.
    """
    x = np.sort(as_vector(xs, "xs"))
    y = np.sort(as_vector(ys, "ys"))
    pooled = np.concatenate([x, y])
    fx = np.searchsorted(x, pooled, side="right") / x.size
    fy = np.searchsorted(y, pooled, side="right") / y.size
    d = float(np.max(np.abs(fx - fy)))
    n_eff = x.size * y.size / (x.size + y.size)
    p = float(np.clip(kolmogorov(np.sqrt(n_eff) * d), 0.0, 1.0))
    return d, p


def js_divergence(p, q, epsilon: float = DEFAULT_EPSILON) -> float:
    """Base-2 Jensen-Shannon divergence between two categorical distributions."""
    pv = as_vector(p, "p")
    qv = as_vector(q, "q")
    if pv.size != qv.size:
        raise ShapeError(f"category counts differ: {pv.size} vs {qv.size}")
    ph = _smoothed_proportions(pv, epsilon) if not np.isclose(pv.sum(), 1.0, atol=1e-9) \
        else pv / pv.sum()
    qh = _smoothed_proportions(qv, epsilon) if not np.isclose(qv.sum(), 1.0, atol=1e-9) \
        else qv / qv.sum()
    m = 0.5 * (ph + qh)

    def kl(a, b):
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))

    return 0.5 * kl(ph, m) + 0.5 * kl(qh, m)


def chi_square_independence(table):
    """Pearson chi-square test of independence on a contingency table.

    Returns (statistic, p_value, dof); no continuity correction.
    """
    obs = np.asarray(table, dtype=np.float64)
    if obs.ndim != 2:
        raise ShapeError("contingency table must be two-dimensional")
    row = obs.sum(axis=1)
    col = obs.sum(axis=0)
    if np.any(row <= 0) or np.any(col <= 0):
        raise DegenerateDataError("contingency table has a zero-marginal row/column")
    expected = np.outer(row, col) / obs.sum()
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    dof = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    p = float(np.clip(chdtrc(dof, chi2), 0.0, 1.0)) if dof > 0 else 1.0
    return chi2, p, dof


@dataclass
class DriftReport:
    baseline_year: int
    target_year: int
    numeric: dict  # feature -> {"psi", "ks_stat", "ks_p", "flag"}
    categorical: dict  # feature -> {"js", "chi2", "chi2_p", "flag"}
    label_rate_delta: float
    psi_threshold: float = DEFAULT_PSI_THRESHOLD
    chi2_alpha: float = DEFAULT_CHI2_ALPHA

    def flagged_features(self) -> list:
        out = [f for f, d in self.numeric.items() if d["flag"]]
        out += [f for f, d in self.categorical.items() if d["flag"]]
        return sorted(out)


def drift_report(baseline: YearSlice, target: YearSlice, schema: Schema,
                 bins: int = DEFAULT_BINS,
                 psi_threshold: float = DEFAULT_PSI_THRESHOLD,
                 chi2_alpha: float = DEFAULT_CHI2_ALPHA,
                 epsilon: float = DEFAULT_EPSILON,
                 include_sensitive: bool = True) -> DriftReport:
    """Per-feature drift metrics of `target` against `baseline`."""
    feats = schema.model_features(include_sensitive=include_sensitive)
    for f in feats:
        if f.name not in baseline.columns or f.name not in target.columns:
            raise ShapeError(f"slices do not share feature {f.name}")
    numeric, categorical = {}, {}
    for f in feats:
        b = baseline.columns[f.name]
        t = target.columns[f.name]
        if f.kind == "numeric":
            spec = quantile_bins(b, k=bins, epsilon=epsilon)
            val = psi(spec.histogram(b), spec.histogram(t), epsilon=epsilon)
            ks_stat, ks_p = ks_two_sample(b, t)
            numeric[f.name] = {
                "psi": val,
                "ks_stat": ks_stat,
                "ks_p": ks_p,
                "flag": bool(val > psi_threshold),
            }
        else:
            levels = list(f.levels)
            bc = np.asarray([np.sum(b == lv) for lv in levels], dtype=np.float64)
            tc = np.asarray([np.sum(t == lv) for lv in levels], dtype=np.float64)
            js = js_divergence(bc, tc, epsilon=epsilon)
            keep = (bc + tc) > 0
            chi2, chi2_p, _ = chi_square_independence(
                np.vstack([bc[keep], tc[keep]])
            )
            categorical[f.name] = {
                "js": js,
                "chi2": chi2,
                "chi2_p": chi2_p,
                "flag": bool(chi2_p < chi2_alpha),
            }
    delta = target.default_rate() - baseline.default_rate()
    return DriftReport(
        baseline_year=baseline.year,
        target_year=target.year,
        numeric=numeric,
        categorical=categorical,
        label_rate_delta=delta,
        psi_threshold=psi_threshold,
        chi2_alpha=chi2_alpha,
    )
