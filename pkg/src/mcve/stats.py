"""Sample summaries and two-sample equivalence checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "StatsError",
    "SummaryReport",
    "EquivalenceReport",
    "summarize",
    "shortest_coverage_interval",
    "coverage_count",
    "ks_critical_value",
    "ks_two_sample",
    "moment_equivalence",
    "compare_samples",
]

STD_RATIO_BAND = (0.98, 1.02)


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class SummaryReport:
    n: int
    mean: float
    std: float
    ci_low: float
    ci_high: float
    coverage_p: float
    histogram: list[tuple[float, float, int]] = field(repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = [list(b) for b in self.histogram]
        return d


@dataclass(frozen=True)
class EquivalenceReport:
    ks_stat: float
    ks_critical: float
    ks_pass: bool
    mean_diff_sigmas: float
    std_ratio: float
    pass_: bool

    def to_dict(self) -> dict:
        return {
            "ks_stat": self.ks_stat,
            "ks_critical": self.ks_critical,
            "ks_pass": self.ks_pass,
            "mean_diff_sigmas": self.mean_diff_sigmas,
            "std_ratio": self.std_ratio,
            "pass": self.pass_,
        }


def coverage_count(n: int, p: float) -> int:
    """Number of samples a coverage interval must contain: ``ceil(p * n)``.

    ``p * n`` is rounded to 9 decimals first so that e.g. ``0.95 * 100``
    gives 95 rather than 96 when the float product lands just above.
    """
    return max(1, min(n, math.ceil(round(p * n, 9))))


def shortest_coverage_interval(sorted_values, p: float) -> tuple[float, float]:
    """Shortest window of ``ceil(p * n)`` consecutive sorted values.

    Ties go to the leftmost window.
    """
    v = np.asarray(sorted_values, dtype=np.float64)
    n = v.size
    if n < 2:
        raise StatsError("need at least 2 values")
    if not 0 < p < 1:
        raise StatsError(f"coverage probability must be in (0, 1), got {p!r}")
    k = coverage_count(n, p)
    widths = v[k - 1 :] - v[: n - k + 1]
    i = int(np.argmin(widths))
    return float(v[i]), float(v[i + k - 1])


def summarize(samples, coverage_p: float = 0.95, bins: int = 200) -> SummaryReport:
    """Mean, standard deviation (divisor n - 1), shortest coverage interval
    and an equal-width histogram over ``[min, max]``.

    ``samples`` is a :class:`~mcve.engines.SampleSet` or any 1-d array.
    """
    values = np.asarray(getattr(samples, "values", samples), dtype=np.float64).ravel()
    n = values.size
    if n < 2:
        raise StatsError(f"need at least 2 samples, got {n}")
    if not np.all(np.isfinite(values)):
        raise StatsError("samples contain non-finite values")
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1))
    lo, hi = shortest_coverage_interval(np.sort(values), coverage_p)
    counts, edges = np.histogram(values, bins=bins, range=(float(values.min()), float(values.max())))
    histogram = [(float(edges[j]), float(edges[j + 1]), int(c)) for j, c in enumerate(counts)]
    return SummaryReport(n, mean, std, lo, hi, float(coverage_p), histogram)


def ks_critical_value(alpha: float, n_a: int, n_b: int) -> float:
    """Asymptotic two-sided critical value, ``c(alpha) * sqrt((n_a + n_b) / (n_a n_b))``."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n_a + n_b) / (n_a * n_b))


def ks_two_sample(a, b, alpha: float = 0.001) -> tuple[float, float, bool]:
    """Two-sample Kolmogorov-Smirnov statistic, critical value and verdict."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise StatsError("KS test needs two nonempty samples")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    stat = float(np.max(np.abs(cdf_a - cdf_b)))
    crit = ks_critical_value(alpha, a.size, b.size)
    return stat, crit, stat <= crit


def moment_equivalence(a, b, nsigma: float = 5.0) -> dict:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size < 2 or b.size < 2:
        raise StatsError("moment comparison needs at least 2 values per sample")
    sa, sb = np.std(a, ddof=1), np.std(b, ddof=1)
    se = math.sqrt(sa**2 / a.size + sb**2 / b.size)
    diff = float(np.mean(a) - np.mean(b))
    mean_diff_sigmas = 0.0 if diff == 0 else (diff / se if se > 0 else math.copysign(math.inf, diff))
    if sb > 0:
        std_ratio = float(sa / sb)
    else:
        std_ratio = 1.0 if sa == 0 else math.inf
    return {
        "mean_diff_sigmas": mean_diff_sigmas,
        "std_ratio": std_ratio,
        "pass": abs(mean_diff_sigmas) <= nsigma and STD_RATIO_BAND[0] <= std_ratio <= STD_RATIO_BAND[1],
    }


def compare_samples(a, b, alpha: float = 0.001, nsigma: float = 5.0) -> EquivalenceReport:
    stat, crit, ks_pass = ks_two_sample(a, b, alpha)
    mom = moment_equivalence(a, b, nsigma)
    return EquivalenceReport(
        ks_stat=stat,
        ks_critical=crit,
        ks_pass=bool(ks_pass),
        mean_diff_sigmas=mom["mean_diff_sigmas"],
        std_ratio=mom["std_ratio"],
        pass_=bool(ks_pass and mom["pass"]),
    )
