"""Empirical summaries, characteristic functions and Kolmogorov-Smirnov distances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class SampleSet:
    values: np.ndarray
    sorted: bool = False

    @classmethod
    def of(cls, values) -> "SampleSet":
        if isinstance(values, SampleSet):
            return values
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise ParameterError("empty sample")
        return cls(arr, False)

    def sorted_values(self) -> np.ndarray:
        return self.values if self.sorted else np.sort(self.values)

    def __len__(self) -> int:
        return int(self.values.size)


def _sample(x) -> SampleSet:
    return SampleSet.of(x)


def kolmogorov_c(alpha: float) -> float:
    """Asymptotic Kolmogorov critical factor ``sqrt(-ln(alpha/2) / 2)``."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError("alpha must lie in (0, 1)")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


@dataclass(frozen=True)
class KSReport:
    statistic: float
    n1: int
    n2: Optional[int] = None

    def threshold_at(self, alpha: float) -> float:
        if self.n2 is None:
            return kolmogorov_c(alpha) / math.sqrt(self.n1)
        return kolmogorov_c(alpha) * math.sqrt((self.n1 + self.n2) / (self.n1 * self.n2))

    def as_dict(self) -> dict:
        out = {"statistic": self.statistic, "n1": self.n1, "threshold_1e-3": self.threshold_at(1e-3)}
        if self.n2 is not None:
            out["n2"] = self.n2
        return out


def ks_two_sample(x, y) -> KSReport:
    """Exact sup-distance between the two empirical CDFs."""
    xs = _sample(x).sorted_values()
    ys = _sample(y).sorted_values()
    grid = np.concatenate((xs, ys))
    # both ECDFs evaluated right after every jump point
    fx = np.searchsorted(xs, grid, side="right") / xs.size
    fy = np.searchsorted(ys, grid, side="right") / ys.size
    d = float(np.max(np.abs(fx - fy)))
    return KSReport(d, int(xs.size), int(ys.size))


def ks_one_sample(x, cdf: Callable[[float], float]) -> KSReport:
    """``max_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|)`` over the sorted sample."""
    xs = _sample(x).sorted_values()
    n = xs.size
    f = np.array([cdf(v) for v in xs], dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f))))
    return KSReport(d, int(n))


def empirical_cf(x, thetas: Iterable[float]) -> list[tuple[complex, float, float]]:
    """``(mean e^{i theta x}, se_re, se_im)`` per theta; SEs use ddof=1."""
    xs = _sample(x).values
    n = xs.size
    out = []
    for th in thetas:
        ph = float(th) * xs
        re, im = np.cos(ph), np.sin(ph)
        if n > 1:
            se_re = float(np.std(re, ddof=1) / math.sqrt(n))
            se_im = float(np.std(im, ddof=1) / math.sqrt(n))
        else:
            se_re = se_im = 0.0
        out.append((complex(re.mean(), im.mean()), se_re, se_im))
    return out


@dataclass(frozen=True)
class Moments:
    """Mergeable count / mean / centred sum of squares."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, x) -> "Moments":
        xs = np.asarray(x, dtype=float).ravel()
        if xs.size == 0:
            return cls()
        mu = float(xs.mean())
        return cls(int(xs.size), mu, float(np.sum((xs - mu) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return Moments(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    variance: float
    median: float
    quantile_levels: tuple = (0.05, 0.25, 0.75, 0.95)
    quantile_values: tuple = field(default=())

    def quantile(self, q: float) -> float:
        return dict(zip(self.quantile_levels, self.quantile_values))[q]

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "median": self.median,
            "quantiles": {f"{q:g}": v for q, v in zip(self.quantile_levels, self.quantile_values)},
        }


def quantiles(x, qs: Sequence[float]) -> np.ndarray:
    return np.quantile(_sample(x).sorted_values(), qs)


def summarize(x, qs: Sequence[float] = (0.05, 0.25, 0.75, 0.95)) -> Summary:
    s = _sample(x)
    mom = Moments.of(s.values)
    xs = s.sorted_values()
    return Summary(mom.count, mom.mean, mom.variance, float(np.median(xs)),
                   tuple(float(q) for q in qs), tuple(float(v) for v in np.quantile(xs, qs)))
