"""Tree / branching families and the supercritical percolation parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import ParameterError


@dataclass(frozen=True)
class BAry:
    """b-ary recursive tree; the branching system has jumps of size b-1."""

    b: int

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise ParameterError(f"b must be an integer >= 2, got {self.b!r}")
        object.__setattr__(self, "b", int(self.b))

    @property
    def beta(self) -> float:
        return self.b / (self.b - 1)

    @property
    def jump(self) -> float:
        return float(self.b - 1)

    @property
    def label(self) -> str:
        return "bary"

    @property
    def shape_value(self) -> float:
        return float(self.b)


@dataclass(frozen=True)
class ScaleFree:
    """Preferential attachment tree with affine weight degree + a."""

    a: float

    def __post_init__(self):
        if not (self.a > -1.0) or not math.isfinite(self.a):
            raise ParameterError(f"a must be a finite real > -1, got {self.a!r}")
        object.__setattr__(self, "a", float(self.a))

    @property
    def alpha(self) -> float:
        return (1.0 + self.a) / (2.0 + self.a)

    @property
    def jump(self) -> float:
        return 2.0 + self.a

    @property
    def label(self) -> str:
        return "scalefree"

    @property
    def shape_value(self) -> float:
        return self.a


@dataclass(frozen=True)
class UniformRecursive:
    """Uniform random recursive tree on {0, ..., n}."""

    @property
    def label(self) -> str:
        return "urt"

    @property
    def shape_value(self) -> float:
        return float("nan")


Family = Union[BAry, ScaleFree]
TreeModel = Union[BAry, ScaleFree, UniformRecursive]


def p_of(c: float, n: float) -> float:
    """Supercritical retention probability ``1 - c / ln n``.

    ``n`` may be any real > 1 (handy for exact checks such as n = e**2).
    """
    if not (c > 0) or not math.isfinite(c):
        raise ParameterError(f"c must be a finite positive real, got {c!r}")
    if not (n > 1):
        raise ParameterError(f"n must exceed 1 for ln n > 0, got {n!r}")
    log_n = math.log(n)
    if c >= log_n:
        raise ParameterError(f"c={c} >= ln n={log_n:.6g}: p would leave (0, 1)")
    return 1.0 - c / log_n
