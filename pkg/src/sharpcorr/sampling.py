"""Samples, rearrangements, moments and ranks.

Everything here is a pure function of its inputs. Covariances and variances
use the ``n - 1`` divisor and two-pass centered sums.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "SampleError",
    "UndefinedCorrelationError",
    "Sample",
    "PairedSample",
    "as_sample",
    "as_pair",
    "is_constant",
    "increasing_rearrangement",
    "decreasing_rearrangement",
    "sample_covariance",
    "sample_variance",
    "oriented_rearranged_covariance",
    "ranks",
]

TiePolicy = Literal["average", "random"]


class SampleError(ValueError):
    """Input violates a sample contract (length, finiteness, alignment)."""


class UndefinedCorrelationError(SampleError):
    """A dependence measure was asked for on a constant sample."""


def as_sample(values: ArrayLike, *, name: str = "sample") -> NDArray[np.float64]:
    """Validate ``values`` as a sample and return it as a 1-D float array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise SampleError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise SampleError(f"{name} needs at least 2 observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise SampleError(f"{name} contains NaN or infinite values")
    return arr


def is_constant(values: NDArray[np.float64]) -> bool:
    # exact comparison on purpose: no epsilon
    return bool(np.all(values == values[0]))


def as_pair(
    x: ArrayLike, y: ArrayLike, *, nonconstant: bool = True
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    x = as_sample(x, name="x")
    y = as_sample(y, name="y")
    if x.shape != y.shape:
        raise SampleError(f"x and y differ in length: {x.size} vs {y.size}")
    if nonconstant:
        if is_constant(x):
            raise UndefinedCorrelationError("undefined correlation: x is constant")
        if is_constant(y):
            raise UndefinedCorrelationError("undefined correlation: y is constant")
    return x, y


@dataclass(frozen=True)
class Sample:
    """One variable's observations (finite, at least two)."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = as_sample(self.values)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def nonconstant(self) -> bool:
        return not is_constant(self.values)


@dataclass(frozen=True)
class PairedSample:
    """Aligned ``(x, y)`` observations, neither side constant."""

    x: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self) -> None:
        x, y = as_pair(self.x, self.y)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.size


def increasing_rearrangement(s: ArrayLike) -> NDArray[np.float64]:
    return np.sort(as_sample(s), kind="stable")


def decreasing_rearrangement(s: ArrayLike) -> NDArray[np.float64]:
    return increasing_rearrangement(s)[::-1].copy()


def _cov(x: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    # two-pass: center first, then accumulate
    dx = x - x.mean()
    dy = y - y.mean()
    return float(np.dot(dx, dy) / (x.size - 1))


def sample_covariance(x: ArrayLike, y: ArrayLike) -> float:
    """Unbiased sample covariance ``sum((x - mean x)(y - mean y)) / (n - 1)``."""
    x, y = as_pair(x, y, nonconstant=False)
    return _cov(x, y)


def sample_variance(s: ArrayLike) -> float:
    s = as_sample(s)
    d = s - s.mean()
    return float(np.dot(d, d) / (s.size - 1))


def _oriented(x: NDArray[np.float64], y: NDArray[np.float64], s_xy: float) -> float:
    xs = np.sort(x)
    ys = np.sort(y)
    if s_xy < 0:
        ys = ys[::-1]
    return _cov(xs, ys)


def oriented_rearranged_covariance(x: ArrayLike, y: ArrayLike) -> float:
    """Covariance of the rearranged samples, oriented by the sign of ``cov(x, y)``.

    Both samples are sorted ascending when ``cov(x, y) >= 0``; otherwise ``y``
    is sorted descending. By the rearrangement inequality the result bounds
    ``|cov(x, y)|`` from above and is itself bounded by ``sqrt(var x var y)``.

    Raises
    ------
    UndefinedCorrelationError
        If either sample is constant.
    """
    x, y = as_pair(x, y, nonconstant=False)
    if is_constant(x) or is_constant(y):
        raise UndefinedCorrelationError("undefined orientation bound: constant sample")
    return _oriented(x, y, _cov(x, y))


def ranks(
    s: ArrayLike, policy: TiePolicy = "average", *, seed: int | None = 0
) -> NDArray[np.float64]:
    """Ranks starting at 1.

    Parameters
    ----------
    s : array_like
        The sample.
    policy : {"average", "random"}
        ``average`` gives tied values the mean of the ranks they span.
        ``random`` breaks ties with a generator seeded by ``seed``.
    """
    s = as_sample(s)
    n = s.size
    if policy == "random":
        keys = np.random.default_rng(seed).random(n)
        order = np.lexsort((keys, s))
        out = np.empty(n, dtype=np.float64)
        out[order] = np.arange(1, n + 1, dtype=np.float64)
        return out
    if policy != "average":
        raise ValueError(f"unknown tie policy {policy!r}")
    order = np.argsort(s, kind="stable")
    sorted_s = s[order]
    # boundaries of tie runs in the sorted sample
    starts = np.flatnonzero(np.r_[True, sorted_s[1:] != sorted_s[:-1]])
    ends = np.r_[starts[1:], n]
    avg = (starts + ends + 1) / 2.0
    out = np.empty(n, dtype=np.float64)
    out[order] = np.repeat(avg, ends - starts)
    return out
