"""Dependence measures behind a single registry.

The first four share the sample covariance as numerator and differ only in
the bound used to scale it:

=================  ==========================================
measure            denominator
=================  ==========================================
concordance        (var x + var y + (mean x - mean y)**2) / 2
additivity         (var x + var y) / 2
pearson            sqrt(var x * var y)
rearrangement      |cov(sorted x, sorted y)|, oriented by sign
=================  ==========================================

The other five (Spearman, Kendall tau-b, Chatterjee's xi, distance
correlation and HSIC) are the usual comparators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from enum import Enum
from typing import Callable, Iterable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .sampling import SampleError, _cov, _oriented, as_pair, ranks

__all__ = [
    "MeasureId",
    "MeasureScore",
    "MeasureError",
    "InsufficientSampleError",
    "pearson",
    "additivity",
    "concordance",
    "rearrangement_correlation",
    "spearman",
    "kendall",
    "chatterjee_xi",
    "distance_correlation",
    "hsic",
    "compute_all",
    "parse_measures",
    "SIGNED",
    "MEASURES",
]

Array = NDArray[np.float64]


class MeasureId(str, Enum):
    PEARSON = "pearson"
    ADDITIVITY = "additivity"
    CONCORDANCE = "concordance"
    REARRANGEMENT = "rearrangement"
    SPEARMAN = "spearman"
    KENDALL = "kendall"
    XI = "xi"
    DCOR = "dcor"
    HSIC = "hsic"

    def __str__(self) -> str:
        return self.value


class InsufficientSampleError(SampleError):
    pass


class MeasureError(Exception):
    """A measure failed inside :func:`compute_all`; ``measure`` names which."""

    def __init__(self, measure: MeasureId, cause: Exception) -> None:
        super().__init__(f"{measure.value}: {cause}")
        self.measure = measure
        self.cause = cause


@dataclass(frozen=True)
class MeasureScore:
    measure: MeasureId
    value: float
    signed: bool


def _moments(x: Array, y: Array) -> tuple[float, float, float]:
    return _cov(x, y), _cov(x, x), _cov(y, y)


def pearson(x: ArrayLike, y: ArrayLike) -> float:
    x, y = as_pair(x, y)
    s_xy, s_xx, s_yy = _moments(x, y)
    return _clip(s_xy / math.sqrt(s_xx * s_yy))


def additivity(x: ArrayLike, y: ArrayLike) -> float:
    """Covariance over the arithmetic mean of the two variances."""
    x, y = as_pair(x, y)
    s_xy, s_xx, s_yy = _moments(x, y)
    return _clip(s_xy / (0.5 * (s_xx + s_yy)))


def concordance(x: ArrayLike, y: ArrayLike) -> float:
    """Lin's concordance correlation: penalises both scale and location shifts."""
    x, y = as_pair(x, y)
    s_xy, s_xx, s_yy = _moments(x, y)
    gap = x.mean() - y.mean()
    return _clip(s_xy / (0.5 * (s_xx + s_yy + gap * gap)))


def rearrangement_correlation(x: ArrayLike, y: ArrayLike) -> float:
    """Pearson's covariance scaled by the rearranged-covariance bound.

    Returns ``cov(x, y) / |cov(x_sorted, y_sorted_oriented)|``. The value is
    exactly +1 or -1 whenever the pairs are monotone dependent (sorted in the
    same or the opposite order), is never smaller in magnitude than Pearson's
    r, and coincides with it when ``y = a * x + b``.

    Raises
    ------
    UndefinedCorrelationError
        If ``x`` or ``y`` is constant.
    """
    x, y = as_pair(x, y)
    # Covariance is invariant to reordering the pairs. Summing them sorted by
    # x (ties by y, in the direction of dependence) makes monotone data sum
    # the very same terms as the bound, so the ratio is exactly +-1.
    order = np.lexsort((y, x))
    s_xy = _cov(x[order], y[order])
    if s_xy < 0:
        order = np.lexsort((-y, x))
        s_xy = _cov(x[order], y[order])
    bound = abs(_oriented(x, y, s_xy))
    return _clip(s_xy / bound)


def spearman(x: ArrayLike, y: ArrayLike) -> float:
    x, y = as_pair(x, y)
    return pearson(ranks(x), ranks(y))


def _tie_pairs(counts: NDArray[np.int64]) -> int:
    return int((counts * (counts - 1) // 2).sum())


def _dense_ranks(v: Array) -> tuple[NDArray[np.integer], NDArray[np.int64]]:
    _, inv, counts = np.unique(v, return_inverse=True, return_counts=True)
    dtype = np.int16 if counts.size < 2**15 else np.int32
    return inv.astype(dtype), counts


def kendall(x: ArrayLike, y: ArrayLike, *, block: int = 1024) -> float:
    """Kendall's tau-b by direct pair counting.

    O(n^2) time, O(block * n) memory. Works on dense integer ranks, which
    leaves every pairwise sign unchanged.
    """
    x, y = as_pair(x, y)
    n = x.size
    rx, cx = _dense_ranks(x)
    ry, cy = _dense_ranks(y)
    # sum over ordered pairs counts each unordered pair twice
    s = 0
    for start in range(0, n, block):
        sx = np.sign(rx[start:start + block, None] - rx)
        sy = np.sign(ry[start:start + block, None] - ry)
        s += int(np.einsum("ij,ij->", sx, sy, dtype=np.int64))
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - _tie_pairs(cx)) * (n0 - _tie_pairs(cy)))
    return _clip(s / 2 / denom)


def chatterjee_xi(x: ArrayLike, y: ArrayLike, *, seed: int | None = 0) -> float:
    """Chatterjee's xi of ``y`` given ``x`` (not symmetric).

    Ties in ``x`` are broken by a generator seeded with ``seed``; ties in
    ``y`` use the max-rank convention with the tie-adjusted denominator.
    """
    x, y = as_pair(x, y)
    n = x.size
    if n < 3:
        raise InsufficientSampleError(f"insufficient sample: xi needs n >= 3, got {n}")
    keys = np.random.default_rng(seed).random(n)
    order = np.lexsort((keys, x))
    ys = y[order]
    sorted_y = np.sort(y)
    r = np.searchsorted(sorted_y, ys, side="right")
    l = n - np.searchsorted(sorted_y, ys, side="left")
    num = n * np.abs(np.diff(r)).sum()
    den = 2 * (l * (n - l)).sum()
    return float(1.0 - num / den)


def _distances(v: Array) -> Array:
    return np.abs(np.subtract.outer(v, v))


def _centered_inner(a: Array, b: Array) -> float:
    """``sum(H a H * b) / n**2`` without forming the centered matrix.

    Both matrices must be symmetric.
    """
    n = a.shape[0]
    ra = a.mean(axis=0)
    rb = b.mean(axis=0)
    return float(np.vdot(a, b) / (n * n) - 2.0 * np.dot(ra, rb) / n + ra.mean() * rb.mean())


def _dcor_from_distances(a: Array, b: Array) -> float:
    dcov2 = _centered_inner(a, b)
    dvar = math.sqrt(_centered_inner(a, a) * _centered_inner(b, b))
    return float(min(1.0, math.sqrt(max(dcov2, 0.0) / dvar)))


def distance_correlation(x: ArrayLike, y: ArrayLike) -> float:
    """Biased (V-statistic) distance correlation, in [0, 1]."""
    x, y = as_pair(x, y)
    return _dcor_from_distances(_distances(x), _distances(y))


@lru_cache(maxsize=4)
def _upper(n: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    return np.triu_indices(n, k=1)


def _median_width(d: Array) -> float:
    n = d.shape[0]
    if n <= 2048:
        u = d[_upper(n)]
        if u.min() == 0.0:
            u = u[u > 0]
    else:
        # every off-diagonal distance appears twice; the median is unchanged
        u = d[d > 0]
    return float(np.median(u))


def _gaussian_gram(d: Array) -> Array:
    w = _median_width(d)
    g = d * d
    g *= -0.5 / (w * w)
    return np.exp(g, out=g)


def _hsic_from_distances(a: Array, b: Array) -> float:
    return max(_centered_inner(_gaussian_gram(a), _gaussian_gram(b)), 0.0)


def hsic(x: ArrayLike, y: ArrayLike) -> float:
    """Biased HSIC ``trace(K H L H) / n**2`` with Gaussian kernels.

    Kernel widths follow the median heuristic (median of the nonzero
    pairwise distances). The value is not normalised.
    """
    x, y = as_pair(x, y)
    return _hsic_from_distances(_distances(x), _distances(y))


def _clip(v: float) -> float:
    # rounding can push an exact +-1 a few ulps outside the range
    return float(min(1.0, max(-1.0, v)))


MEASURES: dict[MeasureId, Callable[..., float]] = {
    MeasureId.PEARSON: pearson,
    MeasureId.ADDITIVITY: additivity,
    MeasureId.CONCORDANCE: concordance,
    MeasureId.REARRANGEMENT: rearrangement_correlation,
    MeasureId.SPEARMAN: spearman,
    MeasureId.KENDALL: kendall,
    MeasureId.XI: chatterjee_xi,
    MeasureId.DCOR: distance_correlation,
    MeasureId.HSIC: hsic,
}

SIGNED = frozenset(
    {
        MeasureId.PEARSON,
        MeasureId.ADDITIVITY,
        MeasureId.CONCORDANCE,
        MeasureId.REARRANGEMENT,
        MeasureId.SPEARMAN,
        MeasureId.KENDALL,
    }
)


def parse_measures(spec: str | Iterable[str]) -> list[MeasureId]:
    """Turn ``"all"`` or a comma list like ``"pearson,rearrangement"`` into ids.

    Order follows the request; duplicates are dropped.
    """
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    items = [str(i).strip().lower() for i in items if str(i).strip()]
    if items == ["all"]:
        return list(MeasureId)
    out: list[MeasureId] = []
    for item in items:
        try:
            mid = MeasureId(item)
        except ValueError:
            known = ", ".join(m.value for m in MeasureId)
            raise ValueError(f"unknown measure {item!r} (known: {known}, all)") from None
        if mid not in out:
            out.append(mid)
    return out


def compute_all(
    x: ArrayLike, y: ArrayLike, ids: Iterable[MeasureId | str], *, seed: int = 0
) -> list[MeasureScore]:
    """Score every requested measure, in request order.

    ``seed`` only affects xi's tie-breaking. A failing measure raises
    :class:`MeasureError` carrying the measure id. When both dcor and hsic
    are requested the pairwise distance matrices are built once.
    """
    ids = [MeasureId(i) for i in ids]
    if not ids:
        return []
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dist: tuple[Array, Array] | None = None
    out = []
    for mid in ids:
        try:
            if mid in (MeasureId.DCOR, MeasureId.HSIC):
                if dist is None:
                    px, py = as_pair(x, y)
                    dist = _distances(px), _distances(py)
                shared = _dcor_from_distances if mid is MeasureId.DCOR else _hsic_from_distances
                value = shared(*dist)
            elif mid is MeasureId.XI:
                value = chatterjee_xi(x, y, seed=seed)
            else:
                value = MEASURES[mid](x, y)
        except (SampleError, ArithmeticError, ValueError) as exc:
            raise MeasureError(mid, exc) from exc
        out.append(MeasureScore(mid, value, mid in SIGNED))
    return out
