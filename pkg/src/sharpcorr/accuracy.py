"""Trueness, precision and MAE of measured scores against a reference R.

Signed measures are compared through ``|score|`` because the reference R
carries no direction (decreasing scenarios give negative correlations).
Unsigned measures are compared as they are.
"""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .measures import SIGNED, MeasureId
from .simulate import ScoreRecord, ScoreTable

__all__ = [
    "AccuracyCell",
    "AccuracyReport",
    "aligned",
    "trueness_bias",
    "precision_iqr",
    "mae",
    "build_report",
    "write_report",
]


def aligned(measure: MeasureId, score: float) -> float:
    return abs(score) if measure in SIGNED else score


def _nonempty(values: Sequence, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError(f"{what} needs at least one score")
    return arr


def trueness_bias(scores: Sequence[float], reference: float) -> float:
    """Reference minus the median score; positive means underestimation."""
    return float(reference - np.median(_nonempty(scores, "trueness_bias")))


def precision_iqr(scores: Sequence[float]) -> float:
    """Interquartile range with linearly interpolated quantiles."""
    q1, q3 = np.quantile(_nonempty(scores, "precision_iqr"), [0.25, 0.75], method="linear")
    return float(q3 - q1)


def mae(scores_with_refs: Iterable[tuple[float, float]]) -> float:
    pairs = _nonempty(list(scores_with_refs), "mae")
    return float(np.mean(np.abs(pairs[:, 0] - pairs[:, 1])))


@dataclass(frozen=True)
class AccuracyCell:
    measure: MeasureId
    r_level: float
    median_score: float
    bias: float
    iqr: float


@dataclass
class AccuracyReport:
    cells: list[AccuracyCell]
    mae_by_measure: dict[MeasureId, float]
    ranking: list[MeasureId]
    counts: dict[str, int] = field(default_factory=dict)

    def rank_of(self, measure: MeasureId | str) -> int:
        """1-based position in the ranking."""
        return self.ranking.index(MeasureId(measure)) + 1

    def summary(self) -> dict:
        return {
            "mae_by_measure": {m.value: v for m, v in self.mae_by_measure.items()},
            "ranking": [m.value for m in self.ranking],
            "counts": dict(self.counts),
        }


def build_report(
    table: ScoreTable | Iterable[ScoreRecord],
    reference: Callable[[ScoreRecord], float] | None = None,
    *,
    exclude_from_ranking: Iterable[MeasureId] = (),
) -> AccuracyReport:
    """Aggregate a score table into per-level cells and per-measure MAE.

    Parameters
    ----------
    table : ScoreTable or iterable of ScoreRecord
        Records with missing scores are skipped and counted.
    reference : callable, optional
        Maps a record to its conventional true value. Defaults to the
        record's ``target_r``.
    exclude_from_ranking : iterable of MeasureId
        Still reported in ``mae_by_measure``, left out of ``ranking``.

    Notes
    -----
    MAE averages ``|aligned score - reference|`` over every record of a
    measure. Cells first average the replicates of each
    (scenario, measure, level) and then take the median and IQR of those
    means across scenarios.
    """
    records = table.records if isinstance(table, ScoreTable) else list(table)
    if not records:
        raise ValueError("cannot build a report from an empty table")
    ref = reference or (lambda rec: rec.target_r)

    errors: dict[MeasureId, list[float]] = defaultdict(list)
    replicate_scores: dict[tuple, list[float]] = defaultdict(list)
    references: dict[tuple, float] = {}
    missing = 0
    for rec in records:
        if rec.score is None:
            missing += 1
            continue
        value = aligned(rec.measure, rec.score)
        target = ref(rec)
        errors[rec.measure].append(abs(value - target))
        key = (rec.measure, rec.target_r)
        replicate_scores[key + (rec.scenario,)].append(value)
        references[key] = target

    per_level: dict[tuple, list[float]] = defaultdict(list)
    for (mid, level, _scenario), values in replicate_scores.items():
        per_level[(mid, level)].append(float(np.mean(values)))

    order = {m: i for i, m in enumerate(MeasureId)}
    cells = [
        AccuracyCell(
            mid,
            level,
            float(np.median(means)),
            trueness_bias(means, references[(mid, level)]),
            precision_iqr(means),
        )
        for (mid, level), means in sorted(per_level.items(), key=lambda kv: (order[kv[0][0]], kv[0][1]))
    ]
    mae_by = {m: float(np.mean(errors[m])) for m in sorted(errors, key=order.__getitem__)}
    excluded = {MeasureId(m) for m in exclude_from_ranking}
    ranking = sorted((m for m in mae_by if m not in excluded), key=lambda m: (mae_by[m], order[m]))
    counts = {"records": len(records), "scored": len(records) - missing, "missing": missing}
    return AccuracyReport(cells, mae_by, ranking, counts)


def write_report(report: AccuracyReport, csv_path: str | Path, json_path: str | Path, **meta) -> None:
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["measure", "r_level", "median", "bias", "iqr"])
        for c in report.cells:
            w.writerow([c.measure.value, repr(c.r_level), repr(c.median_score), repr(c.bias), repr(c.iqr)])
    summary = report.summary()
    summary.update(meta)
    Path(json_path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
