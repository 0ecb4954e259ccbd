"""Seeded simulation of ``y = f(x) + noise`` at a target dependence strength.

Every grid cell ``(scenario, level, replicate)`` gets its own generator,
derived from the master seed and the cell's indices, so cells can run in any
order or in parallel and still produce the same table.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .measures import MeasureError, MeasureId, compute_all
from .sampling import PairedSample, SampleError
from .scenarios import Scenario

__all__ = [
    "RNG_IDENTITY",
    "SimConfig",
    "ScoreRecord",
    "ScoreTable",
    "SimulationError",
    "cell_rng",
    "noise_sigma",
    "simulate_pair",
    "run_grid",
    "parse_r_grid",
    "default_r_levels",
    "write_score_csv",
    "read_score_csv",
]

RNG_IDENTITY = {
    "bit_generator": "numpy.random.Philox (Philox4x64-10, counter based)",
    "seeding": "numpy.random.SeedSequence(entropy=seed, spawn_key=(scenario, level, replicate))",
    "draw_order": "x = lo + (hi - lo) * random(n); z = standard_normal(n)",
    "numpy": np.__version__,
}

CSV_HEADER = ("scenario", "measure", "target_r", "replicate", "score")


class SimulationError(ValueError):
    pass


def parse_r_grid(spec: str) -> tuple[float, ...]:
    """``"lo:hi:step"`` to a tuple of levels, both ends included.

    >>> parse_r_grid("0:1:0.25")
    (0.0, 0.25, 0.5, 0.75, 1.0)
    """
    try:
        lo, hi, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise SimulationError(f"invalid R grid {spec!r}; expected lo:hi:step") from None
    if not (0.0 <= lo <= hi <= 1.0) or step <= 0:
        raise SimulationError(f"invalid R grid {spec!r}; need 0 <= lo <= hi <= 1 and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 10) for k in range(count))


def default_r_levels() -> tuple[float, ...]:
    return parse_r_grid("0:1:0.05")


@dataclass(frozen=True)
class SimConfig:
    n: int = 512
    reps: int = 10
    r_levels: tuple[float, ...] = field(default_factory=default_r_levels)
    seed: int = 42
    measures: tuple[MeasureId, ...] = tuple(MeasureId)

    def __post_init__(self) -> None:
        if self.n < 3:
            raise SimulationError(f"n must be at least 3, got {self.n}")
        if self.reps < 1:
            raise SimulationError(f"reps must be at least 1, got {self.reps}")
        if not self.r_levels or any(not 0.0 <= r <= 1.0 for r in self.r_levels):
            raise SimulationError("every R level must lie in [0, 1]")
        if self.seed < 0:
            raise SimulationError("seed must be non-negative")
        object.__setattr__(self, "r_levels", tuple(float(r) for r in self.r_levels))
        object.__setattr__(self, "measures", tuple(MeasureId(m) for m in self.measures))

    def to_json(self) -> dict:
        d = asdict(self)
        d["r_levels"] = list(self.r_levels)
        d["measures"] = [m.value for m in self.measures]
        return d


@dataclass(frozen=True)
class ScoreRecord:
    scenario: str
    measure: MeasureId
    target_r: float
    replicate: int
    score: float | None
    error: str | None = None


@dataclass
class ScoreTable:
    records: list[ScoreRecord]
    config: SimConfig | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def failures(self) -> list[ScoreRecord]:
        return [r for r in self.records if r.score is None]

    def sidecar(self, **extra) -> dict:
        meta = {
            "tool": "sharpcorr",
            "version": __version__,
            "rng": RNG_IDENTITY,
            "config": self.config.to_json() if self.config else None,
            "records": len(self.records),
            "failures": [
                {
                    "scenario": r.scenario,
                    "measure": r.measure.value,
                    "target_r": r.target_r,
                    "replicate": r.replicate,
                    "reason": r.error,
                }
                for r in self.failures
            ],
        }
        meta.update(extra)
        return meta


def noise_sigma(target_r: float, var_y: float) -> float:
    """Noise standard deviation ``sqrt((1 - R**2) * var_y)``.

    ``var_y`` is the variance of the response including the noise.
    """
    if not 0.0 <= target_r <= 1.0:
        raise SimulationError(f"target R must lie in [0, 1], got {target_r}")
    if not var_y > 0:
        raise SimulationError(f"response variance must be positive, got {var_y}")
    return math.sqrt((1.0 - target_r * target_r) * var_y)


def cell_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def simulate_pair(
    scenario: Scenario,
    n: int,
    target_r: float,
    seed: int | np.random.Generator,
) -> PairedSample:
    """Draw ``n`` pairs from ``y = f(x) + e`` with ``x`` uniform on the domain.

    The noise level makes ``target_r`` the square root of the coefficient of
    determination: with ``v`` the sample variance of ``f(x)``, the response
    variance is ``v / R**2`` and the noise takes up the remainder. At R = 1
    there is no noise; at R = 0 the response is pure noise with standard
    deviation ``sqrt(v)``.
    """
    if n < 3:
        raise SimulationError(f"n must be at least 3, got {n}")
    if not 0.0 <= target_r <= 1.0:
        raise SimulationError(f"target R must lie in [0, 1], got {target_r}")
    rng = seed if isinstance(seed, np.random.Generator) else cell_rng(seed)
    x = scenario.lo + (scenario.hi - scenario.lo) * rng.random(n)
    z = rng.standard_normal(n)
    signal = scenario.f(x)
    if not np.all(np.isfinite(signal)):
        raise SimulationError(f"{scenario.name}: f produced non-finite values")
    var_f = float(np.var(signal, ddof=1))
    if var_f == 0.0:
        raise SimulationError(f"{scenario.name}: degenerate signal, f(x) is constant")
    if target_r == 1.0:
        y = signal
    elif target_r == 0.0:
        y = math.sqrt(var_f) * z
    else:
        sigma = noise_sigma(target_r, var_f / (target_r * target_r))
        y = signal + sigma * z
    return PairedSample(x, y)


def _score_cell(
    cfg: SimConfig, scenario: Scenario, si: int, ri: int, rep: int
) -> list[ScoreRecord]:
    r = cfg.r_levels[ri]
    ids = list(cfg.measures)

    def record(mid: MeasureId, value: float | None, error: str | None = None) -> ScoreRecord:
        return ScoreRecord(scenario.name, mid, r, rep, value, error)

    try:
        pair = simulate_pair(scenario, cfg.n, r, cell_rng(cfg.seed, si, ri, rep))
    except (SimulationError, SampleError) as exc:
        return [record(mid, None, str(exc)) for mid in ids]
    try:
        return [record(s.measure, s.value) for s in compute_all(pair.x, pair.y, ids)]
    except MeasureError:
        pass
    out = []
    for mid in ids:
        try:
            out.append(record(mid, compute_all(pair.x, pair.y, [mid])[0].value))
        except MeasureError as exc:
            out.append(record(mid, None, str(exc.cause)))
    return out


def run_grid(
    cfg: SimConfig, scenarios: Sequence[Scenario], *, threads: int = 1
) -> ScoreTable:
    """Score every measure on every (scenario, R level, replicate) cell.

    Records come back in grid order whatever ``threads`` is. A failing
    measure becomes a record with ``score=None`` and the reason attached.
    """
    cells = [
        (si, ri, rep)
        for si in range(len(scenarios))
        for ri in range(len(cfg.r_levels))
        for rep in range(cfg.reps)
    ]

    def work(cell: tuple[int, int, int]) -> list[ScoreRecord]:
        si, ri, rep = cell
        return _score_cell(cfg, scenarios[si], si, ri, rep)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, cells, chunksize=16))
    else:
        chunks = [work(c) for c in cells]
    return ScoreTable([rec for chunk in chunks for rec in chunk], cfg)


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def write_score_csv(table: ScoreTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in table.records:
            w.writerow([r.scenario, r.measure.value, _fmt(r.target_r), r.replicate, _fmt(r.score)])


def read_score_csv(path: str | Path) -> ScoreTable:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise SimulationError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for row in reader:
            scenario, measure, target_r, rep, score = row
            records.append(
                ScoreRecord(
                    scenario,
                    MeasureId(measure),
                    float(target_r),
                    int(rep),
                    float(score) if score else None,
                )
            )
    return ScoreTable(records)


def write_sidecar(meta: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")

