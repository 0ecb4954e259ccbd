"""NIST StRD nonlinear regression datasets with monotone relationships.

Five datasets are vendored: Chwirut1, Hahn1, Rat43, Roszman1 and Thurber.
Their conventional true value is ``R = sqrt(1 - SS_res / SS_tot)`` with the
residuals taken from NIST's certified parameter values; nothing is refitted.
"""
from __future__ import annotations

import csv
import hashlib
import math
import re
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .accuracy import AccuracyReport, aligned, build_report
from .measures import MeasureError, MeasureId, compute_all
from .sampling import PairedSample
from .simulate import ScoreRecord

__all__ = [
    "DATASETS",
    "NistDataset",
    "NistParseError",
    "ReferenceValue",
    "parse_dataset",
    "load_dataset",
    "load_datasets",
    "certified_model_eval",
    "reference_R",
    "score_datasets",
    "nist_benchmark",
    "write_dataset_scores",
    "fetch_dataset",
    "normalize_text",
]

DATASETS = ("Chwirut1", "Hahn1", "Rat43", "Roszman1", "Thurber")

NIST_URL = "https://www.itl.nist.gov/div898/strd/nls/data/LINKS/DATA/{name}.dat"

# sha256 of the text after normalize_text()
CHECKSUMS = {
    "Chwirut1": "a934a583464358c8cb3f67d27a016c15ab90dadfbf5303079b33dd284134b55b",
    "Hahn1": "251ab6520101c6a14d50a3f3b9472b4ab9f720852efbd735c7a3aee12a9c65f5",
    "Rat43": "5bcbb16649254975701acb2e07a5658a2248ce90cc22bc6f52e35e2a4cc0ee9e",
    "Roszman1": "b62c19e840e9686ed11732bd45398e07efc240cb542ac11f1b7b77368f5a89e0",
    "Thurber": "b66224bd6ec25754af5ec16f00b25ce18ccc8c09b40ebe0acf8515d01abec0a4",
}


def _rational_cubic(x: np.ndarray, b: Sequence[float]) -> np.ndarray:
    num = ((b[3] * x + b[2]) * x + b[1]) * x + b[0]
    den = ((b[6] * x + b[5]) * x + b[4]) * x + 1.0
    return num / den


MODELS: dict[str, tuple[int, Callable[[np.ndarray, Sequence[float]], np.ndarray]]] = {
    "Chwirut1": (3, lambda x, b: np.exp(-b[0] * x) / (b[1] + b[2] * x)),
    "Hahn1": (7, _rational_cubic),
    "Rat43": (4, lambda x, b: b[0] / (1.0 + np.exp(b[1] - b[2] * x)) ** (1.0 / b[3])),
    "Roszman1": (4, lambda x, b: b[0] - b[1] * x - np.arctan(b[2] / (x - b[3])) / math.pi),
    "Thurber": (7, _rational_cubic),
}


class NistParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<text>") -> None:
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.line = line
        self.source = source


@dataclass(frozen=True)
class NistDataset:
    name: str
    x: np.ndarray
    y: np.ndarray
    certified_params: tuple[float, ...]
    certified_rss: float | None = None

    @property
    def model_id(self) -> str:
        return self.name

    @property
    def points(self) -> PairedSample:
        return PairedSample(self.x, self.y)

    def __len__(self) -> int:
        return self.x.size

    def rows(self) -> list[str]:
        """Data rows as ``"y x"`` text with every digit kept."""
        return [f"{yi!r} {xi!r}" for yi, xi in zip(self.y.tolist(), self.x.tolist())]


@dataclass(frozen=True)
class ReferenceValue:
    dataset: str
    R: float
    provenance: str = "certified_fit"


_NAME = re.compile(r"^Dataset Name:\s+(\S+)")
_NPARAM = re.compile(r"^\s*(\d+)\s+Parameters?\b")
_NOBS = re.compile(r"^Number of Observations:\s+(\d+)")
_RSS = re.compile(r"^Residual Sum of Squares:\s+(\S+)")
_PARAM = re.compile(r"^\s*b(\d+)\s*=\s*(.+)$")
_DATA = re.compile(r"^Data:\s+y\s+x\s*$")


def _float(token: str, line: int, source: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise NistParseError(f"not a number: {token!r}", line, source) from None
    if not math.isfinite(value):
        raise NistParseError(f"non-finite value {token!r}", line, source)
    return value


def parse_dataset(text: str, source: str = "<text>") -> NistDataset:
    """Parse a NIST StRD nonlinear regression ``.dat`` file.

    The certified parameters are the second-to-last column of the ``bN = ...``
    rows; the data block follows the ``Data:  y  x`` line.
    """
    lines = text.splitlines()
    name = n_params = n_obs = rss = None
    params: dict[int, float] = {}
    data_at = None
    for i, line in enumerate(lines, 1):
        if m := _NAME.match(line):
            name = m.group(1)
        elif m := _NPARAM.match(line):
            n_params = int(m.group(1))
        elif m := _NOBS.match(line):
            n_obs = int(m.group(1))
        elif m := _RSS.match(line):
            rss = _float(m.group(1), i, source)
        elif m := _PARAM.match(line):
            tokens = m.group(2).split()
            if len(tokens) < 2:
                raise NistParseError("parameter row without certified value", i, source)
            params[int(m.group(1))] = _float(tokens[-2], i, source)
        elif _DATA.match(line):
            data_at = i
            break
    if name is None:
        raise NistParseError("missing 'Dataset Name:' header", None, source)
    if data_at is None:
        raise NistParseError("missing 'Data:  y  x' marker", None, source)
    if n_obs is None:
        raise NistParseError("missing 'Number of Observations:' header", None, source)
    if n_params is None or sorted(params) != list(range(1, n_params + 1)):
        raise NistParseError(
            f"expected certified values b1..b{n_params}, found {sorted(params)}", None, source
        )

    ys, xs = [], []
    for i, line in enumerate(lines[data_at:], data_at + 1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise NistParseError(f"expected 2 columns, got {len(tokens)}", i, source)
        ys.append(_float(tokens[0], i, source))
        xs.append(_float(tokens[1], i, source))
    if len(ys) != n_obs:
        raise NistParseError(f"header declares {n_obs} observations, found {len(ys)}", None, source)
    return NistDataset(
        name,
        np.array(xs, dtype=np.float64),
        np.array(ys, dtype=np.float64),
        tuple(params[k] for k in sorted(params)),
        rss,
    )


def load_dataset(name: str, directory: str | Path | None = None) -> NistDataset:
    if directory is None:
        text = resources.files("sharpcorr.data").joinpath(f"nist/{name}.dat").read_text(
            encoding="utf-8"
        )
        return parse_dataset(text, f"{name}.dat")
    path = Path(directory) / f"{name}.dat"
    return parse_dataset(path.read_text(encoding="utf-8"), str(path))


def load_datasets(
    directory: str | Path | None = None, names: Iterable[str] = DATASETS
) -> tuple[list[NistDataset], dict[str, str]]:
    """Load what can be loaded; return the datasets and a name -> reason map of failures."""
    loaded, problems = [], {}
    for name in names:
        try:
            loaded.append(load_dataset(name, directory))
        except FileNotFoundError:
            problems[name] = "dataset file not found"
        except (OSError, NistParseError) as exc:
            problems[name] = str(exc)
    return loaded, problems


def certified_model_eval(d: NistDataset) -> np.ndarray:
    try:
        n_params, model = MODELS[d.model_id]
    except KeyError:
        raise ValueError(f"unsupported model {d.model_id!r}") from None
    if len(d.certified_params) != n_params:
        raise ValueError(f"{d.name}: model takes {n_params} parameters, got {len(d.certified_params)}")
    if d.x.size == 0:
        return np.empty(0)
    return model(d.x, d.certified_params)


def reference_R(d: NistDataset) -> ReferenceValue:
    residuals = d.y - certified_model_eval(d)
    centered = d.y - d.y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        raise ValueError(f"{d.name}: constant response, R is undefined")
    ss_res = float(residuals @ residuals)
    return ReferenceValue(d.name, math.sqrt(min(1.0, max(0.0, 1.0 - ss_res / ss_tot))))


@dataclass(frozen=True)
class DatasetScore:
    dataset: str
    measure: MeasureId
    score: float | None
    reference: float
    reason: str | None = None

    @property
    def error(self) -> float | None:
        if self.score is None:
            return None
        return aligned(self.measure, self.score) - self.reference


def score_datasets(
    datasets: Iterable[NistDataset], measures: Iterable[MeasureId]
) -> list[DatasetScore]:
    measures = list(measures)
    out = []
    for d in datasets:
        ref = reference_R(d).R
        for mid in measures:
            try:
                value = compute_all(d.x, d.y, [mid])[0].value
                out.append(DatasetScore(d.name, mid, value, ref))
            except MeasureError as exc:
                out.append(DatasetScore(d.name, mid, None, ref, str(exc.cause)))
    return out


def nist_benchmark(
    datasets: Iterable[NistDataset],
    measures: Iterable[MeasureId],
    *,
    exclude_from_ranking: Iterable[MeasureId] = (),
) -> AccuracyReport:
    """MAE of each measure against the certified-fit R over the datasets."""
    scores = score_datasets(datasets, measures)
    records = [ScoreRecord(s.dataset, s.measure, s.reference, 0, s.score, s.reason) for s in scores]
    return build_report(records, exclude_from_ranking=exclude_from_ranking)


def write_dataset_scores(scores: Iterable[DatasetScore], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "measure", "score", "reference", "error"])
        for s in scores:
            w.writerow(
                [
                    s.dataset,
                    s.measure.value,
                    "" if s.score is None else repr(s.score),
                    repr(s.reference),
                    "" if s.error is None else repr(s.error),
                ]
            )


def normalize_text(text: str) -> str:
    """LF line endings, no trailing blanks: NIST serves CRLF, mirrors often do not."""
    return "\n".join(line.rstrip() for line in text.splitlines()) + "\n"


def fetch_dataset(
    name: str,
    dest: str | Path,
    *,
    url: str | None = None,
    opener: Callable[[str], bytes] | None = None,
) -> Path:
    """Download one dataset, verify its checksum and write it to ``dest``.

    Raises ``ValueError`` on a checksum mismatch; nothing is written then.
    """
    if name not in CHECKSUMS:
        raise ValueError(f"unknown dataset {name!r}; expected one of {DATASETS}")
    url = url or NIST_URL.format(name=name)
    if opener is None:
        def opener(u: str) -> bytes:
            with urllib.request.urlopen(u, timeout=30) as resp:
                return resp.read()
    text = normalize_text(opener(url).decode("latin-1"))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    if digest != CHECKSUMS[name]:
        raise ValueError(f"{name}: checksum mismatch ({digest} != {CHECKSUMS[name]})")
    path = Path(dest) / f"{name}.dat"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path
