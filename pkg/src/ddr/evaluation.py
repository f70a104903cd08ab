"""Dataset evaluation: rank correlation of quality scores against labels,
descriptor correlation tables, and the restoration objective value.

Per-image scoring is embarrassingly parallel; results are aggregated by
record index so the outcome never depends on completion order or on how the
work was partitioned.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import DegradationSet, ddr_text, quality_score
from .encoders.preprocess import preprocess
from .encoders.session import EncoderSession, encode_image
from .exceptions import (
    DataError,
    DdrError,
    DimensionMismatchError,
    UndefinedCorrelationError,
)
from .images import load_image
from .metrics import colorfulness, psnr, sharpness_proxy
from .prompts import DegradationType

DEFAULT_LAMBDA_D = 2.0


# --------------------------------------------------------------------------
# rank correlation
# --------------------------------------------------------------------------

def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size, dtype=np.float64)
    sorted_v = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def srcc(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties.

    Both lists must have equal length >= 2 and must not be constant.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise DimensionMismatchError(
            f"score lists must be 1-D and equal length, got {x.shape} vs {y.shape}"
        )
    if x.size < 2:
        raise UndefinedCorrelationError("rank correlation needs at least 2 samples")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise UndefinedCorrelationError("scores must be finite")
    if x.min() == x.max() or y.min() == y.max():
        raise UndefinedCorrelationError(
            "rank correlation is undefined for constant score lists"
        )
    rx = average_ranks(x)
    ry = average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    num = float(np.dot(dx, dy))
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    rho = num / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


# --------------------------------------------------------------------------
# dataset manifests
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestRecord:
    """One labeled image; path is kept as written in the manifest."""

    path: str
    mos: float


@dataclass(frozen=True)
class DatasetManifest:
    dataset_id: str
    records: tuple[ManifestRecord, ...]
    root: Path = Path(".")

    def __post_init__(self) -> None:
        paths = [r.path for r in self.records]
        if len(set(paths)) != len(paths):
            raise DataError(f"manifest {self.dataset_id!r} has duplicate paths")
        for r in self.records:
            if not math.isfinite(r.mos):
                raise DataError(f"non-finite label for {r.path}")

    def resolve(self, record: ManifestRecord) -> Path:
        return self.root / record.path


def load_manifest(path, dataset_id: str | None = None) -> DatasetManifest:
    """Read a two-column ``path,mos`` CSV; paths are relative to the file."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fields = [f.strip().lower() for f in reader.fieldnames or []]
            if fields[:2] != ["path", "mos"]:
                raise DataError(
                    f"manifest {path} must have header 'path,mos', got {reader.fieldnames}"
                )
            records = []
            for lineno, row in enumerate(reader, start=2):
                raw_path = (row.get("path") or "").strip()
                raw_mos = (row.get("mos") or "").strip()
                if not raw_path:
                    raise DataError(f"{path}:{lineno}: empty image path")
                try:
                    mos = float(raw_mos)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad mos value {raw_mos!r}") from None
                records.append(ManifestRecord(path=raw_path, mos=mos))
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    if not records:
        raise DataError(f"manifest {path} has no records")
    return DatasetManifest(
        dataset_id=dataset_id or path.stem, records=tuple(records), root=path.parent
    )


# --------------------------------------------------------------------------
# dataset-wide scoring
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PerImageScore:
    path: str
    q_ddr: float
    mos: float
    per_degradation: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RecordFailure:
    path: str
    error: str


@dataclass(frozen=True)
class EvalResult:
    dataset_id: str
    n_images: int
    srcc: float
    per_image: tuple[PerImageScore, ...]
    degradation_set_used: tuple[str, ...]
    failures: tuple[RecordFailure, ...] = ()

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "n_images": self.n_images,
            "srcc": self.srcc,
            "degradation_set_used": list(self.degradation_set_used),
            "per_image": [
                {
                    "path": s.path,
                    "q_ddr": s.q_ddr,
                    "mos": s.mos,
                    "ddr": dict(s.per_degradation),
                }
                for s in self.per_image
            ],
            "failures": [
                {"path": f.path, "error": f.error} for f in self.failures
            ],
        }


def score_image_file(
    path: str, degradation_set: DegradationSet, image_session: EncoderSession
) -> dict[str, float]:
    """Per-degradation responses for one image file (keys are type names)."""
    feature = encode_image(image_session, preprocess(load_image(path)))
    return {
        member.degradation.value: ddr_text(feature, member)
        for member in degradation_set
    }


def _map_records(
    records: Sequence[ManifestRecord],
    worker: Callable[[ManifestRecord], object],
    parallelism: int,
) -> list[object]:
    """Apply worker to records, preserving order regardless of scheduling."""
    if parallelism <= 1 or len(records) <= 1:
        return [worker(r) for r in records]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(worker, records))


def evaluate_biqa(
    manifest: DatasetManifest,
    degradation_set: DegradationSet,
    image_session: EncoderSession,
    parallelism: int = 1,
) -> EvalResult:
    """Score every record and rank-correlate quality scores against labels.

    Unreadable records are collected as failures; evaluation proceeds when
    at least two records scored successfully.
    """

    def worker(record: ManifestRecord):
        try:
            per_type = score_image_file(
                manifest.resolve(record), degradation_set, image_session
            )
            q = float(np.mean(list(per_type.values())))
            return PerImageScore(
                path=record.path, q_ddr=q, mos=record.mos, per_degradation=per_type
            )
        except DdrError as exc:
            return RecordFailure(path=record.path, error=str(exc))

    outcomes = _map_records(manifest.records, worker, parallelism)
    scores = [o for o in outcomes if isinstance(o, PerImageScore)]
    failures = [o for o in outcomes if isinstance(o, RecordFailure)]
    if len(scores) < 2:
        raise DataError(
            f"only {len(scores)} of {len(manifest.records)} records scored "
            f"successfully; need at least 2"
        )
    rho = srcc([s.q_ddr for s in scores], [s.mos for s in scores])
    return EvalResult(
        dataset_id=manifest.dataset_id,
        n_images=len(scores),
        srcc=rho,
        per_image=tuple(scores),
        degradation_set_used=tuple(t.value for t in degradation_set.types),
        failures=tuple(failures),
    )


# --------------------------------------------------------------------------
# descriptor correlation table
# --------------------------------------------------------------------------

CORRELATION_COLUMNS = ("colorfulness", "sharpness", "quality")


@dataclass(frozen=True)
class CorrelationTable:
    dataset_id: str
    n_images: int
    rows: tuple[tuple[DegradationType, dict[str, float]], ...]
    failures: tuple[RecordFailure, ...] = ()

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "n_images": self.n_images,
            "columns": list(CORRELATION_COLUMNS),
            "rows": [
                {"degradation": t.value, **{c: vals[c] for c in CORRELATION_COLUMNS}}
                for t, vals in self.rows
            ],
            "failures": [
                {"path": f.path, "error": f.error} for f in self.failures
            ],
        }


def correlate_descriptors(
    manifest: DatasetManifest,
    degradation_set: DegradationSet,
    image_session: EncoderSession,
    parallelism: int = 1,
) -> CorrelationTable:
    """Rank correlation between each degradation's response and per-image
    descriptors (colorfulness, sharpness proxy, quality labels)."""

    def worker(record: ManifestRecord):
        try:
            img = load_image(manifest.resolve(record))
            per_type = {
                member.degradation.value: ddr_text(
                    encode_image(image_session, preprocess(img)), member
                )
                for member in degradation_set
            }
            return (
                per_type,
                colorfulness(img),
                sharpness_proxy(img),
                record.mos,
            )
        except DdrError as exc:
            return RecordFailure(path=record.path, error=str(exc))

    outcomes = _map_records(manifest.records, worker, parallelism)
    failures = [o for o in outcomes if isinstance(o, RecordFailure)]
    rows_data = [o for o in outcomes if not isinstance(o, RecordFailure)]
    if len(rows_data) < 2:
        raise DataError(
            f"only {len(rows_data)} of {len(manifest.records)} records scored "
            f"successfully; need at least 2"
        )
    color_vals = [r[1] for r in rows_data]
    sharp_vals = [r[2] for r in rows_data]
    mos_vals = [r[3] for r in rows_data]
    table = []
    for degradation in degradation_set.types:
        responses = [r[0][degradation.value] for r in rows_data]
        table.append(
            (
                degradation,
                {
                    "colorfulness": srcc(responses, color_vals),
                    "sharpness": srcc(responses, sharp_vals),
                    "quality": srcc(responses, mos_vals),
                },
            )
        )
    return CorrelationTable(
        dataset_id=manifest.dataset_id,
        n_images=len(rows_data),
        rows=tuple(table),
        failures=tuple(failures),
    )


# --------------------------------------------------------------------------
# restoration objective (forward value)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Components of the restoration objective for one image pair."""

    objective: float
    reconstruction: float
    lambda_d: float
    ddr_terms: dict[str, float]
    identical_inputs: bool

    @property
    def ddr_total(self) -> float:
        return sum(self.ddr_terms.values())


def objective_breakdown(
    restored,
    gt,
    degradation_set: DegradationSet,
    image_session: EncoderSession,
    lambda_d: float = DEFAULT_LAMBDA_D,
) -> ObjectiveBreakdown:
    """Reconstruction loss minus weighted degradation responses.

    The reconstruction loss is negated PSNR (peak 1.0), so identical inputs
    drive it to -inf; that case is flagged rather than hidden.
    """
    if lambda_d < 0:
        raise DataError(f"lambda_d must be >= 0, got {lambda_d}")
    fidelity = psnr(restored, gt)
    identical = math.isinf(fidelity)
    reconstruction = -fidelity
    feature = encode_image(image_session, preprocess(restored))
    terms = {
        member.degradation.value: ddr_text(feature, member)
        for member in degradation_set
    }
    objective = reconstruction - lambda_d * sum(terms.values())
    return ObjectiveBreakdown(
        objective=objective,
        reconstruction=reconstruction,
        lambda_d=lambda_d,
        ddr_terms=terms,
        identical_inputs=identical,
    )


def ddr_objective(
    restored,
    gt,
    degradation_set: DegradationSet,
    image_session: EncoderSession,
    lambda_d: float = DEFAULT_LAMBDA_D,
) -> float:
    """Forward objective value; linear in each response with slope -lambda_d."""
    return objective_breakdown(
        restored, gt, degradation_set, image_session, lambda_d
    ).objective


__all__ = [
    "CORRELATION_COLUMNS",
    "CorrelationTable",
    "DEFAULT_LAMBDA_D",
    "DatasetManifest",
    "EvalResult",
    "ManifestRecord",
    "ObjectiveBreakdown",
    "PerImageScore",
    "RecordFailure",
    "average_ranks",
    "correlate_descriptors",
    "ddr_objective",
    "evaluate_biqa",
    "load_manifest",
    "objective_breakdown",
    "score_image_file",
    "srcc",
]
