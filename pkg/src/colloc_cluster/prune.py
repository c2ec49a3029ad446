"""Cluster exclusion by centroid threshold, and the report tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .em import NOISE, Assignment, MixtureModel
from .features import PointSet

DEFAULT_THRESHOLD = 0.30


@dataclass(frozen=True)
class ClusterVerdict:
    cluster: int
    centroid: tuple[float, ...]
    retained: bool
    member_count: int = 0


def is_retained(centroid, threshold: float) -> bool:
    """A cluster survives when any coordinate of its centroid reaches the threshold."""
    return max(centroid) >= threshold


def prune(
    model: MixtureModel,
    threshold: float = DEFAULT_THRESHOLD,
    assignment: Assignment | None = None,
) -> list[ClusterVerdict]:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} out of [0,1]")
    counts = np.zeros(model.k + 1, dtype=np.int64)
    if assignment is not None:
        counts = np.bincount(assignment.labels, minlength=model.k + 1)
    verdicts = []
    for j, centroid in enumerate(model.centroids, start=1):
        c = tuple(float(v) for v in centroid)
        verdicts.append(ClusterVerdict(j, c, is_retained(c, threshold), int(counts[j])))
    return verdicts


def percent(count: int, total: int) -> float:
    """``100 * count / total`` rounded half-up to two decimals."""
    if total <= 0:
        raise ValueError("total must be positive")
    value = Decimal(100 * count) / Decimal(total)
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Summary:
    total_bigrams: int
    retained_clusters: tuple[int, ...]
    excluded_clusters: tuple[int, ...]
    retained_count: int
    excluded_count: int
    noise_count: int = 0

    def __post_init__(self):
        if self.total_bigrams <= 0:
            raise ValueError("total must be positive")
        if self.retained_count + self.excluded_count + self.noise_count != self.total_bigrams:
            raise ValueError("retained + excluded + noise must equal the total")

    @property
    def candidate_count(self) -> int:
        # unclassified points stay in the candidate pool
        return self.retained_count + self.noise_count

    @property
    def retained_pct(self) -> float:
        return percent(self.retained_count, self.total_bigrams)

    @property
    def excluded_pct(self) -> float:
        return percent(self.excluded_count, self.total_bigrams)

    @property
    def noise_pct(self) -> float:
        return percent(self.noise_count, self.total_bigrams)

    @property
    def candidate_pct(self) -> float:
        return percent(self.candidate_count, self.total_bigrams)

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["total", "candidate", "clusters", "count", "pct"])
        w.writerow([self.total_bigrams, "Yes", _ids(self.retained_clusters), self.retained_count, f"{self.retained_pct:.2f}"])
        w.writerow([self.total_bigrams, "Yes", "NOISE", self.noise_count, f"{self.noise_pct:.2f}"])
        w.writerow([self.total_bigrams, "No", _ids(self.excluded_clusters), self.excluded_count, f"{self.excluded_pct:.2f}"])
        return buf.getvalue()

    def describe(self) -> str:
        return (
            f"bigrams={self.total_bigrams} "
            f"retained clusters={_ids(self.retained_clusters)} ({self.retained_count}, {self.retained_pct:.2f}%) "
            f"noise={self.noise_count} ({self.noise_pct:.2f}%) "
            f"excluded clusters={_ids(self.excluded_clusters)} ({self.excluded_count}, {self.excluded_pct:.2f}%)"
        )


def _ids(ids) -> str:
    return ",".join(str(i) for i in ids) if ids else "-"


def summarize(verdicts, assignment: Assignment | np.ndarray, total: int) -> Summary:
    """Count members of retained clusters, excluded clusters and NOISE."""
    if total <= 0:
        raise ValueError("total must be positive")
    labels = assignment.labels if isinstance(assignment, Assignment) else np.asarray(assignment)
    if len(labels) != total:
        raise ValueError(f"assignment covers {len(labels)} points, expected {total}")
    kept = [v.cluster for v in verdicts if v.retained]
    dropped = [v.cluster for v in verdicts if not v.retained]
    return Summary(
        total_bigrams=total,
        retained_clusters=tuple(kept),
        excluded_clusters=tuple(dropped),
        retained_count=int(np.isin(labels, kept).sum()),
        excluded_count=int(np.isin(labels, dropped).sum()),
        noise_count=int((labels == NOISE).sum()),
    )


@dataclass(frozen=True)
class Row:
    cluster: int  # NOISE == 0
    w1: str
    w2: str
    mi: float
    t: float
    llr: float

    @property
    def label(self) -> str:
        return "NOISE" if self.cluster == NOISE else str(self.cluster)


def _rows(points: PointSet, labels: np.ndarray, mask: np.ndarray) -> list[Row]:
    out = []
    for i in np.flatnonzero(mask):
        w1, w2 = points.bigrams[i]
        x, y, z = points.coords[i]
        out.append(Row(int(labels[i]), w1, w2, float(x), float(y), float(z)))
    return out


def _sort(rows: list[Row], order: str) -> list[Row]:
    if order == "cluster":
        # NOISE sorts after the numbered clusters
        return sorted(rows, key=lambda r: (r.cluster == NOISE, r.cluster, -r.llr, r.w1, r.w2))
    if order == "llr":
        return sorted(rows, key=lambda r: (-r.llr, r.w1, r.w2))
    raise ValueError(f"unknown order {order!r}")


def emit_candidates(points: PointSet, assignment: Assignment, verdicts, order: str = "cluster") -> list[Row]:
    """Members of retained clusters plus NOISE points, with normalized measures."""
    labels = assignment.labels
    kept = [v.cluster for v in verdicts if v.retained]
    mask = np.isin(labels, kept) | (labels == NOISE)
    return _sort(_rows(points, labels, mask), order)


def emit_excluded(points: PointSet, assignment: Assignment, verdicts, order: str = "cluster") -> list[Row]:
    labels = assignment.labels
    dropped = [v.cluster for v in verdicts if not v.retained]
    return _sort(_rows(points, labels, np.isin(labels, dropped)), order)


def rows_to_tsv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_NONE, escapechar="\\")
    w.writerow(["cluster", "w1", "w2", "mi", "t", "llr"])
    for r in rows:
        w.writerow([r.label, r.w1, r.w2, f"{r.mi:.6f}", f"{r.t:.6f}", f"{r.llr:.6f}"])
    return buf.getvalue()


def parse_rows_tsv(text: str) -> list[Row]:
    reader = csv.reader(io.StringIO(text), delimiter="\t", quoting=csv.QUOTE_NONE, escapechar="\\")
    header = next(reader, None)
    if header != ["cluster", "w1", "w2", "mi", "t", "llr"]:
        raise ValueError(f"unexpected header {header}")
    rows = []
    for rec in reader:
        cluster = NOISE if rec[0] == "NOISE" else int(rec[0])
        rows.append(Row(cluster, rec[1], rec[2], float(rec[3]), float(rec[4]), float(rec[5])))
    return rows


def scatter_csv(points: PointSet, assignment: Assignment) -> str:
    """``x,y,z,cluster`` rows for 3D plotting; NOISE is cluster 0."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "z", "cluster"])
    for (x, y, z), lab in zip(points.coords, assignment.labels):
        w.writerow([f"{x:.6f}", f"{y:.6f}", f"{z:.6f}", int(lab)])
    return buf.getvalue()
