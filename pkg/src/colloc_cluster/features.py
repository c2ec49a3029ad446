"""Min-max normalized (MI, t, LLR) points, one per distinct bigram."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .corpus import BigramTable
from .measures import FULL, MeasureVector, measure_arrays

AXES = ("mi", "t", "llr")


@dataclass(frozen=True)
class NormalizationParams:
    mins: tuple[float, float, float]
    maxs: tuple[float, float, float]

    def __post_init__(self):
        for lo, hi in zip(self.mins, self.maxs):
            if lo > hi:
                raise ValueError(f"min {lo} > max {hi}")


@dataclass(frozen=True)
class FeaturePoint:
    bigram: tuple[str, str]
    raw: MeasureVector
    coords: tuple[float, float, float]
    diagnostic: str | None = None


def fit_normalizer(raws) -> NormalizationParams:
    """Per-dimension min and max; non-finite values (degenerate t) are skipped.

    ``raws`` is either a sequence of :class:`MeasureVector` or an ``(n, 3)``
    array.
    """
    arr = _as_array(raws)
    if arr.shape[0] == 0:
        raise ValueError("cannot fit a normalizer on an empty population")
    mins, maxs = [], []
    for d in range(3):
        col = arr[:, d]
        col = col[np.isfinite(col)]
        if col.size == 0:
            mins.append(0.0)
            maxs.append(0.0)
        else:
            mins.append(float(col.min()))
            maxs.append(float(col.max()))
    return NormalizationParams(tuple(mins), tuple(maxs))


def normalize(raw, p: NormalizationParams) -> np.ndarray:
    """Map raw values into [0, 1]; zero-range dimensions map to 0.

    Accepts a single vector (MeasureVector or 3-sequence) or an ``(n, 3)``
    array. Infinite t values clamp to the ends of the axis.
    """
    single = isinstance(raw, MeasureVector) or np.ndim(raw) == 1
    arr = _as_array([raw] if isinstance(raw, MeasureVector) else raw)
    arr = np.atleast_2d(arr)
    lo = np.asarray(p.mins)
    hi = np.asarray(p.maxs)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    with np.errstate(invalid="ignore"):
        out = (arr - lo) / safe
    out = np.where(span > 0, out, 0.0)
    out = np.clip(out, 0.0, 1.0)
    # exact endpoints: the population extremes must land on 0 and 1
    out = np.where((span > 0) & (arr == hi), 1.0, out)
    out = np.where(arr == lo, 0.0, out)
    return out[0] if single else out


def _as_array(raws) -> np.ndarray:
    if isinstance(raws, np.ndarray):
        return raws.astype(np.float64, copy=False).reshape(-1, 3)
    raws = list(raws)
    if raws and isinstance(raws[0], MeasureVector):
        return np.array([r.as_tuple() for r in raws], dtype=np.float64).reshape(-1, 3)
    return np.asarray(raws, dtype=np.float64).reshape(-1, 3)


@dataclass
class PointSet:
    """Column-oriented view of all feature points for one corpus."""

    bigrams: list[tuple[str, str]]
    counts: np.ndarray  # (n, 4) int64: c12, c1, c2, N
    raw: np.ndarray  # (n, 3)
    coords: np.ndarray  # (n, 3)
    t_degenerate: np.ndarray  # (n,) bool
    params: NormalizationParams

    def __len__(self) -> int:
        return len(self.bigrams)

    def __getitem__(self, i: int) -> FeaturePoint:
        mi, t, llr = (float(v) for v in self.raw[i])
        degenerate = bool(self.t_degenerate[i])
        return FeaturePoint(
            bigram=self.bigrams[i],
            raw=MeasureVector(mi, t, llr, degenerate),
            coords=tuple(float(v) for v in self.coords[i]),
            diagnostic="t_degenerate" if degenerate else None,
        )

    def __iter__(self) -> Iterator[FeaturePoint]:
        for i in range(len(self)):
            yield self[i]


def build_points(
    table: BigramTable,
    min_count: int = 1,
    variance: str = FULL,
    threads: int = 1,
) -> PointSet:
    """Score and normalize every distinct bigram with ``c12 >= min_count``.

    Normalization is fitted over the whole retained population once.
    Bigrams are ordered lexicographically so the output never depends on
    counting order.
    """
    bigrams = table.filtered(min_count)
    if not bigrams:
        raise ValueError("bigram table is empty")
    counts = np.array(
        [(table.pairs[b], table.first[b[0]], table.second[b[1]], table.N) for b in bigrams],
        dtype=np.int64,
    )
    raw = np.empty((len(bigrams), 3))
    degenerate = np.empty(len(bigrams), dtype=bool)
    chunks = _chunks(len(bigrams), threads)

    def work(lo_hi):
        lo, hi = lo_hi
        c = counts[lo:hi]
        mi, t, llr, deg = measure_arrays(c[:, 0], c[:, 1], c[:, 2], c[:, 3], variance)
        raw[lo:hi, 0], raw[lo:hi, 1], raw[lo:hi, 2] = mi, t, llr
        degenerate[lo:hi] = deg

    if len(chunks) == 1:
        work(chunks[0])
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))

    params = fit_normalizer(raw)
    coords = normalize(raw, params)
    return PointSet(bigrams, counts, raw, coords, degenerate, params)


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    return [(n * i // parts, n * (i + 1) // parts) for i in range(parts)]


def write_features_csv(points: PointSet, fh: io.TextIOBase) -> None:
    """CSV with header ``w1,w2,mi,t,llr,x,y,z``."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["w1", "w2", *AXES, "x", "y", "z"])
    for (w1, w2), raw, xyz in zip(points.bigrams, points.raw, points.coords):
        writer.writerow([w1, w2, *(_fmt(v) for v in raw), *(_fmt(v) for v in xyz)])


def _fmt(v: float) -> str:
    return repr(float(v))
