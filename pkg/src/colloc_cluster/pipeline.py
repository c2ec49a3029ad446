"""End-to-end extraction: corpus -> bigrams -> points -> clusters -> reports."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import em
from .config import PipelineConfig
from .corpus import TokenizerConfig, extract_bigrams, load_stoplist, tokenize
from .features import PointSet, build_points, write_features_csv
from .prune import (
    Row,
    Summary,
    emit_candidates,
    emit_excluded,
    prune,
    rows_to_tsv,
    scatter_csv,
    summarize,
)

logger = logging.getLogger(__name__)

ARTIFACTS = ("candidates.tsv", "excluded.tsv", "summary.tsv", "points.csv", "model.json")


class PipelineError(RuntimeError):
    exit_code = 1


class InputMissing(PipelineError):
    exit_code = 3


class EmptyCorpus(PipelineError):
    exit_code = 4


@dataclass
class ExtractResult:
    summary: Summary
    points: PointSet
    model: em.MixtureModel
    assignment: em.Assignment
    verdicts: list
    candidates: list[Row]
    excluded: list[Row]
    cv_scores: dict[int, float] = field(default_factory=dict)


def _read(path: str | None, what: str) -> bytes:
    if not path:
        raise InputMissing(f"no {what} path given")
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputMissing(f"cannot read {what} {path}: {exc.strerror}") from None


def extract(config: PipelineConfig, corpus_text=None, stoplist_text=None) -> ExtractResult:
    """Run the whole pipeline in memory. Texts override the configured paths."""
    rules = TokenizerConfig(strip_diacritics=config.strip_diacritics)
    if corpus_text is None:
        corpus_text = _read(config.corpus, "corpus")
    if stoplist_text is None:
        stoplist_text = _read(config.stoplist, "stop list") if config.stoplist else ""

    tokens = tokenize(corpus_text, rules)
    stop = load_stoplist(stoplist_text, rules)
    table = extract_bigrams(tokens, stop, threads=config.threads)
    logger.info("tokens=%d bigram positions=%d distinct bigrams=%d", table.T, table.N, len(table))
    if not table.filtered(config.min_count):
        raise EmptyCorpus("corpus is empty after stop-list filtering")

    points = build_points(table, config.min_count, config.variance, threads=config.threads)
    coords = points.coords

    k_min, k_max = config.k_range
    k_max = min(k_max, len(points))
    k_min = min(k_min, k_max)
    scores: dict[int, float] = {}
    if k_min == k_max:
        k = k_min
    else:
        scores = em.cv_scores(
            coords, k_min, k_max,
            folds=config.folds, seed=config.seed, tol=config.tol,
            max_iter=config.max_iter, max_points=config.cv_max_points,
            threads=config.threads,
        )
        k = k_min
        for cand in range(k_min + 1, k_max + 1):
            if scores[cand] > scores[k]:
                k = cand
        logger.info("selected k=%d by %d-fold cross-validation", k, config.folds)

    model = em.em_fit(coords, k, seed=config.seed, tol=config.tol, max_iter=config.max_iter)
    assignment = em.assign(model, coords, config.noise_mad_factor)
    verdicts = prune(model, config.threshold, assignment)
    summary = summarize(verdicts, assignment, len(points))
    return ExtractResult(
        summary=summary,
        points=points,
        model=model,
        assignment=assignment,
        verdicts=verdicts,
        candidates=emit_candidates(points, assignment, verdicts),
        excluded=emit_excluded(points, assignment, verdicts),
        cv_scores=scores,
    )


def model_document(result: ExtractResult, config: PipelineConfig) -> dict:
    doc = result.model.to_dict()
    doc["noise_mad_factor"] = config.noise_mad_factor
    doc["threshold"] = config.threshold
    doc["normalization"] = {
        "mins": list(result.points.params.mins),
        "maxs": list(result.points.params.maxs),
    }
    if result.cv_scores:
        doc["cv_scores"] = {str(k): v for k, v in sorted(result.cv_scores.items())}
    return doc


def write_artifacts(result: ExtractResult, config: PipelineConfig, out_dir: str | os.PathLike) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    contents = {
        "candidates.tsv": rows_to_tsv(result.candidates),
        "excluded.tsv": rows_to_tsv(result.excluded),
        "summary.tsv": result.summary.to_tsv(),
        "points.csv": scatter_csv(result.points, result.assignment),
        "model.json": json.dumps(model_document(result, config), indent=2) + "\n",
    }
    written = {}
    for name, text in contents.items():
        path = out / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written[name] = path
    with open(out / "features.csv", "w", encoding="utf-8", newline="") as fh:
        write_features_csv(result.points, fh)
    written["features.csv"] = out / "features.csv"
    return written


def run_extract(config: PipelineConfig) -> tuple[Summary, dict[str, Path]]:
    if not config.out:
        raise PipelineError("no output directory given")
    result = extract(config)
    return result.summary, write_artifacts(result, config, config.out)
