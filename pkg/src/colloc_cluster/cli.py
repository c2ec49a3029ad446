"""Command-line entry point: ``extract`` and ``synth-eval``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline, synth
from .config import ConfigError, PipelineConfig, validate_config
from .corpus import CorpusDecodeError
from .measures import FULL, SIMPLIFIED

log = logging.getLogger("colloc_cluster")

EXIT_USAGE = 2

_DEFAULTS = PipelineConfig()


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-count", type=int, default=_DEFAULTS.min_count,
                   help="drop bigrams seen fewer times than this")
    p.add_argument("--clusters", default="auto",
                   help="number of EM clusters, or 'auto' / 'auto:KMIN-KMAX' for cross-validated "
                        f"selection (auto range {_DEFAULTS.k_min}-{_DEFAULTS.k_max})")
    p.add_argument("--folds", type=int, default=_DEFAULTS.folds,
                   help="cross-validation folds for automatic k selection")
    p.add_argument("--cv-max-points", type=int, default=_DEFAULTS.cv_max_points,
                   help="random subsample size used for k selection")
    p.add_argument("--threshold", type=float, default=_DEFAULTS.threshold,
                   help="a cluster is kept if any centroid coordinate reaches this value")
    p.add_argument("--noise-mad-factor", type=float, default=_DEFAULTS.noise_mad_factor,
                   help="points with log density below median - factor * 1.4826 * MAD are NOISE; 'inf' disables")
    p.add_argument("--tol", type=float, default=_DEFAULTS.tol,
                   help="EM stops when the relative log-likelihood gain drops below this")
    p.add_argument("--max-iter", type=int, default=_DEFAULTS.max_iter, help="EM iteration cap")
    p.add_argument("--seed", type=int, default=_DEFAULTS.seed, help="seed for all randomness")
    p.add_argument("--variance", choices=(FULL, SIMPLIFIED), default=_DEFAULTS.variance,
                   help="t-test variance: p(1-p) or the p approximation")
    p.add_argument("--strip-diacritics", action="store_true",
                   help="remove Arabic diacritics and tatweel from tokens")
    p.add_argument("--threads", type=int, default=_DEFAULTS.threads,
                   help="worker threads; outputs are identical for any value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colloc-cluster",
        description="Score adjacent bigrams with MI, t and log-likelihood ratio, cluster them "
                    "with EM and prune clusters unlikely to hold collocations.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    ex = sub.add_parser("extract", formatter_class=fmt, help="run the pipeline on a corpus")
    ex.add_argument("--corpus", required=True, help="UTF-8 corpus file")
    ex.add_argument("--stoplist", required=True, help="UTF-8 stop list, one entry per line, '#' comments")
    ex.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(ex)

    se = sub.add_parser("synth-eval", formatter_class=fmt,
                        help="generate a synthetic corpus with planted collocations and grade the pipeline")
    se.add_argument("--vocab", type=int, default=2000, help="vocabulary size")
    se.add_argument("--tokens", type=int, default=100_000, help="corpus length in tokens")
    se.add_argument("--zipf", type=float, default=1.0, help="Zipf exponent of the unigram distribution")
    se.add_argument("--planted", type=int, default=50, help="number of planted pairs")
    se.add_argument("--boost", type=float, default=30.0, help="follow-probability multiplier for planted pairs")
    se.add_argument("--stop-fraction", type=float, default=0.05, help="share of the vocabulary in the stop list")
    se.add_argument("--out", required=True, help="output directory")
    _add_pipeline_flags(se)
    return parser


def _config(args: argparse.Namespace, **paths) -> PipelineConfig:
    return validate_config({
        **paths,
        "min_count": args.min_count,
        "clusters": args.clusters,
        "folds": args.folds,
        "cv_max_points": args.cv_max_points,
        "threshold": args.threshold,
        "noise_mad_factor": args.noise_mad_factor,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
        "variance": args.variance,
        "strip_diacritics": args.strip_diacritics,
        "threads": args.threads,
    })


def cmd_extract(args: argparse.Namespace) -> int:
    cfg = _config(args, corpus=args.corpus, stoplist=args.stoplist, out=args.out)
    summary, written = pipeline.run_extract(cfg)
    log.info("wrote %s", ", ".join(sorted(p.name for p in written.values())))
    print(summary.describe())
    return 0


def run_synth(args: argparse.Namespace) -> dict:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = synth.default_spec(
        vocab_size=args.vocab,
        corpus_tokens=args.tokens,
        zipf_exponent=args.zipf,
        n_planted=args.planted,
        boost=args.boost,
        stop_fraction=args.stop_fraction,
        seed=args.seed,
    )
    text, stop, gold = synth.generate(spec)
    (out / "corpus.txt").write_text(text, encoding="utf-8", newline="\n")
    (out / "stoplist.txt").write_text(synth.format_stoplist(stop), encoding="utf-8", newline="\n")
    (out / "gold.tsv").write_text(synth.format_gold(gold), encoding="utf-8", newline="\n")

    cfg = _config(args, corpus=str(out / "corpus.txt"), stoplist=str(out / "stoplist.txt"), out=str(out))
    result = pipeline.extract(cfg)
    pipeline.write_artifacts(result, cfg, out)
    metrics = synth.grade(result.candidates, result.excluded, gold)
    (out / "metrics.json").write_text(synth.metrics_json(metrics), encoding="utf-8", newline="\n")
    print(result.summary.describe())
    return metrics


def cmd_synth(args: argparse.Namespace) -> int:
    metrics = run_synth(args)
    print(synth.metrics_json(metrics), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "extract":
            return cmd_extract(args)
        return cmd_synth(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except pipeline.PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (CorpusDecodeError, synth.SynthSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
