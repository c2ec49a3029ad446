"""Synthetic Zipfian corpora with planted collocations, and grading.

The PRNG is numpy's ``Generator(PCG64(seed))``; nothing reads OS entropy.
Word ``w{rank}`` has unigram probability proportional to
``rank ** -zipf_exponent``. After emitting the first word of a planted pair,
the next token is drawn from the unigram distribution with the partner's
weight multiplied by the pair's boost and the whole renormalized.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import StopList


class SynthSpecError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedPair:
    w1: str
    w2: str
    boost: float


@dataclass
class SynthSpec:
    vocab_size: int = 2000
    corpus_tokens: int = 100_000
    zipf_exponent: float = 1.0
    planted: list[PlantedPair] = field(default_factory=list)
    stop_fraction: float = 0.05
    seed: int = 42

    def validate(self) -> None:
        errors = []
        if self.vocab_size < 2:
            errors.append("vocab_size must be >= 2")
        if self.corpus_tokens < 2:
            errors.append("corpus_tokens must be >= 2")
        if not 0 <= self.stop_fraction < 1:
            errors.append("stop_fraction must be in [0, 1)")
        if self.zipf_exponent < 0:
            errors.append("zipf_exponent must be >= 0")
        vocab = set(self.vocabulary()) if self.vocab_size >= 2 else set()
        seen_w1 = set()
        for pair in self.planted:
            if not math.isfinite(pair.boost):
                errors.append(f"boost for {pair.w1} {pair.w2} is not finite, the follow probability is undefined")
            elif pair.boost < 1:
                errors.append(f"boost for {pair.w1} {pair.w2} must be >= 1")
            if pair.w1 not in vocab or pair.w2 not in vocab:
                errors.append(f"planted pair {pair.w1} {pair.w2} is out of vocabulary")
            if pair.w1 in seen_w1:
                errors.append(f"{pair.w1} starts more than one planted pair")
            seen_w1.add(pair.w1)
        if errors:
            raise SynthSpecError("; ".join(errors))

    def vocabulary(self) -> list[str]:
        width = len(str(self.vocab_size))
        return [f"w{r:0{width}d}" for r in range(1, self.vocab_size + 1)]

    def unigram_probs(self) -> np.ndarray:
        ranks = np.arange(1, self.vocab_size + 1, dtype=np.float64)
        weights = ranks ** -self.zipf_exponent
        return weights / weights.sum()


# share of the stop list taken from the top of the rank order
HEAD_SHARE = 0.4


def _stop_count(vocab_size: int, stop_fraction: float) -> int:
    return int(round(stop_fraction * vocab_size))


def _head_count(n_stop: int) -> int:
    return int(n_stop * HEAD_SHARE)


def default_spec(
    vocab_size: int = 2000,
    corpus_tokens: int = 100_000,
    zipf_exponent: float = 1.0,
    n_planted: int = 50,
    boost: float = 30.0,
    stop_fraction: float = 0.05,
    seed: int = 42,
) -> SynthSpec:
    """Build a spec with ``n_planted`` pairs over distinct words.

    Ranks are laid out like a natural lexicon: the most frequent words
    (``HEAD_SHARE`` of the stop list) play the role of function words, the planted
    pairs use the next ``2 * n_planted`` ranks, paired with a neighbour of
    similar frequency, and the rest of the stop list is scattered over the
    remaining ranks by :func:`stop_words`.
    """
    spec = SynthSpec(vocab_size, corpus_tokens, zipf_exponent, [], stop_fraction, seed)
    if n_planted < 1:
        raise SynthSpecError("at least one planted pair is required")
    vocab = spec.vocabulary()
    head = _head_count(_stop_count(vocab_size, stop_fraction))
    if head + 2 * n_planted > vocab_size:
        raise SynthSpecError(f"vocabulary of {vocab_size} is too small for {n_planted} planted pairs")
    rng = np.random.default_rng([seed, 1])
    flips = rng.random(n_planted) < 0.5
    planted = []
    for i in range(n_planted):
        a, b = head + 2 * i, head + 2 * i + 1
        if flips[i]:
            a, b = b, a
        planted.append(PlantedPair(vocab[a], vocab[b], float(boost)))
    spec.planted = planted
    return spec


def stop_words(spec: SynthSpec) -> list[str]:
    """The head of the rank order plus words drawn uniformly from the ranks
    outside the head and the planted words."""
    vocab = spec.vocabulary()
    n_stop = _stop_count(spec.vocab_size, spec.stop_fraction)
    reserved = {p.w1 for p in spec.planted} | {p.w2 for p in spec.planted}
    n_head = _head_count(n_stop)
    head = [w for w in vocab[:n_head] if w not in reserved]
    rest = [w for w in vocab[n_head:] if w not in reserved]
    n_rest = n_stop - len(head)
    if n_rest > len(rest):
        raise SynthSpecError("stop_fraction leaves too few non-planted words for the stop list")
    rng = np.random.default_rng([spec.seed, 2])
    picked = rng.choice(len(rest), size=n_rest, replace=False)
    return head + [rest[i] for i in np.sort(picked)]


def generate(spec: SynthSpec) -> tuple[str, StopList, list[PlantedPair]]:
    """Sample a corpus; returns (text, stop list, gold pairs)."""
    spec.validate()
    vocab = spec.vocabulary()
    index = {w: i for i, w in enumerate(vocab)}
    probs = spec.unigram_probs()
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0

    n = spec.corpus_tokens
    partner = np.full(spec.vocab_size, -1, dtype=np.int64)
    follow_prob = np.zeros(spec.vocab_size)
    for pair in spec.planted:
        a, b = index[pair.w1], index[pair.w2]
        partner[a] = b
        pb = probs[b]
        follow_prob[a] = pair.boost * pb / (1.0 + (pair.boost - 1.0) * pb)

    rng = np.random.default_rng(spec.seed)
    base = np.searchsorted(cdf, rng.random(n), side="right")
    u = rng.random(n)

    out = np.empty(n, dtype=np.int64)
    prev = -1
    for i in range(n):
        tok = int(base[i])
        if prev >= 0 and partner[prev] >= 0:
            target = partner[prev]
            if u[i] < follow_prob[prev]:
                tok = int(target)
            else:
                # unigram draw conditioned on not being the partner
                while tok == target:
                    tok = int(np.searchsorted(cdf, rng.random(), side="right"))
        out[i] = tok
        prev = tok

    words = [vocab[min(t, spec.vocab_size - 1)] for t in out]
    lines = [" ".join(words[i : i + 20]) for i in range(0, n, 20)]
    text = "\n".join(lines) + "\n"
    return text, StopList(frozenset(stop_words(spec))), list(spec.planted)


def format_gold(gold: list[PlantedPair]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(["w1", "w2", "boost"])
    for p in gold:
        writer.writerow([p.w1, p.w2, repr(p.boost)])
    return buf.getvalue()


def parse_gold(text: str) -> list[PlantedPair]:
    rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
    if rows and rows[0] == ["w1", "w2", "boost"]:
        rows = rows[1:]
    return [PlantedPair(r[0], r[1], float(r[2])) for r in rows if r]


def format_stoplist(sl: StopList) -> str:
    return "".join(f"{w}\n" for w in sorted(sl.entries))


def grade(candidates, excluded, gold) -> dict:
    """Planted-pair recall among candidates and the search-space reduction.

    ``candidates`` and ``excluded`` are rows exposing ``w1`` and ``w2``
    (attributes or mapping keys) or plain ``(w1, w2)`` tuples.
    """
    gold_pairs = {(p.w1, p.w2) if isinstance(p, PlantedPair) else tuple(p[:2]) for p in gold}
    if not gold_pairs:
        raise ValueError("gold set is empty")
    cand = {_pair(r) for r in candidates}
    excl = {_pair(r) for r in excluded}
    overlap = cand & excl
    if overlap:
        raise ValueError(f"candidate and excluded tables overlap on {len(overlap)} bigrams")
    total = len(cand) + len(excl)
    return {
        "recall": len(gold_pairs & cand) / len(gold_pairs),
        "reduction": len(excl) / total if total else 0.0,
        "candidate_count": len(cand),
        "excluded_count": len(excl),
    }


def _pair(row) -> tuple[str, str]:
    if hasattr(row, "w1"):
        return (row.w1, row.w2)
    if isinstance(row, dict):
        return (row["w1"], row["w2"])
    return (row[0], row[1])


def metrics_json(metrics: dict) -> str:
    return json.dumps(metrics, indent=2, sort_keys=True) + "\n"
