"""Tokenization, stop lists and adjacent-bigram counting."""

from __future__ import annotations

import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_PUNCTUATION = ".,;:!?؟،؛\"'()[]{}"

# Arabic harakat, superscript alef and tatweel.
_ARABIC_DIACRITICS = re.compile("[\u064B-\u0652\u0670\u0640]")


class CorpusDecodeError(ValueError):
    """Raised when corpus or stop-list bytes are not valid UTF-8."""

    def __init__(self, offset: int, reason: str):
        self.offset = offset
        super().__init__(f"invalid UTF-8 at byte offset {offset}: {reason}")


def decode_utf8(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusDecodeError(exc.start, exc.reason) from None


@dataclass(frozen=True)
class TokenizerConfig:
    punctuation: str = DEFAULT_PUNCTUATION
    strip_diacritics: bool = False

    def splitter(self) -> re.Pattern:
        if self.punctuation:
            return re.compile(r"[\s" + re.escape(self.punctuation) + r"]+")
        return re.compile(r"\s+")

    def normalize(self, text: str) -> str:
        if self.strip_diacritics:
            text = _ARABIC_DIACRITICS.sub("", text)
        return text


@dataclass(frozen=True)
class Token:
    text: str
    position: int


def tokenize(corpus_text: bytes | str, rules: TokenizerConfig | None = None) -> list[Token]:
    """Split a corpus into tokens on whitespace and the configured punctuation.

    Bytes are decoded as UTF-8 first; a decode failure raises
    :class:`CorpusDecodeError` carrying the offending byte offset.
    """
    rules = rules or TokenizerConfig()
    text = decode_utf8(corpus_text)
    out: list[Token] = []
    for piece in rules.splitter().split(text):
        piece = rules.normalize(piece)
        if piece:
            out.append(Token(piece, len(out)))
    return out


@dataclass(frozen=True)
class StopList:
    entries: frozenset = frozenset()

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_stoplist(path_contents: bytes | str, rules: TokenizerConfig | None = None) -> StopList:
    """Parse a one-entry-per-line stop list; blank lines and '#' comments are skipped."""
    rules = rules or TokenizerConfig()
    text = decode_utf8(path_contents)
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        entries.add(rules.normalize(line))
    return StopList(frozenset(entries))


@dataclass
class BigramTable:
    """Counts for every adjacent non-stop pair.

    ``first`` and ``second`` hold the positional marginals (how many counted
    pairs start with / end in a word); these are the marginals the
    association measures consume, so every 2x2 contingency table built from
    this object is consistent. ``unigrams`` tallies every non-stop token.
    """

    pairs: dict[tuple[str, str], int] = field(default_factory=dict)
    unigrams: dict[str, int] = field(default_factory=dict)
    first: dict[str, int] = field(default_factory=dict)
    second: dict[str, int] = field(default_factory=dict)
    N: int = 0
    T: int = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def pair_tokens(self) -> int:
        return self.N

    def stats(self, pair: tuple[str, str]):
        from .measures import BigramStats

        w1, w2 = pair
        return BigramStats(self.pairs[pair], self.first[w1], self.second[w2], self.N)

    def filtered(self, min_count: int) -> list[tuple[str, str]]:
        """Distinct pairs with at least ``min_count`` occurrences, sorted."""
        return sorted(p for p, c in self.pairs.items() if c >= min_count)


def _count_shard(words: Sequence[str], stop: StopList, lo: int, hi: int):
    pairs: Counter = Counter()
    unigrams: Counter = Counter()
    for i in range(lo, hi):
        w = words[i]
        if w in stop:
            continue
        unigrams[w] += 1
        if i + 1 < len(words):
            nxt = words[i + 1]
            if nxt not in stop:
                pairs[(w, nxt)] += 1
    return pairs, unigrams


def extract_bigrams(
    tokens: Iterable[Token | str], sl: StopList | None = None, threads: int = 1
) -> BigramTable:
    """Count pairs of strictly consecutive tokens that are both outside the stop list.

    A stop word breaks adjacency: in ``a s b`` with ``s`` stopped, no
    ``(a, b)`` pair is formed. Counting can be sharded over ``threads``;
    integer merging makes the result independent of the shard layout.
    """
    sl = sl or StopList()
    words = [t.text if isinstance(t, Token) else t for t in tokens]
    n = len(words)
    threads = max(1, min(threads, n or 1))
    bounds = [(n * i // threads, n * (i + 1) // threads) for i in range(threads)]
    if threads == 1:
        shards = [_count_shard(words, sl, 0, n)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shards = list(pool.map(lambda b: _count_shard(words, sl, *b), bounds))

    pairs: Counter = Counter()
    unigrams: Counter = Counter()
    for p, u in shards:
        pairs.update(p)
        unigrams.update(u)

    first: Counter = Counter()
    second: Counter = Counter()
    for (w1, w2), c in pairs.items():
        first[w1] += c
        second[w2] += c

    return BigramTable(
        pairs=dict(sorted(pairs.items())),
        unigrams=dict(sorted(unigrams.items())),
        first=dict(sorted(first.items())),
        second=dict(sorted(second.items())),
        N=sum(pairs.values()),
        T=n,
    )
