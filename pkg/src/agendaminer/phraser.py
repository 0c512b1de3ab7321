"""Bigram/trigram phrase learning and token-stream rewriting.

Adjacent pairs that co-occur far more often than chance become single
underscore-joined vocabulary items. A second pass over the rewritten
stream lets trigrams form as bigram+unigram merges.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, ParseError

JOIN_CHAR = "_"
DEFAULT_MIN_PAIR_COUNT = 15
DEFAULT_SCORE_THRESHOLD = 10.0


def merge_token(a: str, b: str) -> str:
    return a + JOIN_CHAR + b


@dataclass
class PhraseTable:
    """Per-pass merge maps: (token, token) -> score.

    Pass 1 holds bigram merges over raw tokens; pass 2 holds merges whose
    left component may itself be a pass-1 phrase. Components never contain
    the join character, so every merged token splits back losslessly.
    """

    passes: list[dict[tuple[str, str], float]]
    min_pair_count: int | None = None
    score_threshold: float | None = None

    @property
    def pass_count(self) -> int:
        return len(self.passes)

    def __len__(self) -> int:
        return sum(len(p) for p in self.passes)

    def save(self, path: str | Path) -> None:
        """One merge per line: "token_a token_b score", pass 1 first."""
        with open(path, "w", encoding="utf-8") as fh:
            for merges in self.passes:
                for (a, b), score in sorted(merges.items()):
                    fh.write(f"{a} {b} {score!r}\n")

    @classmethod
    def load(cls, path: str | Path) -> "PhraseTable":
        passes: list[dict[tuple[str, str], float]] = [{}, {}]
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                parts = line.split()
                if len(parts) != 3:
                    raise ParseError("expected 'token_a token_b score'", lineno)
                a, b, raw = parts
                try:
                    score = float(raw)
                except ValueError as exc:
                    raise ParseError(f"bad score {raw!r}", lineno) from exc
                level = 1 if (JOIN_CHAR in a or JOIN_CHAR in b) else 0
                passes[level][(a, b)] = score
        if not passes[1]:
            passes.pop()
        return cls(passes=passes)


def learn_phrases(
    streams: Iterable[Sequence[str]],
    min_pair_count: int = DEFAULT_MIN_PAIR_COUNT,
    score_threshold: float = DEFAULT_SCORE_THRESHOLD,
    passes: int = 2,
) -> PhraseTable:
    """Learn merges where score = (count(ab) - min) * V / (count(a)count(b)).

    V is the number of distinct tokens at the current pass. Only pairs with
    count(ab) >= min_pair_count and score > score_threshold are merged.
    """
    if passes not in (1, 2):
        raise ConfigError(f"passes must be 1 or 2, got {passes}")
    if min_pair_count < 1:
        raise ConfigError(f"min_pair_count must be >= 1, got {min_pair_count}")

    materialized = [list(s) for s in streams]
    table = PhraseTable(passes=[], min_pair_count=min_pair_count, score_threshold=score_threshold)
    for _ in range(passes):
        unigrams: Counter[str] = Counter()
        pairs: Counter[tuple[str, str]] = Counter()
        for tokens in materialized:
            unigrams.update(tokens)
            pairs.update(zip(tokens, tokens[1:]))
        vocab_size = len(unigrams)
        merges: dict[tuple[str, str], float] = {}
        for (a, b), n_ab in pairs.items():
            if n_ab < min_pair_count:
                continue
            score = (n_ab - min_pair_count) * vocab_size / (unigrams[a] * unigrams[b])
            if score > score_threshold:
                merges[(a, b)] = score
        table.passes.append(merges)
        materialized = [_rewrite(tokens, merges) for tokens in materialized]
    return table


def _rewrite(tokens: Sequence[str], merges: dict[tuple[str, str], float]) -> list[str]:
    """Greedy left-to-right single-pass merge."""
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        if i + 1 < n and (tokens[i], tokens[i + 1]) in merges:
            out.append(merge_token(tokens[i], tokens[i + 1]))
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return out


def apply(table: PhraseTable, tokens: Sequence[str]) -> list[str]:
    """Rewrite one token list through every learned pass."""
    out = list(tokens)
    for merges in table.passes:
        out = _rewrite(out, merges)
    return out


def apply_all(table: PhraseTable, streams: Iterable[Sequence[str]]) -> list[list[str]]:
    return [apply(table, tokens) for tokens in streams]


def split_phrase(token: str) -> list[str]:
    """Recover the constituent tokens of a merged phrase."""
    return token.split(JOIN_CHAR)
