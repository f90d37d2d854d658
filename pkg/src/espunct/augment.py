"""Distribution-matching concatenation augmentation.

Out-of-domain utterances are mostly single sentences; conversational
test traffic is not.  This module concatenates utterances so the
augmented corpus matches a target histogram of sentence terminators per
utterance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import LabeledUtterance, terminal_count
from .errors import EmptyCorpus, IoFailure, ZeroTerminalSource

_MASS_TOLERANCE = 1e-9
# Draws are dealt in decks of this size once the initial estimate runs out.
_REFILL_DECK = 64


@dataclass(frozen=True)
class TerminalHistogram:
    """Distribution over terminators-per-utterance.

    buckets maps a terminator count to its probability mass; sample_size
    records how many utterances the estimate came from (0 for a target
    written by hand).
    """

    buckets: Mapping[int, float]
    sample_size: int = 0

    def __post_init__(self):
        cleaned: dict[int, float] = {}
        for key, mass in self.buckets.items():
            if not isinstance(key, int) or key < 0:
                raise ValueError(f"bad bucket {key!r}")
            if mass < 0:
                raise ValueError(f"negative mass for bucket {key}")
            if mass > 0:
                cleaned[key] = mass
        if abs(sum(cleaned.values()) - 1.0) > _MASS_TOLERANCE:
            raise ValueError("bucket masses do not sum to 1")
        object.__setattr__(self, "buckets", dict(sorted(cleaned.items())))

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "TerminalHistogram":
        tally: dict[int, int] = {}
        total = 0
        for c in counts:
            tally[c] = tally.get(c, 0) + 1
            total += 1
        if total == 0:
            raise EmptyCorpus("no counts to build a histogram from")
        return cls({k: n / total for k, n in tally.items()}, sample_size=total)

    def mass(self, count: int) -> float:
        return self.buckets.get(count, 0.0)

    @property
    def mean(self) -> float:
        return sum(k * p for k, p in self.buckets.items())


def histogram(corpus: Sequence[LabeledUtterance]) -> TerminalHistogram:
    """Observed terminators-per-utterance distribution of a corpus."""
    if not corpus:
        raise EmptyCorpus("cannot build a histogram from no utterances")
    return TerminalHistogram.from_counts(terminal_count(u) for u in corpus)


def distribution_distance(a: TerminalHistogram, b: TerminalHistogram) -> float:
    """L1 distance between two histograms over the union of buckets."""
    keys = set(a.buckets) | set(b.buckets)
    return sum(abs(a.mass(k) - b.mass(k)) for k in keys)


def _quota_deck(target: TerminalHistogram, n: int, rng: random.Random) -> list[int]:
    """n target draws apportioned by largest remainder, then shuffled.

    Dealing from an apportioned deck instead of sampling iid keeps the
    realized draw histogram within O(1/n) of the target, which row-level
    L1 budgets require; iid draws wander like 1/sqrt(n).
    """
    keys = sorted(target.buckets)
    exact = {k: target.buckets[k] * n for k in keys}
    base = {k: int(exact[k]) for k in keys}
    shortfall = n - sum(base.values())
    by_remainder = sorted(keys, key=lambda k: (-(exact[k] - base[k]), k))
    for k in by_remainder[:shortfall]:
        base[k] += 1
    deck = [k for k in keys for _ in range(base[k])]
    rng.shuffle(deck)
    return deck


def _concat(group: Sequence[LabeledUtterance]) -> LabeledUtterance:
    if len(group) == 1:
        return group[0]
    tokens: list[str] = []
    labels = []
    for u in group:
        tokens.extend(u.tokens)
        labels.extend(u.labels)
    sources = {u.source for u in group}
    langs = {u.lang for u in group}
    return LabeledUtterance(
        tuple(tokens),
        tuple(labels),
        source=sources.pop() if len(sources) == 1 else None,
        lang=langs.pop() if len(langs) == 1 else None,
    )


def augment_to_distribution(
    source: Sequence[LabeledUtterance],
    target: TerminalHistogram,
    seed: int,
    max_tokens: int = 200,
) -> list[LabeledUtterance]:
    """Concatenate source utterances until each group's terminator count
    reaches a drawn target, consuming every utterance exactly once.

    A group stops growing early rather than exceed max_tokens, unless it
    is still empty (one oversized utterance passes through alone).  The
    tail of the source that cannot fill its final draw is emitted as is.
    """
    if not source:
        return []
    for u in source:
        if terminal_count(u) == 0:
            raise ZeroTerminalSource(
                f"utterance {u.tokens[:3]}... has no terminating label"
            )
    if target.mass(0) > 0:
        raise ValueError("target gives mass to zero terminators")
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")

    rng = random.Random(seed)
    shuffled = list(source)
    rng.shuffle(shuffled)

    total_terminals = sum(terminal_count(u) for u in shuffled)
    estimate = max(1, round(total_terminals / target.mean))
    deck = _quota_deck(target, estimate, rng)
    dealt = 0

    out: list[LabeledUtterance] = []
    idx = 0
    while idx < len(shuffled):
        if dealt == len(deck):
            deck = _quota_deck(target, _REFILL_DECK, rng)
            dealt = 0
        want = deck[dealt]
        dealt += 1
        group: list[LabeledUtterance] = []
        terms = 0
        size = 0
        while idx < len(shuffled) and terms < want:
            u = shuffled[idx]
            if group and size + len(u.tokens) > max_tokens:
                break
            group.append(u)
            idx += 1
            terms += terminal_count(u)
            size += len(u.tokens)
        out.append(_concat(group))
    return out


def write_histogram_report(
    target: TerminalHistogram,
    before: TerminalHistogram,
    after: TerminalHistogram,
    path,
) -> None:
    """TSV of per-bucket probability mass: target vs source vs augmented."""
    keys = sorted(set(target.buckets) | set(before.buckets) | set(after.buckets))
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("terminals\ttarget\tbefore\tafter\n")
            for k in keys:
                fh.write(
                    f"{k}\t{target.mass(k):.9g}\t{before.mass(k):.9g}"
                    f"\t{after.mass(k):.9g}\n"
                )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
