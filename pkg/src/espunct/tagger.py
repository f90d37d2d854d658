"""Averaged-perceptron punctuation tagger with greedy decoding.

The decoder runs left to right and feeds its own previous prediction
back in as a feature, so training updates on decode-time features rather
than gold history.  Weights are averaged over every utterance-level
snapshot, which is what makes the otherwise twitchy perceptron stable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence

from .corpus import LabeledUtterance, PunctClass
from .errors import (
    EmptyCorpus,
    IoFailure,
    LabelSetMismatch,
    MissingEnglishData,
    ModelLoadError,
    TargetTooSmall,
)

MODEL_FORMAT_VERSION = 1

DEFAULT_LABEL_SET: tuple[str, ...] = tuple(c.name for c in PunctClass)

FEATURE_TEMPLATES: tuple[str, ...] = (
    "w-2",
    "w-1",
    "w0",
    "w+1",
    "w+2",
    "pre1",
    "pre2",
    "pre3",
    "suf1",
    "suf2",
    "suf3",
    "first",
    "last",
    "prev",
    "shape",
    "wb-1",
    "wb+1",
)

_BOS_WORD = "<s>"
_EOS_WORD = "</s>"
_BOS_LABEL = "<start>"


def _word_shape(token: str) -> str:
    """Collapsed character-class sketch: Xx for "Hola", d,d for "3,5"."""
    out = []
    for ch in token:
        if ch.isupper():
            cls = "X"
        elif ch.islower():
            cls = "x"
        elif ch.isdigit():
            cls = "d"
        else:
            cls = ch if ch in ",.-" else "o"
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def _feature_list(
    tokens: Sequence[str],
    i: int,
    prev_label: str,
    lowered: Sequence[str],
) -> list[str]:
    """Feature strings for position i, in fixed template order.

    The fixed order matters: training and scoring must sum weights in
    the same sequence for runs to be bit-for-bit reproducible.
    """
    n = len(tokens)

    def word(j: int) -> str:
        if j < 0:
            return _BOS_WORD
        if j >= n:
            return _EOS_WORD
        return lowered[j]

    w = lowered[i]
    feats = [
        "w-2=" + word(i - 2),
        "w-1=" + word(i - 1),
        "w0=" + w,
        "w+1=" + word(i + 1),
        "w+2=" + word(i + 2),
    ]
    for length in (1, 2, 3):
        if length <= len(w):
            feats.append(f"pre{length}=" + w[:length])
            feats.append(f"suf{length}=" + w[-length:])
    if i == 0:
        feats.append("first")
    if i == n - 1:
        feats.append("last")
    feats.append("prev=" + prev_label)
    feats.append("shape=" + _word_shape(tokens[i]))
    feats.append("wb-1=" + word(i - 1) + "|" + w)
    feats.append("wb+1=" + w + "|" + word(i + 1))
    return feats


def featurize(tokens: Sequence[str], i: int, prev_label: str) -> set[str]:
    """Feature set for position i given the previously predicted label."""
    lowered = [t.lower() for t in tokens]
    return set(_feature_list(tokens, i, prev_label, lowered))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class TaggerModel:
    """Trained tagger: label inventory, feature templates, sparse weights.

    weights maps feature string -> {label index -> weight}; indices point
    into label_set.  training_log records each training phase in order.
    """

    label_set: tuple[str, ...] = DEFAULT_LABEL_SET
    feature_templates: tuple[str, ...] = FEATURE_TEMPLATES
    weights: dict[str, dict[int, float]] = field(default_factory=dict)
    training_log: list[dict] = field(default_factory=list)
    format_version: int = MODEL_FORMAT_VERSION

    def predict(self, tokens: Sequence[str]) -> list[PunctClass]:
        """Greedy left-to-right decode; ties go to the earliest label."""
        if not tokens:
            raise ValueError("cannot predict on an empty token list")
        nlabels = len(self.label_set)
        lowered = [t.lower() for t in tokens]
        prev = _BOS_LABEL
        out = []
        for i in range(len(tokens)):
            feats = _feature_list(tokens, i, prev, lowered)
            scores = [0.0] * nlabels
            for f in feats:
                row = self.weights.get(f)
                if row:
                    for li, w in row.items():
                        scores[li] += w
            best = 0
            for li in range(1, nlabels):
                if scores[li] > scores[best]:
                    best = li
            prev = self.label_set[best]
            out.append(PunctClass[prev])
        return out

    def to_json_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "label_set": list(self.label_set),
            "feature_templates": list(self.feature_templates),
            "weights": {
                f: {self.label_set[li]: w for li, w in sorted(row.items())}
                for f, row in self.weights.items()
            },
            "training_log": self.training_log,
        }

    def save(self, path: str | Path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_json_dict(), fh, ensure_ascii=False, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TaggerModel":
        if not isinstance(obj, dict):
            raise ModelLoadError("model file does not hold a JSON object")
        version = obj.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ModelLoadError(
                f"model format {version!r} is not supported (want {MODEL_FORMAT_VERSION})"
            )
        try:
            label_set = tuple(obj["label_set"])
            index = {name: li for li, name in enumerate(label_set)}
            weights: dict[str, dict[int, float]] = {}
            for f, row in obj["weights"].items():
                weights[f] = {index[name]: float(w) for name, w in row.items()}
            return cls(
                label_set=label_set,
                feature_templates=tuple(obj["feature_templates"]),
                weights=weights,
                training_log=list(obj["training_log"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelLoadError(f"model file is malformed: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "TaggerModel":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ModelLoadError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ModelLoadError(f"model file is not JSON: {exc}") from exc
        return cls.from_json_dict(obj)


def _copy_weights(weights: dict[str, dict[int, float]]) -> dict[str, dict[int, float]]:
    return {f: dict(row) for f, row in weights.items()}


class _Averager:
    """Weight averaging via totals and timestamps.

    Snapshots conceptually happen after every utterance; instead of
    materializing them, each weight accumulates value * ticks-held
    lazily on change and once more at flush.
    """

    def __init__(self, weights: dict[str, dict[int, float]]):
        self.weights = weights
        self._totals: dict[str, dict[int, float]] = {}
        self._stamps: dict[str, dict[int, int]] = {}

    def update(self, feature: str, li: int, delta: float, tick: int) -> None:
        row = self.weights.setdefault(feature, {})
        trow = self._totals.setdefault(feature, {})
        srow = self._stamps.setdefault(feature, {})
        value = row.get(li, 0.0)
        trow[li] = trow.get(li, 0.0) + (tick - 1 - srow.get(li, 0)) * value
        srow[li] = tick - 1
        row[li] = value + delta

    def averaged(self, ticks: int) -> dict[str, dict[int, float]]:
        out: dict[str, dict[int, float]] = {}
        for f, row in self.weights.items():
            trow = self._totals.get(f, {})
            srow = self._stamps.get(f, {})
            arow = {}
            for li, value in row.items():
                if li in srow:
                    avg = (trow[li] + (ticks - srow[li]) * value) / ticks
                else:
                    # Never updated this phase: the average of a constant
                    # is the constant, bit for bit.
                    avg = value
                if avg != 0.0:
                    arow[li] = avg
            if arow:
                out[f] = arow
        return out


def _run_phase(
    initial: dict[str, dict[int, float]],
    corpus: Sequence[LabeledUtterance],
    label_set: Sequence[str],
    config: TrainConfig,
) -> dict[str, dict[int, float]]:
    """One training phase; returns averaged weights."""
    index = {name: li for li, name in enumerate(label_set)}
    nlabels = len(label_set)
    avg = _Averager(_copy_weights(initial))
    weights = avg.weights
    rng = random.Random(config.seed)
    order = list(range(len(corpus)))
    tick = 0
    for _ in range(config.epochs):
        if config.shuffle:
            rng.shuffle(order)
        for ci in order:
            u = corpus[ci]
            tick += 1
            lowered = [t.lower() for t in u.tokens]
            prev = _BOS_LABEL
            for i in range(len(u.tokens)):
                feats = _feature_list(u.tokens, i, prev, lowered)
                scores = [0.0] * nlabels
                for f in feats:
                    row = weights.get(f)
                    if row:
                        for li, w in row.items():
                            scores[li] += w
                guess = 0
                for li in range(1, nlabels):
                    if scores[li] > scores[guess]:
                        guess = li
                gold = index[u.labels[i].name]
                if guess != gold:
                    for f in feats:
                        avg.update(f, gold, 1.0, tick)
                        avg.update(f, guess, -1.0, tick)
                # The decoder sees its own mistakes at train time too.
                prev = label_set[guess]
    return avg.averaged(tick)


def _check_labels(corpus: Sequence[LabeledUtterance], label_set: Sequence[str]) -> None:
    known = set(label_set)
    for u in corpus:
        for lab in u.labels:
            if lab.name not in known:
                raise LabelSetMismatch(
                    f"label {lab.name} is outside the model label set"
                )


def train(
    corpus: Sequence[LabeledUtterance],
    config: TrainConfig = TrainConfig(),
    data_tag: str = "train",
) -> TaggerModel:
    """Train a fresh model from zero weights."""
    if not corpus:
        raise EmptyCorpus("cannot train on no utterances")
    weights = _run_phase({}, corpus, DEFAULT_LABEL_SET, config)
    log_entry = {
        "data": data_tag,
        "epochs": config.epochs,
        "seed": config.seed,
        "size": len(corpus),
    }
    return TaggerModel(weights=weights, training_log=[log_entry])


def continue_train(
    model: TaggerModel,
    corpus: Sequence[LabeledUtterance],
    config: TrainConfig = TrainConfig(),
    data_tag: str = "continue",
) -> TaggerModel:
    """Further training from a trained model's weights.

    Returns a new model; the input model is untouched.  Weights never
    updated by the new data keep their old values exactly.
    """
    if not corpus:
        raise EmptyCorpus("cannot continue training on no utterances")
    _check_labels(corpus, model.label_set)
    weights = _run_phase(model.weights, corpus, model.label_set, config)
    log_entry = {
        "data": data_tag,
        "epochs": config.epochs,
        "seed": config.seed,
        "size": len(corpus),
    }
    return TaggerModel(
        label_set=model.label_set,
        feature_templates=model.feature_templates,
        weights=weights,
        training_log=model.training_log + [log_entry],
    )


def predict(model, tokens: Sequence[str]) -> list[PunctClass]:
    """Labels for a token list; works with any object that has .predict."""
    return model.predict(tokens)


class TaggerBackend(Protocol):
    """What run_strategy needs from a trainable tagger implementation."""

    def train(
        self, corpus: Sequence[LabeledUtterance], config: TrainConfig, data_tag: str
    ): ...

    def continue_train(
        self, model, corpus: Sequence[LabeledUtterance], config: TrainConfig, data_tag: str
    ): ...


class PerceptronBackend:
    """The built-in averaged perceptron as a strategy backend."""

    def train(self, corpus, config, data_tag):
        return train(corpus, config, data_tag)

    def continue_train(self, model, corpus, config, data_tag):
        return continue_train(model, corpus, config, data_tag)


class Strategy(str, Enum):
    ES_ONLY = "ES_ONLY"
    ES_THEN_EN = "ES_THEN_EN"
    EN_THEN_ES = "EN_THEN_ES"
    JOINT = "JOINT"


def run_strategy(
    strategy: Strategy,
    es_data: Sequence[LabeledUtterance],
    en_data: Sequence[LabeledUtterance] | None,
    config: TrainConfig = TrainConfig(),
    backend: TaggerBackend | None = None,
):
    """Train per one of the four data-ordering strategies.

    English data must already be converted to Spanish conventions.  For
    JOINT the two corpora are mixed and shuffled once with the config
    seed, then trained as a single phase.
    """
    strategy = Strategy(strategy)
    backend = backend if backend is not None else PerceptronBackend()
    if not es_data:
        raise EmptyCorpus("no Spanish training data")
    if strategy is not Strategy.ES_ONLY and not en_data:
        raise MissingEnglishData(f"strategy {strategy.value} needs English data")
    if strategy is Strategy.ES_ONLY:
        return backend.train(es_data, config, "es")
    if strategy is Strategy.ES_THEN_EN:
        model = backend.train(es_data, config, "es")
        return backend.continue_train(model, en_data, config, "en")
    if strategy is Strategy.EN_THEN_ES:
        model = backend.train(en_data, config, "en")
        return backend.continue_train(model, es_data, config, "es")
    mixed = list(es_data) + list(en_data)
    random.Random(config.seed).shuffle(mixed)
    return backend.train(mixed, config, "joint-es-en")


def oversample(
    corpus: Sequence[LabeledUtterance], target_size: int, seed: int
) -> list[LabeledUtterance]:
    """Grow a corpus to target_size by whole copies plus a seeded sample
    of the remainder, then shuffle.  Every utterance appears floor or
    ceil of target_size/len times."""
    if not corpus:
        raise EmptyCorpus("cannot oversample no utterances")
    if target_size < len(corpus):
        raise TargetTooSmall(
            f"target {target_size} is below the corpus size {len(corpus)}"
        )
    copies, extra = divmod(target_size, len(corpus))
    rng = random.Random(seed)
    out = list(corpus) * copies + rng.sample(list(corpus), extra)
    rng.shuffle(out)
    return out
