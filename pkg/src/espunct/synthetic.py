"""Synthetic corpus generators for tests, benchmarks, and demos.

Three families live here: arbitrary valid utterances for round-trip and
repair properties, a rule corpus whose labels follow deterministically
from lexical cues (so a working tagger must score near-perfect), and a
bilingual benchmark with an engineered domain shift for the transfer
experiments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import (
    CLOSER_FOR,
    FULL_FOR,
    Kind,
    LabeledUtterance,
    OPENER_FOR,
    PunctClass,
    RawUtterance,
    render,
)

# --- arbitrary valid utterances -------------------------------------------

_TOKEN_ALPHABET = "abcdefghijklmnopqrstuvwxyzáéíóúñü"


def random_token(rng: random.Random) -> str:
    """A single valid token: word, number with decimal comma or point,
    occasionally capitalized, hyphen-suffixed, or with an inner
    apostrophe."""
    draw = rng.random()
    if draw < 0.05:
        return f"{rng.randint(0, 99)},{rng.randint(0, 9)}"
    if draw < 0.09:
        return f"{rng.randint(0, 9)}.{rng.randint(0, 99)}"
    word = "".join(
        rng.choice(_TOKEN_ALPHABET) for _ in range(rng.randint(1, 10))
    )
    style = rng.random()
    if style < 0.08:
        word = word[0].upper() + word[1:]
    elif style < 0.11:
        word = word.upper()
    if len(word) >= 3 and rng.random() < 0.04:
        word = word[:2] + "'" + word[2:]
    if rng.random() < 0.04:
        word += "-"
    return word


def random_valid_labels(rng: random.Random, n: int) -> list[PunctClass]:
    """A label sequence of length n that passes pairing validation.

    All nine classes occur with positive probability once n allows them.
    """
    labels: list[PunctClass] = []
    pending: Kind | None = None
    for i in range(n):
        last = i == n - 1
        if pending is not None and last:
            labels.append(CLOSER_FOR[pending])
            pending = None
            continue
        if pending is not None:
            choices = [
                PunctClass.NONE,
                CLOSER_FOR[pending],
                PunctClass.COMMA,
                PunctClass.PERIOD,
                PunctClass.FULL_QUESTION,
                PunctClass.FULL_EXCLAMATION,
            ]
            weights = [40, 35, 5, 5, 2, 2]
        else:
            choices = [
                PunctClass.NONE,
                PunctClass.COMMA,
                PunctClass.PERIOD,
                PunctClass.FULL_QUESTION,
                PunctClass.FULL_EXCLAMATION,
                PunctClass.OPEN_QUESTION,
                PunctClass.OPEN_EXCLAMATION,
            ]
            weights = [50, 10, 12, 3, 3, 0 if last else 6, 0 if last else 6]
        lab = rng.choices(choices, weights=weights)[0]
        if lab.is_opening:
            pending = lab.kind
        elif lab.is_closing:
            pending = None
        labels.append(lab)
    return labels


def random_labeled_utterance(
    rng: random.Random, max_tokens: int = 12
) -> LabeledUtterance:
    """An arbitrary valid LabeledUtterance for property tests."""
    n = rng.randint(1, max_tokens)
    return LabeledUtterance(
        tuple(random_token(rng) for _ in range(n)),
        tuple(random_valid_labels(rng, n)),
    )


def random_label_sequence(rng: random.Random, n: int) -> list[PunctClass]:
    """Unconstrained labels, usually failing pairing validation."""
    classes = list(PunctClass)
    return [rng.choice(classes) for _ in range(n)]


def random_english_labels(rng: random.Random, n: int) -> list[PunctClass]:
    """Close-only convention labels, as English data carries them."""
    choices = [
        PunctClass.NONE,
        PunctClass.COMMA,
        PunctClass.PERIOD,
        PunctClass.CLOSE_QUESTION,
        PunctClass.CLOSE_EXCLAMATION,
    ]
    weights = [55, 12, 15, 12, 6]
    return list(rng.choices(choices, weights=weights, k=n))


# --- rule corpus: labels decidable from local lexical cues ----------------

_RULE_STARTERS = ("bueno", "mire", "vale", "entonces", "pues", "oiga")
_RULE_FILLERS = (
    "necesito",
    "ayuda",
    "cuenta",
    "factura",
    "servicio",
    "problema",
    "sistema",
    "acceso",
    "clave",
    "correo",
    "tengo",
    "quería",
    "revisar",
    "cambiar",
    "pago",
    "María",
    "Juan",
)
_RULE_QWORDS = ("qué", "cómo", "dónde", "cuándo", "cuál")
_RULE_QFILLS = ("puedo", "hacer", "funciona", "cuesta", "tarda", "pasa")
_RULE_EWORDS = ("genial", "increíble", "gracias", "caramba", "madre")
_RULE_EFILLS = ("mía", "total", "santa")


def _rule_sentence(
    rng: random.Random, first: bool
) -> tuple[list[str], list[PunctClass]]:
    # Cue words never leak across roles: starters only open statements,
    # question/exclamation words only open their sentence type, so every
    # label is decidable from the token, its right neighbor, and
    # utterance end.
    draw = rng.random()
    if draw < 0.60:
        tokens: list[str] = []
        labels: list[PunctClass] = []
        if not first or rng.random() < 0.5:
            tokens.append(rng.choice(_RULE_STARTERS))
            labels.append(PunctClass.COMMA)
        body = [rng.choice(_RULE_FILLERS) for _ in range(rng.randint(2, 5))]
        if rng.random() < 0.08:
            # Numbers stay off the final slot so PERIOD keeps its cue.
            body.insert(
                rng.randrange(len(body)),
                f"{rng.randint(1, 99)},{rng.randint(0, 9)}",
            )
        tokens.extend(body)
        labels.extend([PunctClass.NONE] * (len(body) - 1))
        labels.append(PunctClass.PERIOD)
        return tokens, labels
    if draw < 0.85:
        head, fills, kind = _RULE_QWORDS, _RULE_QFILLS, Kind.QUESTION
        body_max = 3
    else:
        head, fills, kind = _RULE_EWORDS, _RULE_EFILLS, Kind.EXCLAMATION
        body_max = 2
    tokens = [rng.choice(head)]
    body_len = rng.randint(0, body_max)
    if body_len == 0:
        return tokens, [FULL_FOR[kind]]
    tokens.extend(rng.choice(fills) for _ in range(body_len))
    labels = [OPENER_FOR[kind]]
    labels.extend([PunctClass.NONE] * (body_len - 1))
    labels.append(CLOSER_FOR[kind])
    return tokens, labels


def rule_corpus(n: int, seed: int) -> list[LabeledUtterance]:
    """n utterances whose punctuation follows deterministic lexical rules."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        sentences = rng.choices((1, 2, 3), weights=(45, 35, 20))[0]
        tokens: list[str] = []
        labels: list[PunctClass] = []
        for s in range(sentences):
            t, l = _rule_sentence(rng, first=s == 0)
            tokens.extend(t)
            labels.extend(l)
        out.append(
            LabeledUtterance(tuple(tokens), tuple(labels), source="rule", lang="es")
        )
    return out


# --- bilingual transfer benchmark -----------------------------------------

# Surface forms shared by both languages.  The helpful patterns (final
# tag-question "no", standalone exclamations) are frequent in English
# and in the Spanish test traffic but absent from the small Spanish
# training sample; the conflict tokens are mid-sentence filler in
# Spanish but sentence-final with PERIOD in English, so English-last
# training actively corrupts them.
_SHARED_TAGQ = "no"
_SHARED_EXCL = ("perfecto", "genial")
_SHARED_CONFLICT = ("ya", "listo")
_SHARED_CONTEXT = "bien"

# Confirmation sign-offs end statements with PERIOD.  The out-of-domain
# single-sentence corpora only ever show them line-final, where end-of-
# line position cues soak up the credit; the test traffic uses them
# mid-utterance too, so only concatenation-augmented data teaches the
# geometry that matters.
_CONFIRM_WORDS = ("correcto", "exacto")

_ES_STARTERS = ("bueno", "mire", "oiga", "vale")
_ES_FILLERS = (
    "necesito",
    "cuenta",
    "factura",
    "servicio",
    "sistema",
    "funciona",
    "acceso",
    "pago",
    "quería",
    "revisar",
)
_ES_QWORDS = ("qué", "cómo", "cuándo")
_ES_QFILLS = ("puedo", "hacer", "pasa", "tarda")

_EN_STARTERS = ("well", "okay", "so", "look")
_EN_FILLERS = (
    "account",
    "billing",
    "password",
    "signal",
    "issue",
    "working",
    "update",
    "charge",
)
_EN_QWORDS = ("what", "how", "when")
_EN_QFILLS = ("happens", "works", "costs", "helps")

_LDC_EXTRA = ("documento", "numero", "tarjeta", "oficina", "fecha")
_OS_EXTRA = ("película", "escena", "amigo", "noche", "casa")
_ALIEN_WORDS = (
    "dragón",
    "espada",
    "reino",
    "batalla",
    "castillo",
    "sangre",
    "rey",
    "trono",
)


@dataclass(frozen=True)
class TransferBenchmark:
    """Corpora for the cross-lingual and domain-adaptation experiments.

    os_pool is raw punctuated text (selection input); everything else is
    labeled.  en uses close-only English conventions and needs
    conversion before training.
    """

    es_train: list[LabeledUtterance]
    es_test: list[LabeledUtterance]
    ldc: list[LabeledUtterance]
    os_pool: list[RawUtterance]
    en: list[LabeledUtterance]


def _es_statement(
    rng: random.Random,
    first: bool,
    conflict_p: float,
    negation_p: float,
    confirm_p: float,
) -> tuple[list[str], list[PunctClass]]:
    tokens: list[str] = []
    if rng.random() < (0.5 if first else 0.30):
        tokens.append(rng.choice(_ES_STARTERS))
    starter_n = len(tokens)
    body = [rng.choice(_ES_FILLERS) for _ in range(rng.randint(2, 4))]
    if rng.random() < conflict_p:
        # "bien ya" sits mid-sentence, both tokens NONE.
        at = rng.randrange(len(body))
        body[at:at] = [_SHARED_CONTEXT, rng.choice(_SHARED_CONFLICT)]
    if rng.random() < negation_p:
        # Plain negation "no", never sentence-final.
        body.insert(rng.randrange(len(body)), _SHARED_TAGQ)
    if rng.random() < confirm_p:
        # Confirmation sign-off carries the period.
        body.append(rng.choice(_CONFIRM_WORDS))
    tokens.extend(body)
    labels = [PunctClass.COMMA] * starter_n
    labels.extend([PunctClass.NONE] * (len(body) - 1))
    labels.append(PunctClass.PERIOD)
    return tokens, labels


def _es_question(rng: random.Random) -> tuple[list[str], list[PunctClass]]:
    body_len = rng.randint(1, 3)
    tokens = [rng.choice(_ES_QWORDS)]
    tokens.extend(rng.choice(_ES_QFILLS) for _ in range(body_len))
    labels = [PunctClass.OPEN_QUESTION]
    labels.extend([PunctClass.NONE] * (body_len - 1))
    labels.append(PunctClass.CLOSE_QUESTION)
    return tokens, labels


def _es_utterance(
    rng: random.Random,
    *,
    tagq_p: float,
    excl_p: float,
    conflict_p: float,
    negation_p: float,
    confirm_p: float,
    source: str,
) -> LabeledUtterance:
    sentences = rng.choices((1, 2, 3), weights=(30, 45, 25))[0]
    tokens: list[str] = []
    labels: list[PunctClass] = []
    if rng.random() < excl_p:
        tokens.append(rng.choice(_SHARED_EXCL))
        labels.append(PunctClass.FULL_EXCLAMATION)
    for _ in range(sentences):
        if rng.random() < 0.65:
            t, l = _es_statement(rng, not tokens, conflict_p, negation_p, confirm_p)
        else:
            t, l = _es_question(rng)
        tokens.extend(t)
        labels.extend(l)
    if (
        labels[-1] is PunctClass.PERIOD
        and tokens[-1] not in _CONFIRM_WORDS
        and rng.random() < tagq_p
    ):
        # Tag question: the closing statement ends ", no?" instead of ".".
        labels[-1] = PunctClass.COMMA
        tokens.append(_SHARED_TAGQ)
        labels.append(PunctClass.FULL_QUESTION)
    return LabeledUtterance(tuple(tokens), tuple(labels), source=source, lang="es")


def _en_utterance(
    rng: random.Random, *, tagq_p: float, excl_p: float, conflict_p: float
) -> LabeledUtterance:
    sentences = rng.choices((1, 2), weights=(50, 50))[0]
    tokens: list[str] = []
    labels: list[PunctClass] = []
    if rng.random() < excl_p:
        tokens.append(rng.choice(_SHARED_EXCL))
        labels.append(PunctClass.CLOSE_EXCLAMATION)
    for _ in range(sentences):
        if rng.random() < 0.6:
            if not tokens or rng.random() < 0.7:
                tokens.append(rng.choice(_EN_STARTERS))
                labels.append(PunctClass.COMMA)
            body = [rng.choice(_EN_FILLERS) for _ in range(rng.randint(2, 4))]
            tokens.extend(body)
            labels.extend([PunctClass.NONE] * (len(body) - 1))
            labels.append(PunctClass.PERIOD)
            if rng.random() < conflict_p:
                # Sentence-final "bien ya." is idiomatic here, the same
                # surface the Spanish side uses mid-sentence; more words
                # always follow so the period cannot ride on end-of-line
                # position cues.
                tokens.extend([_SHARED_CONTEXT, rng.choice(_SHARED_CONFLICT)])
                labels.extend([PunctClass.NONE, PunctClass.PERIOD])
                tail = [rng.choice(_EN_FILLERS) for _ in range(rng.randint(2, 3))]
                tokens.extend(tail)
                labels.extend([PunctClass.NONE] * (len(tail) - 1))
                labels.append(PunctClass.PERIOD)
        else:
            body_len = rng.randint(1, 3)
            tokens.append(rng.choice(_EN_QWORDS))
            tokens.extend(rng.choice(_EN_QFILLS) for _ in range(body_len))
            labels.extend([PunctClass.NONE] * body_len)
            labels.append(PunctClass.CLOSE_QUESTION)
    if labels[-1] is PunctClass.PERIOD and rng.random() < tagq_p:
        labels[-1] = PunctClass.COMMA
        tokens.append(_SHARED_TAGQ)
        labels.append(PunctClass.CLOSE_QUESTION)
    return LabeledUtterance(tuple(tokens), tuple(labels), source="en", lang="en")


def _single_sentence(
    rng: random.Random, extra: tuple[str, ...], source: str
) -> LabeledUtterance:
    # Every sentence takes at least one word from the source-exclusive
    # extra vocabulary, so these lines never coincide with in-domain
    # utterances and the pipeline leakage check stays quiet.
    if rng.random() < 0.7:
        tokens = []
        if rng.random() < 0.5:
            tokens.append(rng.choice(_ES_STARTERS))
        starter_n = len(tokens)
        body = [rng.choice(_ES_FILLERS) for _ in range(rng.randint(2, 5))]
        body.insert(rng.randrange(len(body)), rng.choice(extra))
        if rng.random() < 0.4:
            body.append(rng.choice(_CONFIRM_WORDS))
        tokens.extend(body)
        labels = [PunctClass.COMMA] * starter_n
        labels.extend([PunctClass.NONE] * (len(body) - 1))
        labels.append(PunctClass.PERIOD)
    else:
        tokens = [rng.choice(_ES_QWORDS)]
        tokens.extend(rng.choice(_ES_QFILLS) for _ in range(rng.randint(1, 2)))
        tokens.append(rng.choice(extra))
        labels = [PunctClass.OPEN_QUESTION]
        labels.extend([PunctClass.NONE] * (len(tokens) - 2))
        labels.append(PunctClass.CLOSE_QUESTION)
    return LabeledUtterance(tuple(tokens), tuple(labels), source=source, lang="es")


def _alien_sentence(rng: random.Random) -> LabeledUtterance:
    # Subtitle-register noise: unknown vocabulary, and an in-domain
    # starter word abused as the exclamation-final token, so training on
    # it corrupts the starter cue.  Selection is supposed to filter it.
    tokens = [rng.choice(_ALIEN_WORDS) for _ in range(rng.randint(2, 5))]
    tokens.append(rng.choice(_ES_STARTERS))
    labels = [PunctClass.OPEN_EXCLAMATION]
    labels.extend([PunctClass.NONE] * (len(tokens) - 2))
    labels.append(PunctClass.CLOSE_EXCLAMATION)
    return LabeledUtterance(tuple(tokens), tuple(labels), source="os-alien", lang="es")


def transfer_benchmark(
    seed: int,
    *,
    es_train_size: int = 300,
    es_test_size: int = 400,
    ldc_size: int = 1200,
    pool_good: int = 800,
    pool_alien: int = 1600,
    en_size: int = 2000,
) -> TransferBenchmark:
    """Build the benchmark corpora; one seed fixes everything."""
    rng = random.Random(seed)
    es_train = [
        _es_utterance(rng, tagq_p=0.0, excl_p=0.0, conflict_p=0.35,
                      negation_p=0.25, confirm_p=0.0, source="indomain")
        for _ in range(es_train_size)
    ]
    es_test = [
        _es_utterance(rng, tagq_p=0.30, excl_p=0.12, conflict_p=0.35,
                      negation_p=0.25, confirm_p=0.55, source="indomain")
        for _ in range(es_test_size)
    ]
    ldc = [
        _single_sentence(rng, _LDC_EXTRA, "ldc") for _ in range(ldc_size)
    ]
    pool_labeled = [
        _single_sentence(rng, _OS_EXTRA, "os-good") for _ in range(pool_good)
    ]
    pool_labeled.extend(_alien_sentence(rng) for _ in range(pool_alien))
    rng.shuffle(pool_labeled)
    os_pool = [
        RawUtterance(render(u), source=u.source, lang="es") for u in pool_labeled
    ]
    en = [
        _en_utterance(rng, tagq_p=0.30, excl_p=0.12, conflict_p=0.50)
        for _ in range(en_size)
    ]
    return TransferBenchmark(
        es_train=es_train, es_test=es_test, ldc=ldc, os_pool=os_pool, en=en
    )
