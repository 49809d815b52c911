"""Synthetic corpus generator with planted ground-truth rules.

The generator plants a handful of mutually non-subsuming conjunctive rules,
then emits frame-annotated sentences. A configurable share of sentences is
constructed to satisfy one planted rule; the rest are resampled until they
satisfy none, so the label concentrates on the planted structure. The label
of a sentence is defined as "satisfies at least one planted rule", computed
with the same predicate semantics the rest of the package uses, after which
symmetric label noise is applied.

Everything is driven by the portable PRNG: the same config and seed yield
byte-identical corpora, dictionaries, and planted rules on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    ACTION_LEMMA_ROLE,
    ARGUMENT_ROLES,
    ArgumentSpan,
    Corpus,
    Dictionary,
    DictionarySet,
    Sentence,
    SlsFrame,
    corpus_from_sentences,
    save_corpus,
    save_dictionaries,
)
from .predicates import Predicate, PredicateKind, evaluate_predicate
from .prng import PortableRng, mix64


class SynthesisError(RuntimeError):
    """Raised when no attempt produces a corpus meeting the guarantees."""


PROPERTY_ORDER = ("tense", "aspect", "mood", "modalclass", "voice", "polarity")

PROPERTY_VALUES: dict[str, tuple[str, ...]] = {
    "tense": ("past", "present", "future", "nonfinite"),
    "aspect": ("simple", "progressive", "perfect"),
    "mood": ("indicative", "imperative", "subjunctive", "conditional"),
    "modalclass": ("none", "ability", "obligation", "permission", "intention"),
    "voice": ("active", "passive"),
    "polarity": ("positive", "negative"),
}

# voice and polarity are binary, so planting them would make rule atoms too
# broad to separate from chance; they still vary freely in the data.
_PLANTABLE_PROPERTIES = ("tense", "aspect", "mood", "modalclass")

_DICT_TARGET_ROLES = (
    ACTION_LEMMA_ROLE,
    "agent",
    "theme",
    "object",
    "beneficiary",
    "context:locative",
)

_ROLE_WORD_PREFIX = {
    ACTION_LEMMA_ROLE: "verb",
    "agent": "agent",
    "theme": "theme",
    "object": "object",
    "beneficiary": "benef",
    "context:temporal": "time",
    "context:locative": "place",
    "manner": "manner",
}

_ROLE_INCLUDE_PROB = {
    "agent": 0.85,
    "theme": 0.7,
    "object": 0.5,
    "beneficiary": 0.3,
    "context:temporal": 0.35,
    "context:locative": 0.35,
    "manner": 0.3,
}


def _default_vocab_sizes() -> dict[str, int]:
    return {
        ACTION_LEMMA_ROLE: 30,
        "agent": 24,
        "theme": 24,
        "object": 24,
        "beneficiary": 16,
        "context:temporal": 12,
        "context:locative": 12,
        "manner": 12,
    }


@dataclass(frozen=True)
class SynthConfig:
    rng_seed: int = 0
    n_sentences: int = 2000
    n_planted_rules: int = 5
    planted_depth_min: int = 1
    planted_depth_max: int = 3
    label_noise: float = 0.05
    n_dictionaries: int = 6
    dictionary_size: int = 8
    vocab_sizes: dict[str, int] = field(default_factory=_default_vocab_sizes)
    train_fraction: float = 0.8
    positive_rate: float = 0.5
    extra_frame_rate: float = 0.15
    min_rule_support: int = 10

    def __post_init__(self):
        if self.n_sentences < 1:
            raise ValueError("n_sentences must be at least 1")
        if self.n_planted_rules < 1:
            raise ValueError("n_planted_rules must be at least 1")
        if not 1 <= self.planted_depth_min <= self.planted_depth_max:
            raise ValueError("planted depth range must satisfy 1 <= min <= max")
        if not 0.0 <= self.label_noise < 0.5:
            raise ValueError("label_noise must lie in [0, 0.5)")
        if self.n_dictionaries < 1 or self.dictionary_size < 1:
            raise ValueError("dictionary count and size must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError("positive_rate must lie strictly between 0 and 1")
        if not 0.0 <= self.extra_frame_rate <= 1.0:
            raise ValueError("extra_frame_rate must lie in [0, 1]")
        if self.min_rule_support < 1:
            raise ValueError("min_rule_support must be at least 1")


@dataclass
class SynthResult:
    train: Corpus
    test: Corpus
    dictionaries: DictionarySet
    planted_expressions: list[str]
    attempt: int


def _predicate_sort_key(pred: Predicate) -> tuple:
    # ActionProperty before DictionaryMatch, then lexicographic fields;
    # mirrors catalog id order so rendered rules parse back canonically.
    if pred.kind is PredicateKind.ACTION_PROPERTY:
        return (0, pred.property_name, pred.expected_value)
    return (1, pred.role, pred.dictionary_name)


def _plant_rules(
    rng: PortableRng,
    config: SynthConfig,
    dicts_by_role: dict[str, list[str]],
) -> list[list[Predicate]]:
    slots: list[tuple[str, str]] = [("prop", name) for name in _PLANTABLE_PROPERTIES]
    slots += [("dict", role) for role in _DICT_TARGET_ROLES if dicts_by_role.get(role)]
    rules: list[list[Predicate]] = []
    signatures: list[set[str]] = []
    for _ in range(config.n_planted_rules):
        for _attempt in range(60):
            depth = config.planted_depth_min + rng.randrange(
                config.planted_depth_max - config.planted_depth_min + 1
            )
            depth = min(depth, len(slots))
            chosen = rng.sample(slots, depth)
            preds: list[Predicate] = []
            for kind, name in chosen:
                if kind == "prop":
                    value = rng.choice(PROPERTY_VALUES[name])
                    preds.append(
                        Predicate(
                            -1,
                            PredicateKind.ACTION_PROPERTY,
                            property_name=name,
                            expected_value=value,
                        )
                    )
                else:
                    dict_name = rng.choice(dicts_by_role[name])
                    preds.append(
                        Predicate(
                            -1,
                            PredicateKind.DICTIONARY_MATCH,
                            role=name,
                            dictionary_name=dict_name,
                        )
                    )
            preds.sort(key=_predicate_sort_key)
            signature = {p.display_name for p in preds}
            if any(signature <= other or other <= signature for other in signatures):
                continue
            rules.append(preds)
            signatures.append(signature)
            break
        else:
            raise SynthesisError("could not plant mutually non-subsuming rules")
    return rules


def _compose_sentence(
    rng: PortableRng,
    vocab: dict[str, list[str]],
    lemma_pool: list[str],
    prop_constraints: dict[str, str],
    role_pools: dict[str, list[str]],
) -> tuple[list[str], SlsFrame]:
    """One frame plus its tokens. Constrained roles are always realized."""
    lemma = rng.choice(lemma_pool)
    properties = {}
    for name in PROPERTY_ORDER:
        fixed = prop_constraints.get(name)
        properties[name] = fixed if fixed is not None else rng.choice(PROPERTY_VALUES[name])

    role_words: dict[str, list[str]] = {}
    for role in ARGUMENT_ROLES:
        pool = role_pools.get(role)
        if pool is not None:
            role_words[role] = [rng.choice(pool)]
        elif rng.random() < _ROLE_INCLUDE_PROB[role]:
            if role == "manner" and rng.random() < 0.2:
                role_words[role] = [rng.choice(vocab[role]), rng.choice(vocab[role])]
            else:
                role_words[role] = [rng.choice(vocab[role])]

    tokens: list[str] = []
    arguments: dict[str, tuple[ArgumentSpan, ...]] = {}

    def emit(role: str) -> None:
        words = role_words.get(role)
        if not words:
            return
        start = len(tokens)
        tokens.extend(words)
        arguments[role] = (ArgumentSpan(" ".join(words), start, len(tokens)),)

    emit("agent")
    tokens.append(lemma)
    emit("theme")
    emit("object")
    if "beneficiary" in role_words:
        tokens.append("for")
        emit("beneficiary")
    emit("context:temporal")
    emit("context:locative")
    emit("manner")
    return tokens, SlsFrame(lemma, properties, arguments)


def _generate_attempt(config: SynthConfig, seed: int) -> SynthResult | None:
    rng = PortableRng(seed)
    sizes = dict(_default_vocab_sizes())
    sizes.update(config.vocab_sizes)
    vocab = {
        role: [f"{prefix}{i:02d}" for i in range(sizes[role])]
        for role, prefix in _ROLE_WORD_PREFIX.items()
    }

    dicts: dict[str, Dictionary] = {}
    dict_entries: dict[str, list[str]] = {}
    dicts_by_role: dict[str, list[str]] = {}
    for j in range(config.n_dictionaries):
        role = _DICT_TARGET_ROLES[j % len(_DICT_TARGET_ROLES)]
        name = f"d{j}_{role.replace(':', '_')}"
        size = min(config.dictionary_size, len(vocab[role]))
        entries = sorted(rng.sample(vocab[role], size))
        dicts[name] = Dictionary(name, frozenset(entries))
        dict_entries[name] = entries
        dicts_by_role.setdefault(role, []).append(name)
    dictionaries = DictionarySet(dicts)

    planted = _plant_rules(rng, config, dicts_by_role)

    def build(constraining_rule: list[Predicate] | None) -> tuple[list[str], list[SlsFrame]]:
        lemma_pool = vocab[ACTION_LEMMA_ROLE]
        prop_constraints: dict[str, str] = {}
        role_pools: dict[str, list[str]] = {}
        if constraining_rule is not None:
            for pred in constraining_rule:
                if pred.kind is PredicateKind.ACTION_PROPERTY:
                    prop_constraints[pred.property_name] = pred.expected_value
                elif pred.role == ACTION_LEMMA_ROLE:
                    lemma_pool = dict_entries[pred.dictionary_name]
                else:
                    role_pools[pred.role] = dict_entries[pred.dictionary_name]
        tokens, frame = _compose_sentence(rng, vocab, lemma_pool, prop_constraints, role_pools)
        frames = [frame]
        if rng.random() < config.extra_frame_rate:
            extra_tokens, extra = _compose_sentence(rng, vocab, vocab[ACTION_LEMMA_ROLE], {}, {})
            offset = len(tokens) + 1
            tokens.append(";")
            tokens.extend(extra_tokens)
            shifted_args = {
                role: tuple(
                    ArgumentSpan(s.text, s.token_start + offset, s.token_end + offset)
                    for s in spans
                )
                for role, spans in extra.arguments.items()
            }
            frames.append(SlsFrame(extra.action_lemma, extra.properties, shifted_args))
        return tokens, frames

    def satisfied_rules(sentence: Sentence) -> set[int]:
        return {
            ri
            for ri, preds in enumerate(planted)
            if all(evaluate_predicate(p, sentence, dictionaries) for p in preds)
        }

    sentences: list[Sentence] = []
    satisfied_by: list[set[int]] = []
    for i in range(config.n_sentences):
        if rng.random() < config.positive_rate:
            rule = planted[rng.randrange(len(planted))]
            tokens, frames = build(rule)
            sentence = Sentence(i, " ".join(tokens), tokens, frames, 0, i)
        else:
            # keep resampling until the sentence satisfies no planted rule;
            # give up after a bounded number of tries and accept the match
            sentence = None
            for _try in range(20):
                tokens, frames = build(None)
                candidate = Sentence(i, " ".join(tokens), tokens, frames, 0, i)
                if not satisfied_rules(candidate):
                    sentence = candidate
                    break
                sentence = candidate
        hits = satisfied_rules(sentence)
        sentence.label = 1 if hits else 0
        sentences.append(sentence)
        satisfied_by.append(hits)

    for sentence in sentences:
        if rng.random() < config.label_noise:
            sentence.label = 1 - sentence.label

    order = list(range(config.n_sentences))
    rng.shuffle(order)
    train_count = int(config.n_sentences * config.train_fraction + 0.5)
    train_src = sorted(order[:train_count])
    test_src = sorted(order[train_count:])

    def take(source_ids: list[int]) -> Corpus:
        rows = []
        for dense, src in enumerate(source_ids):
            s = sentences[src]
            rows.append(Sentence(dense, s.text, s.tokens, s.frames, s.label, src))
        return corpus_from_sentences(rows)

    train, test = take(train_src), take(test_src)

    test_floor = max(1, config.min_rule_support // 4)
    for ri in range(len(planted)):
        train_support = sum(1 for src in train_src if ri in satisfied_by[src])
        test_support = sum(1 for src in test_src if ri in satisfied_by[src])
        if train_support < config.min_rule_support or test_support < test_floor:
            return None
    for split in (train, test):
        if split.positives == 0 or split.negatives == 0:
            return None

    planted_expressions = [" AND ".join(p.display_name for p in preds) for preds in planted]
    return SynthResult(train, test, dictionaries, planted_expressions, attempt=0)


def generate(config: SynthConfig) -> SynthResult:
    """Generate train/test corpora with planted rules and dictionaries.

    Retries with derived seeds when a draw misses the support guarantee
    (every planted rule matching at least min_rule_support train sentences)
    and raises :class:`SynthesisError` when no attempt succeeds.
    """
    last_seed = config.rng_seed
    for attempt in range(8):
        seed = config.rng_seed if attempt == 0 else mix64(config.rng_seed ^ (attempt * 0xD1B54A32D192ED03))
        last_seed = seed
        result = _generate_attempt(config, seed)
        if result is not None:
            result.attempt = attempt
            return result
    raise SynthesisError(
        f"no corpus satisfying the support guarantee after 8 attempts (last seed {last_seed})"
    )


def write_outputs(result: SynthResult, outdir: str | Path) -> dict[str, str]:
    """Write train.jsonl, test.jsonl, dictionaries.json, planted_rules.json."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(result.train, out / "train.jsonl")
    save_corpus(result.test, out / "test.jsonl")
    save_dictionaries(result.dictionaries, out / "dictionaries.json")
    planted = {
        "rules": [
            {"id": i, "expression": expr, "weight": None}
            for i, expr in enumerate(result.planted_expressions)
        ]
    }
    (out / "planted_rules.json").write_text(
        json.dumps(planted, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return {
        "train": str(out / "train.jsonl"),
        "test": str(out / "test.jsonl"),
        "dictionaries": str(out / "dictionaries.json"),
        "planted_rules": str(out / "planted_rules.json"),
    }


def load_synth_config(path: str | Path) -> SynthConfig:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise ValueError("synth config file must be a JSON object")
    return SynthConfig(**obj)
