"""Predicate catalog and bitset match index.

Two predicate kinds exist. An action-property predicate holds when any frame
of a sentence carries the given property value. A dictionary predicate holds
when any frame fills the given role with text found in the named dictionary;
the pseudo-role ``action_lemma`` tests the frame's lemma instead of a span.

Display grammar, stable across the CLI, files, and the HTTP API::

    prop:<property>=<value>
    dict:<role>@<dictionary>

The catalog enumerates every predicate observable in a corpus above a
support threshold and assigns dense ids. The match index precomputes, for
each catalog predicate, the bitset of sentences it holds on; everything
downstream (expression evaluation, metrics, deltas) reduces to bitwise
operations on those rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .corpus import (
    ACTION_LEMMA_ROLE,
    ARGUMENT_ROLES,
    PROPERTY_NAMES,
    Corpus,
    DictionarySet,
    Sentence,
)


class UnknownDictionaryError(LookupError):
    pass


class PredicateKind(str, Enum):
    ACTION_PROPERTY = "ActionProperty"
    DICTIONARY_MATCH = "DictionaryMatch"


_DICT_ROLES = (ACTION_LEMMA_ROLE,) + ARGUMENT_ROLES


@dataclass(frozen=True)
class Predicate:
    """One atomic sentence test. Exactly one field pair is populated per kind:
    (property_name, expected_value) or (role, dictionary_name)."""

    id: int
    kind: PredicateKind
    property_name: str | None = None
    expected_value: str | None = None
    role: str | None = None
    dictionary_name: str | None = None

    @property
    def display_name(self) -> str:
        if self.kind is PredicateKind.ACTION_PROPERTY:
            return f"prop:{self.property_name}={self.expected_value}"
        return f"dict:{self.role}@{self.dictionary_name}"


def parse_predicate(text: str, pred_id: int = -1) -> Predicate:
    """Parse a display name back into a predicate. Inverse of display_name."""
    if text.startswith("prop:"):
        body = text[len("prop:") :]
        name, sep, value = body.partition("=")
        if not sep or not name or not value:
            raise ValueError(f"malformed property predicate {text!r}")
        if name not in PROPERTY_NAMES:
            raise ValueError(f"unknown property {name!r} in {text!r}")
        return Predicate(pred_id, PredicateKind.ACTION_PROPERTY, property_name=name, expected_value=value)
    if text.startswith("dict:"):
        body = text[len("dict:") :]
        role, sep, dictionary = body.partition("@")
        if not sep or not role or not dictionary:
            raise ValueError(f"malformed dictionary predicate {text!r}")
        if role not in _DICT_ROLES:
            raise ValueError(f"unknown role {role!r} in {text!r}")
        return Predicate(pred_id, PredicateKind.DICTIONARY_MATCH, role=role, dictionary_name=dictionary)
    raise ValueError(f"predicate {text!r} must start with 'prop:' or 'dict:'")


def evaluate_predicate(pred: Predicate, sentence: Sentence, dictionaries: DictionarySet) -> bool:
    """Reference evaluator: existential over the sentence's frames.

    Dictionary matching on an argument role accepts either the span's full
    text or any single token inside the span, lowercased. A sentence with no
    frames satisfies nothing.
    """
    if pred.kind is PredicateKind.ACTION_PROPERTY:
        return any(
            frame.properties.get(pred.property_name) == pred.expected_value
            for frame in sentence.frames
        )
    dictionary = dictionaries.get(pred.dictionary_name)
    if dictionary is None:
        raise UnknownDictionaryError(f"dictionary {pred.dictionary_name!r} is not loaded")
    entries = dictionary.entries
    if pred.role == ACTION_LEMMA_ROLE:
        return any(frame.action_lemma in entries for frame in sentence.frames)
    for frame in sentence.frames:
        for span in frame.arguments.get(pred.role, ()):
            if span.text.lower() in entries:
                return True
            if any(
                token.lower() in entries
                for token in sentence.tokens[span.token_start : span.token_end]
            ):
                return True
    return False


@dataclass(frozen=True)
class CatalogConfig:
    min_support: int = 5

    def __post_init__(self):
        if self.min_support < 0:
            raise ValueError("min_support must be nonnegative")


@dataclass
class PredicateCatalog:
    """Dense, deterministically ordered predicate universe for one corpus.

    Action-property predicates come first, sorted by (property, value), then
    dictionary predicates sorted by (role, dictionary). ``by_name`` maps
    display names back to ids.
    """

    predicates: list[Predicate]
    by_name: dict[str, int]

    def __len__(self) -> int:
        return len(self.predicates)

    def __getitem__(self, pred_id: int) -> Predicate:
        return self.predicates[pred_id]


class _SentenceSignature:
    """Precomputed lookup structures for fast support counting."""

    __slots__ = ("property_pairs", "lemmas", "role_terms")

    def __init__(self, sentence: Sentence):
        self.property_pairs: set[tuple[str, str]] = set()
        self.lemmas: set[str] = set()
        self.role_terms: dict[str, set[str]] = {}
        for frame in sentence.frames:
            self.lemmas.add(frame.action_lemma)
            for name, value in frame.properties.items():
                self.property_pairs.add((name, value))
            for role, spans in frame.arguments.items():
                terms = self.role_terms.setdefault(role, set())
                for span in spans:
                    terms.add(span.text.lower())
                    terms.update(
                        t.lower() for t in sentence.tokens[span.token_start : span.token_end]
                    )

    def satisfies(self, pred: Predicate, dictionaries: DictionarySet) -> bool:
        if pred.kind is PredicateKind.ACTION_PROPERTY:
            return (pred.property_name, pred.expected_value) in self.property_pairs
        dictionary = dictionaries.get(pred.dictionary_name)
        if dictionary is None:
            raise UnknownDictionaryError(f"dictionary {pred.dictionary_name!r} is not loaded")
        if pred.role == ACTION_LEMMA_ROLE:
            return not self.lemmas.isdisjoint(dictionary.entries)
        terms = self.role_terms.get(pred.role)
        return terms is not None and not terms.isdisjoint(dictionary.entries)


def build_catalog(
    corpus: Corpus,
    dictionaries: DictionarySet,
    config: CatalogConfig | None = None,
) -> PredicateCatalog:
    """Enumerate all predicates with support >= config.min_support.

    Property predicates come from observed (property, value) pairs;
    dictionary predicates from the full (role, dictionary) cross product.
    Building twice over the same inputs yields identical catalogs.
    """
    config = config or CatalogConfig()
    signatures = [_SentenceSignature(s) for s in corpus.sentences]

    pair_support: dict[tuple[str, str], int] = {}
    for sig in signatures:
        for pair in sig.property_pairs:
            pair_support[pair] = pair_support.get(pair, 0) + 1

    predicates: list[Predicate] = []
    for name, value in sorted(pair_support):
        if pair_support[(name, value)] >= config.min_support:
            predicates.append(
                Predicate(
                    len(predicates),
                    PredicateKind.ACTION_PROPERTY,
                    property_name=name,
                    expected_value=value,
                )
            )

    for role in sorted(_DICT_ROLES):
        for dict_name in sorted(dictionaries.names()):
            candidate = Predicate(
                len(predicates), PredicateKind.DICTIONARY_MATCH, role=role, dictionary_name=dict_name
            )
            support = sum(1 for sig in signatures if sig.satisfies(candidate, dictionaries))
            if support >= config.min_support:
                predicates.append(candidate)

    by_name = {p.display_name: p.id for p in predicates}
    return PredicateCatalog(predicates, by_name)


@dataclass
class MatchIndex:
    """Per-predicate match bitsets over dense sentence ids.

    ``bitsets`` has shape (num_predicates, corpus_size); row p holds the
    matches of catalog predicate p. ``label_bitset`` marks positive sentences.
    """

    corpus_size: int
    bitsets: np.ndarray
    label_bitset: np.ndarray

    @property
    def num_predicates(self) -> int:
        return self.bitsets.shape[0]

    def popcounts(self) -> np.ndarray:
        return self.bitsets.sum(axis=1)


def build_match_index(
    catalog: PredicateCatalog, corpus: Corpus, dictionaries: DictionarySet
) -> MatchIndex:
    n = len(corpus.sentences)
    bitsets = np.zeros((len(catalog), n), dtype=bool)
    signatures = [_SentenceSignature(s) for s in corpus.sentences]
    for pred in catalog.predicates:
        row = bitsets[pred.id]
        for j, sig in enumerate(signatures):
            if sig.satisfies(pred, dictionaries):
                row[j] = True
    label_bitset = np.fromiter((s.label == 1 for s in corpus.sentences), dtype=bool, count=n)
    if int(label_bitset.sum()) != corpus.positives:
        raise ValueError("corpus label counts are inconsistent with sentence labels")
    return MatchIndex(n, bitsets, label_bitset)
