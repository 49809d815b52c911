"""Shared fixtures: a small hand-checkable corpus and a synthetic workspace."""

from __future__ import annotations

import pytest

from rulebench.corpus import (
    ArgumentSpan,
    Corpus,
    Dictionary,
    DictionarySet,
    Sentence,
    SlsFrame,
    corpus_from_sentences,
)
from rulebench.learner import LearnerConfig, generate_candidates, train_weights
from rulebench.predicates import CatalogConfig, build_catalog, build_match_index
from rulebench.synthgen import SynthConfig, generate

# (agent, verb surface, lemma, theme, label, tense, polarity)
_ROWS = [
    ("doctor", "send", "send", "report", 1, "past", "positive"),
    ("nurse", "sending", "send", "letter", 1, "present", "positive"),
    ("firm", "delivering", "deliver", "package", 1, "past", "positive"),
    ("doctor", "receive", "receive", "letter", 1, "past", "positive"),
    ("patient", "walk", "walk", None, 0, "present", "positive"),
    ("firm", "receive", "receive", "report", 0, "present", "positive"),
    ("nurse", "walk", "walk", None, 0, "past", "positive"),
    ("company", "send", "send", "invoice", 1, "future", "positive"),
    ("patient", "sleep", "sleep", None, 0, "present", "negative"),
    ("clinic", "transmit", "transmit", "data", 1, "past", "positive"),
    ("company", "receive", "receive", "package", 0, "future", "positive"),
    ("patient", "sleep", "sleep", None, 0, "past", "negative"),
]


def build_tiny_corpus() -> Corpus:
    sentences = []
    for sid, (agent, verb, lemma, theme, label, tense, polarity) in enumerate(_ROWS):
        tokens = [agent, verb] + ([theme] if theme else [])
        arguments = {"agent": (ArgumentSpan(agent, 0, 1),)}
        if theme:
            arguments["theme"] = (ArgumentSpan(theme, 2, 3),)
        frame = SlsFrame(
            action_lemma=lemma,
            properties={
                "tense": tense,
                "aspect": "simple",
                "mood": "indicative",
                "modalclass": "none",
                "voice": "active",
                "polarity": polarity,
            },
            arguments=arguments,
        )
        sentences.append(Sentence(sid, " ".join(tokens), tokens, [frame], label, sid))
    return corpus_from_sentences(sentences)


def build_tiny_dictionaries() -> DictionarySet:
    return DictionarySet(
        {
            "medics": Dictionary("medics", frozenset({"doctor", "nurse"})),
            "firms": Dictionary("firms", frozenset({"firm", "company"})),
            "transfer_verbs": Dictionary("transfer_verbs", frozenset({"send", "transmit", "deliver"})),
        }
    )


@pytest.fixture(scope="session")
def tiny():
    corpus = build_tiny_corpus()
    dictionaries = build_tiny_dictionaries()
    catalog = build_catalog(corpus, dictionaries, CatalogConfig(min_support=2))
    index = build_match_index(catalog, corpus, dictionaries)
    return corpus, dictionaries, catalog, index


@pytest.fixture(scope="session")
def small_synth():
    """A 400-sentence synthetic corpus with catalog and index."""
    result = generate(SynthConfig(rng_seed=7, n_sentences=400, min_rule_support=6))
    catalog = build_catalog(result.train, result.dictionaries, CatalogConfig(min_support=5))
    index = build_match_index(catalog, result.train, result.dictionaries)
    return result, catalog, index


@pytest.fixture(scope="session")
def small_model(small_synth):
    """A trained model over the small synthetic corpus."""
    result, catalog, index = small_synth
    config = LearnerConfig()
    candidates = generate_candidates(index, config)
    model = train_weights(candidates, index, config)
    return result, catalog, index, model
