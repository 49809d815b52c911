import numpy as np
import pytest

from rulebench.corpus import (
    ArgumentSpan,
    Dictionary,
    DictionarySet,
    Sentence,
    SlsFrame,
    corpus_from_sentences,
)
from rulebench.predicates import (
    CatalogConfig,
    Predicate,
    PredicateKind,
    UnknownDictionaryError,
    build_catalog,
    build_match_index,
    evaluate_predicate,
    parse_predicate,
)


def prop(name, value):
    return Predicate(-1, PredicateKind.ACTION_PROPERTY, property_name=name, expected_value=value)


def dmatch(role, dictionary):
    return Predicate(-1, PredicateKind.DICTIONARY_MATCH, role=role, dictionary_name=dictionary)


class TestEvaluate:
    def test_property_match(self, tiny):
        corpus, dicts, _, _ = tiny
        assert evaluate_predicate(prop("tense", "past"), corpus.sentences[0], dicts)
        assert not evaluate_predicate(prop("tense", "future"), corpus.sentences[0], dicts)

    def test_lemma_dictionary_match(self, tiny):
        corpus, dicts, _, _ = tiny
        assert evaluate_predicate(dmatch("action_lemma", "transfer_verbs"), corpus.sentences[9], dicts)
        assert not evaluate_predicate(dmatch("action_lemma", "transfer_verbs"), corpus.sentences[3], dicts)

    def test_role_dictionary_match(self, tiny):
        corpus, dicts, _, _ = tiny
        assert evaluate_predicate(dmatch("agent", "medics"), corpus.sentences[0], dicts)
        assert not evaluate_predicate(dmatch("agent", "medics"), corpus.sentences[2], dicts)

    def test_no_frames_matches_nothing(self, tiny):
        _, dicts, _, _ = tiny
        bare = Sentence(0, "hello world", ["hello", "world"], [], 0, 0)
        assert not evaluate_predicate(prop("tense", "past"), bare, dicts)
        assert not evaluate_predicate(dmatch("agent", "medics"), bare, dicts)

    def test_token_level_match_inside_span(self):
        # span text "the doctor" is not an entry, but token "doctor" is
        dicts = DictionarySet({"meds": Dictionary("meds", frozenset({"doctor"}))})
        frame = SlsFrame("go", {}, {"agent": (ArgumentSpan("the doctor", 0, 2),)})
        sentence = Sentence(0, "the doctor left", ["the", "doctor", "left"], [frame], 0, 0)
        assert evaluate_predicate(dmatch("agent", "meds"), sentence, dicts)

    def test_case_insensitive_span_match(self):
        dicts = DictionarySet({"meds": Dictionary("meds", frozenset({"doctor"}))})
        frame = SlsFrame("go", {}, {"agent": (ArgumentSpan("Doctor", 0, 1),)})
        sentence = Sentence(0, "Doctor left", ["Doctor", "left"], [frame], 0, 0)
        assert evaluate_predicate(dmatch("agent", "meds"), sentence, dicts)

    def test_missing_dictionary_raises(self, tiny):
        corpus, dicts, _, _ = tiny
        with pytest.raises(UnknownDictionaryError, match="nope"):
            evaluate_predicate(dmatch("agent", "nope"), corpus.sentences[0], dicts)

    def test_second_frame_can_satisfy(self):
        dicts = DictionarySet({"meds": Dictionary("meds", frozenset({"nurse"}))})
        f1 = SlsFrame("walk", {"tense": "present"}, {})
        f2 = SlsFrame("run", {"tense": "past"}, {"agent": (ArgumentSpan("nurse", 0, 1),)})
        sentence = Sentence(0, "nurse ran", ["nurse", "ran"], [f1, f2], 0, 0)
        assert evaluate_predicate(prop("tense", "past"), sentence, dicts)
        assert evaluate_predicate(dmatch("agent", "meds"), sentence, dicts)


class TestDisplayGrammar:
    def test_round_trip_over_catalog(self, tiny):
        _, _, catalog, _ = tiny
        for pred in catalog.predicates:
            parsed = parse_predicate(pred.display_name, pred.id)
            assert parsed == pred

    def test_property_forms(self):
        pred = parse_predicate("prop:tense=past")
        assert pred.kind is PredicateKind.ACTION_PROPERTY
        assert pred.property_name == "tense" and pred.expected_value == "past"
        assert pred.display_name == "prop:tense=past"

    def test_dictionary_forms(self):
        pred = parse_predicate("dict:agent@medics")
        assert pred.role == "agent" and pred.dictionary_name == "medics"
        assert parse_predicate("dict:action_lemma@verbs").role == "action_lemma"

    @pytest.mark.parametrize(
        "bad",
        ["", "tense=past", "prop:tense", "prop:gender=f", "dict:agent", "dict:owner@meds"],
    )
    def test_malformed_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_predicate(bad)


class TestCatalog:
    def test_known_supports(self, tiny):
        corpus, dicts, catalog, index = tiny
        support = {p.display_name: int(index.bitsets[p.id].sum()) for p in catalog.predicates}
        assert support["prop:tense=past"] == 6
        assert support["prop:tense=present"] == 4
        assert support["prop:tense=future"] == 2
        assert support["dict:agent@medics"] == 4
        assert support["dict:agent@firms"] == 4
        assert support["dict:action_lemma@transfer_verbs"] == 5
        assert support["prop:voice=active"] == 12

    def test_tiny_catalog_contents(self, tiny):
        _, _, catalog, _ = tiny
        names = [p.display_name for p in catalog.predicates]
        # action-property block first, each block sorted
        kinds = [p.kind for p in catalog.predicates]
        first_dict = kinds.index(PredicateKind.DICTIONARY_MATCH)
        assert all(k is PredicateKind.ACTION_PROPERTY for k in kinds[:first_dict])
        assert all(k is PredicateKind.DICTIONARY_MATCH for k in kinds[first_dict:])
        assert names[:first_dict] == sorted(names[:first_dict])
        assert len(names) == 12
        assert [p.id for p in catalog.predicates] == list(range(12))

    def test_exactly_three_predicates(self):
        # two observed tense values plus one live dictionary role
        def sent(sid, tense, agent, label):
            frame = SlsFrame("go", {"tense": tense}, {"agent": (ArgumentSpan(agent, 0, 1),)})
            return Sentence(sid, f"{agent} went", [agent, "went"], [frame], label, sid)

        corpus = corpus_from_sentences(
            [sent(0, "past", "ana", 1), sent(1, "present", "bo", 0), sent(2, "past", "ana", 1)]
        )
        dicts = DictionarySet({"people": Dictionary("people", frozenset({"ana"}))})
        catalog = build_catalog(corpus, dicts, CatalogConfig(min_support=1))
        names = sorted(p.display_name for p in catalog.predicates)
        assert names == ["dict:agent@people", "prop:tense=past", "prop:tense=present"]

    def test_min_support_above_corpus_size_empty(self, tiny):
        corpus, dicts, _, _ = tiny
        catalog = build_catalog(corpus, dicts, CatalogConfig(min_support=len(corpus.sentences) + 1))
        assert len(catalog) == 0

    def test_threshold_monotone(self, tiny):
        corpus, dicts, _, _ = tiny
        low = {p.display_name for p in build_catalog(corpus, dicts, CatalogConfig(2)).predicates}
        high = {p.display_name for p in build_catalog(corpus, dicts, CatalogConfig(5)).predicates}
        assert high <= low

    def test_deterministic(self, tiny):
        corpus, dicts, _, _ = tiny
        a = build_catalog(corpus, dicts, CatalogConfig(min_support=2))
        b = build_catalog(corpus, dicts, CatalogConfig(min_support=2))
        assert a.predicates == b.predicates
        assert a.by_name == b.by_name

    def test_by_name_inverts_ids(self, tiny):
        _, _, catalog, _ = tiny
        for pred in catalog.predicates:
            assert catalog.by_name[pred.display_name] == pred.id


class TestMatchIndex:
    def test_agrees_with_reference_evaluator(self, tiny):
        corpus, dicts, catalog, index = tiny
        for pred in catalog.predicates:
            for sentence in corpus.sentences:
                assert bool(index.bitsets[pred.id, sentence.id]) == evaluate_predicate(
                    pred, sentence, dicts
                )

    def test_agrees_on_synthetic(self, small_synth):
        result, catalog, index = small_synth
        rng_ids = range(0, len(result.train.sentences), 7)
        for pred in catalog.predicates:
            for sid in rng_ids:
                sentence = result.train.sentences[sid]
                assert bool(index.bitsets[pred.id, sid]) == evaluate_predicate(
                    pred, sentence, result.dictionaries
                )

    def test_label_bitset_counts(self, tiny):
        corpus, _, _, index = tiny
        assert int(index.label_bitset.sum()) == corpus.positives == 6

    def test_empty_corpus(self):
        corpus = corpus_from_sentences([])
        dicts = DictionarySet({})
        catalog = build_catalog(corpus, dicts, CatalogConfig(min_support=1))
        index = build_match_index(catalog, corpus, dicts)
        assert index.corpus_size == 0
        assert index.bitsets.shape == (len(catalog), 0)

    def test_popcounts(self, tiny):
        _, _, _, index = tiny
        assert np.array_equal(index.popcounts(), index.bitsets.sum(axis=1))
