"""Conjunctive expressions over catalog predicates, and everything computed
from their match sets: metrics, ranking, filters, approval deltas, example
sampling, and the rule-set file format.

An expression is a conjunction of distinct predicates; its canonical form
lists predicate ids in ascending order. A rule set is a disjunction of
expressions: a sentence matches the set when it matches any member. The
textual form joins display names with " AND "::

    prop:tense=past AND dict:agent@medical_specialist

Rule-set files are JSON: {"rules": [{"id", "expression", "weight"}]} with
weight null for human-curated sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, DictionarySet, Sentence
from .predicates import (
    MatchIndex,
    Predicate,
    PredicateCatalog,
    PredicateKind,
    evaluate_predicate,
)
from .prng import PortableRng


class ExpressionError(ValueError):
    """Malformed expression: empty, duplicate predicate, unknown name or id."""


@dataclass(frozen=True)
class LinguisticExpression:
    """Conjunction of predicate ids, kept in canonical ascending order.

    ``expr_id`` is an optional stable identifier; it is excluded from
    equality so expressions compare by content.
    """

    predicate_ids: tuple[int, ...]
    expr_id: int | None = field(default=None, compare=False)

    def __post_init__(self):
        ids = tuple(self.predicate_ids)
        if not ids:
            raise ExpressionError("expression must contain at least one predicate")
        if len(set(ids)) != len(ids):
            raise ExpressionError(f"duplicate predicate in expression: {ids}")
        object.__setattr__(self, "predicate_ids", tuple(sorted(ids)))

    def __len__(self) -> int:
        return len(self.predicate_ids)

    def with_id(self, expr_id: int | None) -> "LinguisticExpression":
        return LinguisticExpression(self.predicate_ids, expr_id)


@dataclass(frozen=True)
class WeightedRule:
    expression: LinguisticExpression
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f"rule weight must be nonnegative, got {self.weight}")


@dataclass
class RuleSet:
    """A disjunction of distinct expressions."""

    expressions: list[LinguisticExpression]

    def __post_init__(self):
        seen: set[tuple[int, ...]] = set()
        for expr in self.expressions:
            if expr.predicate_ids in seen:
                raise ExpressionError(f"duplicate expression in rule set: {expr.predicate_ids}")
            seen.add(expr.predicate_ids)

    def __len__(self) -> int:
        return len(self.expressions)

    def __iter__(self):
        return iter(self.expressions)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        # 0/0 is defined as 0 throughout so empty matchers score zero
        # instead of raising.
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp, fp, fn, precision, recall, f1)


def parse_expression(
    text: str, catalog: PredicateCatalog, expr_id: int | None = None
) -> LinguisticExpression:
    """Parse " AND "-joined display names, resolving each against the catalog."""
    stripped = text.strip()
    if not stripped:
        raise ExpressionError("empty expression")
    ids: list[int] = []
    for part in stripped.split(" AND "):
        pred_id = catalog.by_name.get(part)
        if pred_id is None:
            raise ExpressionError(f"unknown predicate {part!r}")
        if pred_id in ids:
            raise ExpressionError(f"duplicate predicate {part!r}")
        ids.append(pred_id)
    return LinguisticExpression(tuple(ids), expr_id)


def render_expression(expr: LinguisticExpression, catalog: PredicateCatalog) -> str:
    """Canonical text form: display names in ascending predicate-id order."""
    names = []
    for pred_id in expr.predicate_ids:
        if not (0 <= pred_id < len(catalog)):
            raise ExpressionError(f"expression references unknown predicate id {pred_id}")
        names.append(catalog[pred_id].display_name)
    return " AND ".join(names)


def eval_expression(expr: LinguisticExpression, index: MatchIndex) -> np.ndarray:
    """Bitset of sentences matching the conjunction."""
    if expr.predicate_ids[-1] >= index.num_predicates:
        raise ExpressionError(
            f"expression references predicate id {expr.predicate_ids[-1]} "
            f"outside the index ({index.num_predicates} predicates)"
        )
    return index.bitsets[list(expr.predicate_ids)].all(axis=0)


def eval_ruleset(ruleset: RuleSet, index: MatchIndex) -> np.ndarray:
    """Bitset of sentences matching any expression (empty set matches none)."""
    if not ruleset.expressions:
        return np.zeros(index.corpus_size, dtype=bool)
    rows = [eval_expression(expr, index) for expr in ruleset.expressions]
    return np.logical_or.reduce(rows, axis=0) if len(rows) > 1 else rows[0].copy()


def compute_metrics(matches: np.ndarray, index: MatchIndex) -> Metrics:
    if matches.shape != index.label_bitset.shape:
        raise ValueError("match bitset length does not equal corpus size")
    label = index.label_bitset
    tp = int(np.count_nonzero(matches & label))
    fp = int(np.count_nonzero(matches & ~label))
    fn = int(np.count_nonzero(~matches & label))
    return Metrics.from_counts(tp, fp, fn)


_RANK_KEYS = ("precision", "recall", "f1")


def rank_rules(
    scored: list[tuple[LinguisticExpression, Metrics]], key: str = "f1"
) -> list[tuple[LinguisticExpression, Metrics]]:
    """Sort by the chosen metric descending; ties prefer fewer predicates,
    then lower expression id. Deterministic for any input order."""
    if key not in _RANK_KEYS:
        raise ValueError(f"rank key must be one of {_RANK_KEYS}, got {key!r}")

    def sort_key(item: tuple[LinguisticExpression, Metrics]):
        expr, metrics = item
        expr_id = expr.expr_id if expr.expr_id is not None else float("inf")
        return (-getattr(metrics, key), len(expr), expr_id, expr.predicate_ids)

    return sorted(scored, key=sort_key)


def filter_rules(
    scored: list[tuple[LinguisticExpression, Metrics]],
    thresholds: dict[str, float] | None = None,
    required_predicates: set[int] | None = None,
    excluded_predicates: set[int] | None = None,
) -> list[tuple[LinguisticExpression, Metrics]]:
    """Keep rules meeting every metric threshold, containing all required
    predicates, and containing no excluded predicate."""
    thresholds = thresholds or {}
    for name in thresholds:
        if name not in _RANK_KEYS:
            raise ValueError(f"threshold key must be one of {_RANK_KEYS}, got {name!r}")
    required = required_predicates or set()
    excluded = excluded_predicates or set()
    kept = []
    for expr, metrics in scored:
        ids = set(expr.predicate_ids)
        if any(getattr(metrics, name) < value for name, value in thresholds.items()):
            continue
        if not required.issubset(ids):
            continue
        if ids & excluded:
            continue
        kept.append((expr, metrics))
    return kept


@dataclass(frozen=True)
class DeltaReport:
    """Look-ahead for approving a candidate on top of an approved set."""

    base_metrics: Metrics
    combined_metrics: Metrics
    delta_tp: int
    delta_fp: int
    new_match_ids: tuple[int, ...]


def delta_report(approved: RuleSet, candidate: LinguisticExpression, index: MatchIndex) -> DeltaReport:
    if any(expr == candidate for expr in approved.expressions):
        raise ValueError("candidate expression is already in the approved set")
    base = eval_ruleset(approved, index)
    cand = eval_expression(candidate, index)
    new = cand & ~base
    label = index.label_bitset
    return DeltaReport(
        base_metrics=compute_metrics(base, index),
        combined_metrics=compute_metrics(base | cand, index),
        delta_tp=int(np.count_nonzero(new & label)),
        delta_fp=int(np.count_nonzero(new & ~label)),
        new_match_ids=tuple(int(i) for i in np.nonzero(new)[0]),
    )


def add_predicate(expr: LinguisticExpression, pred_id: int) -> LinguisticExpression:
    if pred_id in expr.predicate_ids:
        raise ExpressionError(f"predicate {pred_id} is already in the expression")
    return LinguisticExpression(expr.predicate_ids + (pred_id,))


def drop_predicate(expr: LinguisticExpression, pred_id: int) -> LinguisticExpression:
    if pred_id not in expr.predicate_ids:
        raise ExpressionError(f"predicate {pred_id} is not in the expression")
    if len(expr.predicate_ids) == 1:
        raise ExpressionError("cannot drop the last predicate of an expression")
    return LinguisticExpression(tuple(i for i in expr.predicate_ids if i != pred_id))


def predicate_highlights(
    pred: Predicate, sentence: Sentence, dictionaries: DictionarySet
) -> list[tuple[int, int]]:
    """Token ranges explaining why the predicate holds on the sentence.

    Property predicates and lemma-dictionary predicates point at the action
    token, located by exact lowercase match on the lemma with a prefix
    fallback for inflected surface forms. Role predicates return the
    matching argument spans. Empty when the predicate does not hold.
    """

    def lemma_token_spans(lemma: str) -> list[tuple[int, int]]:
        spans = [(i, i + 1) for i, tok in enumerate(sentence.tokens) if tok.lower() == lemma]
        if not spans and len(lemma) >= 3:
            spans = [
                (i, i + 1) for i, tok in enumerate(sentence.tokens) if tok.lower().startswith(lemma)
            ]
        return spans

    found: set[tuple[int, int]] = set()
    if pred.kind is PredicateKind.ACTION_PROPERTY:
        for frame in sentence.frames:
            if frame.properties.get(pred.property_name) == pred.expected_value:
                found.update(lemma_token_spans(frame.action_lemma))
    else:
        dictionary = dictionaries.get(pred.dictionary_name)
        if dictionary is None:
            return []
        entries = dictionary.entries
        for frame in sentence.frames:
            if pred.role == "action_lemma":
                if frame.action_lemma in entries:
                    found.update(lemma_token_spans(frame.action_lemma))
                continue
            for span in frame.arguments.get(pred.role, ()):
                tokens = sentence.tokens[span.token_start : span.token_end]
                if span.text.lower() in entries or any(t.lower() in entries for t in tokens):
                    found.add((span.token_start, span.token_end))
    return sorted(found)


@dataclass
class ExampleSentence:
    sentence_id: int
    text: str
    tokens: list[str]
    label: int
    highlights: dict[int, list[tuple[int, int]]]

    def to_obj(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "text": self.text,
            "tokens": list(self.tokens),
            "label": self.label,
            "highlights": {
                str(pid): [[s, e] for s, e in spans] for pid, spans in self.highlights.items()
            },
        }


@dataclass
class ExampleSample:
    true_positives: list[ExampleSentence]
    false_positives: list[ExampleSentence]

    def to_obj(self) -> dict:
        return {
            "true_positives": [e.to_obj() for e in self.true_positives],
            "false_positives": [e.to_obj() for e in self.false_positives],
        }


def _example_sentence(
    sentence: Sentence,
    expr: LinguisticExpression,
    catalog: PredicateCatalog,
    dictionaries: DictionarySet,
) -> ExampleSentence:
    highlights = {
        pred_id: predicate_highlights(catalog[pred_id], sentence, dictionaries)
        for pred_id in expr.predicate_ids
    }
    return ExampleSentence(sentence.id, sentence.text, list(sentence.tokens), sentence.label, highlights)


def sample_examples(
    expr: LinguisticExpression,
    index: MatchIndex,
    corpus: Corpus,
    catalog: PredicateCatalog,
    dictionaries: DictionarySet,
    seed: int = 0,
    max_per_class: int = 4,
) -> ExampleSample:
    """Up to ``max_per_class`` true-positive and false-positive matches of
    the expression, drawn uniformly and deterministically under the seed,
    with per-predicate highlight spans attached."""
    matches = eval_expression(expr, index)
    label = index.label_bitset
    tp_ids = [int(i) for i in np.nonzero(matches & label)[0]]
    fp_ids = [int(i) for i in np.nonzero(matches & ~label)[0]]
    rng = PortableRng(seed)
    picked_tp = tp_ids if len(tp_ids) <= max_per_class else rng.sample(tp_ids, max_per_class)
    picked_fp = fp_ids if len(fp_ids) <= max_per_class else rng.sample(fp_ids, max_per_class)
    return ExampleSample(
        true_positives=[
            _example_sentence(corpus.sentences[i], expr, catalog, dictionaries) for i in picked_tp
        ],
        false_positives=[
            _example_sentence(corpus.sentences[i], expr, catalog, dictionaries) for i in picked_fp
        ],
    )


@dataclass
class DiffExample:
    sentence_id: int
    text: str
    label: int
    tag: str  # "gained" | "lost"

    def to_obj(self) -> dict:
        return {"sentence_id": self.sentence_id, "text": self.text, "label": self.label, "tag": self.tag}


def diff_examples(
    before: LinguisticExpression,
    after: LinguisticExpression,
    index: MatchIndex,
    corpus: Corpus,
    k: int = 8,
    seed: int = 0,
) -> list[DiffExample]:
    """Up to k sentences from the symmetric difference of the two match
    sets, each tagged gained or lost, deterministic under the seed."""
    before_matches = eval_expression(before, index)
    after_matches = eval_expression(after, index)
    entries = [(int(i), "gained") for i in np.nonzero(after_matches & ~before_matches)[0]]
    entries += [(int(i), "lost") for i in np.nonzero(before_matches & ~after_matches)[0]]
    entries.sort()
    if len(entries) > k:
        rng = PortableRng(seed)
        entries = sorted(rng.sample(entries, k))
    return [
        DiffExample(i, corpus.sentences[i].text, corpus.sentences[i].label, tag) for i, tag in entries
    ]


def eval_expression_sentence(
    expr: LinguisticExpression,
    sentence: Sentence,
    catalog: PredicateCatalog,
    dictionaries: DictionarySet,
) -> bool:
    """Index-free evaluation of one sentence, via the reference predicate
    evaluator. Equivalent to reading the expression's bit for the sentence."""
    return all(
        evaluate_predicate(catalog[pred_id], sentence, dictionaries)
        for pred_id in expr.predicate_ids
    )


def ruleset_to_obj(
    entries: list[tuple[LinguisticExpression, float | None]], catalog: PredicateCatalog
) -> dict:
    return {
        "rules": [
            {
                "id": expr.expr_id,
                "expression": render_expression(expr, catalog),
                "weight": weight,
            }
            for expr, weight in entries
        ]
    }


def save_ruleset(
    path: str | Path,
    entries: list[tuple[LinguisticExpression, float | None]],
    catalog: PredicateCatalog,
) -> None:
    obj = ruleset_to_obj(entries, catalog)
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_ruleset(
    path: str | Path, catalog: PredicateCatalog
) -> list[tuple[LinguisticExpression, float | None]]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict) or not isinstance(obj.get("rules"), list):
        raise ExpressionError("rule-set file must be an object with a 'rules' list")
    entries: list[tuple[LinguisticExpression, float | None]] = []
    for row in obj["rules"]:
        if not isinstance(row, dict) or "expression" not in row:
            raise ExpressionError("each rule must be an object with an 'expression'")
        expr = parse_expression(row["expression"], catalog, expr_id=row.get("id"))
        weight = row.get("weight")
        if weight is not None:
            weight = float(weight)
        entries.append((expr, weight))
    return entries
