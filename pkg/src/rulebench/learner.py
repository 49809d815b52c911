"""Rule learning: beam-search candidate generation, nonnegative logistic
weighting, greedy top-K selection, and the model file format.

The trained artifact treats each candidate expression as a binary feature
and fits a logistic model whose weights are constrained to be nonnegative;
a rule can vote for the label or stay silent, never against it. Selection
then trades the weighted model for a small weight-free disjunction a person
can read and curate.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .fingerprint import fingerprint_obj
from .predicates import MatchIndex, PredicateCatalog
from .rules import (
    LinguisticExpression,
    Metrics,
    RuleSet,
    WeightedRule,
    compute_metrics,
    eval_expression,
    eval_ruleset,
    parse_expression,
    render_expression,
)

# Weights below this threshold are dropped from the trained model.
PRUNE_EPSILON = 1e-6


@dataclass(frozen=True)
class LearnerConfig:
    max_depth: int = 3
    beam_width: int = 50
    min_support: int = 5
    min_precision_seed: float = 0.5
    epochs: int = 200
    learning_rate: float = 0.1
    l1_penalty: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.beam_width < 1:
            raise ValueError("beam_width must be at least 1")
        if self.min_support < 0:
            raise ValueError("min_support must be nonnegative")
        if not 0.0 <= self.min_precision_seed <= 1.0:
            raise ValueError("min_precision_seed must lie in [0, 1]")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l1_penalty < 0:
            raise ValueError("l1_penalty must be nonnegative")


@dataclass
class WeightedRuleModel:
    rules: list[WeightedRule]
    bias: float
    training_config: LearnerConfig
    loss_history: list[float]


def _precision_f1(matches: np.ndarray, label: np.ndarray, positives: int) -> tuple[float, float]:
    matched = int(np.count_nonzero(matches))
    tp = int(np.count_nonzero(matches & label))
    precision = tp / matched if matched else 0.0
    recall = tp / positives if positives else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, f1


def generate_candidates(index: MatchIndex, config: LearnerConfig) -> list[LinguisticExpression]:
    """Beam-enumerate candidate conjunctions of depth 1..max_depth.

    Depth 1 is every predicate with support >= min_support; all of them are
    emitted. Each deeper level extends the previous level's beam (its top
    beam_width expressions by training F1) with one more predicate, keeping
    a child only if it clears min_support and strictly improves precision
    over its parent. Only depth-1 expressions with precision >=
    min_precision_seed may seed the beam. The result is the deduplicated
    union of all levels, deterministic for a given index and config.
    """
    label = index.label_bitset
    positives = int(np.count_nonzero(label))
    supports = index.popcounts()

    # (matches, precision) cached per canonical id tuple
    level: list[tuple[LinguisticExpression, np.ndarray, float, float]] = []
    for pred_id in range(index.num_predicates):
        if supports[pred_id] < config.min_support:
            continue
        matches = index.bitsets[pred_id]
        precision, f1 = _precision_f1(matches, label, positives)
        level.append((LinguisticExpression((pred_id,)), matches, precision, f1))

    out = [expr for expr, _, _, _ in level]
    beam = [
        item
        for item in sorted(level, key=lambda it: (-it[3], len(it[0]), it[0].predicate_ids))
        if item[2] >= config.min_precision_seed
    ][: config.beam_width]

    for _ in range(2, config.max_depth + 1):
        children: dict[tuple[int, ...], tuple[LinguisticExpression, np.ndarray, float, float]] = {}
        for expr, matches, precision, _ in beam:
            for pred_id in range(index.num_predicates):
                if pred_id in expr.predicate_ids:
                    continue
                key = tuple(sorted(expr.predicate_ids + (pred_id,)))
                if key in children:
                    continue
                child_matches = matches & index.bitsets[pred_id]
                if int(np.count_nonzero(child_matches)) < config.min_support:
                    continue
                child_precision, child_f1 = _precision_f1(child_matches, label, positives)
                if child_precision <= precision:
                    continue
                children[key] = (
                    LinguisticExpression(key),
                    child_matches,
                    child_precision,
                    child_f1,
                )
        if not children:
            break
        beam = sorted(children.values(), key=lambda it: (-it[3], it[0].predicate_ids))[
            : config.beam_width
        ]
        out.extend(expr for expr, _, _, _ in beam)

    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    exp_z = np.exp(z[~pos])
    out[~pos] = exp_z / (1.0 + exp_z)
    return out


def training_loss(
    weights: np.ndarray, bias: float, rule_matrix: np.ndarray, labels: np.ndarray, l1_penalty: float
) -> float:
    """Mean binary cross-entropy plus an L1 penalty on the rule weights.

    Computed as softplus(z) - y*z via logaddexp, which is exact for large
    |z| where the naive formula overflows.
    """
    z = rule_matrix.T @ weights + bias
    return float(np.mean(np.logaddexp(0.0, z) - labels * z) + l1_penalty * np.sum(weights))


def training_gradients(
    weights: np.ndarray, bias: float, rule_matrix: np.ndarray, labels: np.ndarray, l1_penalty: float
) -> tuple[np.ndarray, float]:
    """Exact gradient of :func:`training_loss` in (weights, bias).

    The L1 term contributes a constant +l1 per weight; with weights kept
    nonnegative by projection the penalty is differentiable everywhere the
    iterates live.
    """
    z = rule_matrix.T @ weights + bias
    residual = (_sigmoid(z) - labels) / labels.shape[0]
    grad_w = rule_matrix @ residual + l1_penalty
    grad_b = float(np.sum(residual))
    return grad_w, grad_b


def train_weights(
    candidates: list[LinguisticExpression], index: MatchIndex, config: LearnerConfig
) -> WeightedRuleModel:
    """Fit nonnegative weights over the candidates by projected full-batch
    gradient descent.

    Weights start at zero and the bias at the smoothed log-odds of the
    positive rate. Any epoch that would increase the loss is retried with a
    halved learning rate, so the recorded loss history never increases.
    Rules whose final weight falls below PRUNE_EPSILON are dropped, and the
    survivors are assigned dense ids in candidate order.
    """
    if not candidates:
        raise ValueError("cannot train on an empty candidate list")
    if index.corpus_size == 0:
        raise ValueError("cannot train on an empty corpus")

    matrix = np.stack([eval_expression(c, index) for c in candidates]).astype(np.float64)
    labels = index.label_bitset.astype(np.float64)
    n = index.corpus_size
    positives = float(labels.sum())

    weights = np.zeros(len(candidates), dtype=np.float64)
    bias = math.log((positives + 0.5) / (n - positives + 0.5))
    lr = config.learning_rate
    history = [training_loss(weights, bias, matrix, labels, config.l1_penalty)]

    for _ in range(config.epochs):
        grad_w, grad_b = training_gradients(weights, bias, matrix, labels, config.l1_penalty)
        while True:
            next_weights = np.maximum(weights - lr * grad_w, 0.0)
            next_bias = bias - lr * grad_b
            next_loss = training_loss(next_weights, next_bias, matrix, labels, config.l1_penalty)
            if next_loss <= history[-1] or lr < 1e-15:
                break
            lr *= 0.5
        if next_loss <= history[-1]:
            weights, bias = next_weights, next_bias
            history.append(next_loss)
        else:
            # learning rate exhausted; hold position
            history.append(history[-1])

    rules = []
    for candidate, weight in zip(candidates, weights):
        if weight >= PRUNE_EPSILON:
            rules.append(WeightedRule(candidate.with_id(len(rules)), float(weight)))
    return WeightedRuleModel(rules, float(bias), config, [float(v) for v in history])


def predict_scores(model: WeightedRuleModel, index: MatchIndex) -> np.ndarray:
    """Per-sentence probability: sigmoid(bias + sum of matching rule weights)."""
    z = np.full(index.corpus_size, model.bias, dtype=np.float64)
    for rule in model.rules:
        z += rule.weight * eval_expression(rule.expression, index)
    return _sigmoid(z)


@dataclass
class SelectionResult:
    chosen: RuleSet
    k: int
    train_metrics: Metrics
    selection_trace: list[tuple[int, float]]


def top_k_select(model: WeightedRuleModel, index: MatchIndex, k_max: int = 8) -> SelectionResult:
    """Greedy forward selection of up to k_max rules maximizing combined F1.

    At each step the rule with the best combined F1 is added; ties prefer
    the higher weight, then the shorter expression, then the lower id. The
    returned prefix is the one with the best F1 over all lengths 1..k_max
    (smallest k on ties), so adding a rule never has to lower the reported
    score.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if not model.rules:
        raise ValueError("cannot select from a model with no rules")

    label = index.label_bitset
    positives = int(np.count_nonzero(label))
    remaining = [(rule, eval_expression(rule.expression, index)) for rule in model.rules]
    current = np.zeros(index.corpus_size, dtype=bool)
    current_f1 = 0.0
    picks: list[tuple[WeightedRule, float, float]] = []  # (rule, f1_after, gain)

    for _ in range(min(k_max, len(remaining))):
        best_idx = -1
        best_key: tuple | None = None
        best_f1 = 0.0
        for idx, (rule, matches) in enumerate(remaining):
            _, f1 = _precision_f1(current | matches, label, positives)
            key = (f1, rule.weight, -len(rule.expression), -(rule.expression.expr_id or 0))
            if best_key is None or key > best_key:
                best_key, best_idx, best_f1 = key, idx, f1
        rule, matches = remaining.pop(best_idx)
        picks.append((rule, best_f1, best_f1 - current_f1))
        current |= matches
        current_f1 = best_f1

    best_k = 1 + max(range(len(picks)), key=lambda i: (picks[i][1], -i))
    chosen_rules = [rule for rule, _, _ in picks[:best_k]]
    chosen = RuleSet([rule.expression for rule in chosen_rules])
    train_metrics = compute_metrics(eval_ruleset(chosen, index), index)
    trace = [(rule.expression.expr_id, gain) for rule, _, gain in picks[:best_k]]
    return SelectionResult(chosen, best_k, train_metrics, trace)


def model_to_obj(model: WeightedRuleModel, catalog: PredicateCatalog) -> dict:
    return {
        "rules": [
            {
                "id": rule.expression.expr_id,
                "expression": render_expression(rule.expression, catalog),
                "weight": rule.weight,
            }
            for rule in model.rules
        ],
        "bias": model.bias,
        "config": asdict(model.training_config),
        "loss_history": list(model.loss_history),
    }


def save_model(model: WeightedRuleModel, path: str | Path, catalog: PredicateCatalog) -> None:
    obj = model_to_obj(model, catalog)
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path, catalog: PredicateCatalog) -> WeightedRuleModel:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict) or not isinstance(obj.get("rules"), list):
        raise ValueError("model file must be an object with a 'rules' list")
    rules = []
    for row in obj["rules"]:
        expr = parse_expression(row["expression"], catalog, expr_id=row.get("id"))
        rules.append(WeightedRule(expr, float(row["weight"])))
    config = LearnerConfig(**obj.get("config", {}))
    return WeightedRuleModel(rules, float(obj["bias"]), config, [float(v) for v in obj.get("loss_history", [])])


def model_fingerprint(model: WeightedRuleModel, catalog: PredicateCatalog) -> str:
    return fingerprint_obj(model_to_obj(model, catalog))
