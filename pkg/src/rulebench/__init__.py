"""rulebench: learn, inspect, and curate conjunctive classification rules
over frame-annotated text."""

from .corpus import (
    Corpus,
    Dictionary,
    DictionarySet,
    Sentence,
    SlsFrame,
    load_corpus,
    load_dictionaries,
    validate_corpus,
)
from .learner import LearnerConfig, WeightedRuleModel, generate_candidates, top_k_select, train_weights
from .predicates import (
    CatalogConfig,
    MatchIndex,
    Predicate,
    PredicateCatalog,
    build_catalog,
    build_match_index,
    evaluate_predicate,
)
from .rules import (
    LinguisticExpression,
    Metrics,
    RuleSet,
    compute_metrics,
    eval_expression,
    eval_ruleset,
    parse_expression,
    render_expression,
)
from .session import Session
from .synthgen import SynthConfig, generate

__version__ = "0.1.0"
