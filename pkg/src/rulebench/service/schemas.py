"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class MetricsOut(BaseModel):
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


class PredicateOut(BaseModel):
    id: int
    name: str
    kind: str
    support: int


class RuleOut(BaseModel):
    id: int
    expression: str
    predicate_ids: list[int]
    weight: float | None
    metrics: MetricsOut
    status: str  # "approved" | "disapproved" | "none"
    custom: bool


class RuleListOut(BaseModel):
    rules: list[RuleOut]
    total: int


class HighlightedSentenceOut(BaseModel):
    sentence_id: int
    text: str
    tokens: list[str]
    label: int
    highlights: dict[str, list[list[int]]]


class ExampleSampleOut(BaseModel):
    rule_id: int
    seed: int
    true_positives: list[HighlightedSentenceOut]
    false_positives: list[HighlightedSentenceOut]


class DeltaOut(BaseModel):
    rule_id: int
    base: MetricsOut
    combined: MetricsOut
    delta_tp: int
    delta_fp: int
    new_match_count: int
    new_match_ids: list[int]


class ProgressOut(BaseModel):
    approved_count: int
    disapproved_count: int
    custom_count: int
    event_count: int
    combined: MetricsOut
    f1_history: list[float]


class DiffExampleOut(BaseModel):
    sentence_id: int
    text: str
    label: int
    tag: str


class PlaygroundOut(BaseModel):
    playground_id: str
    base_id: int
    expression: str
    predicate_ids: list[int]
    metrics: MetricsOut
    diff_vs_base: list[DiffExampleOut]
    diff_vs_previous: list[DiffExampleOut]


class OpenPlaygroundIn(BaseModel):
    expression_id: int


class EditIn(BaseModel):
    op: str = Field(pattern="^(add|drop)$")
    predicate: int | str


class CommitOut(BaseModel):
    new_id: int
    rule: RuleOut
    progress: ProgressOut


class SessionPathIn(BaseModel):
    path: str


class SavedOut(BaseModel):
    ok: bool
    path: str


class MetaOut(BaseModel):
    corpus_size: int
    positives: int
    negatives: int
    predicate_count: int
    rule_count: int
    custom_count: int
    model_fingerprint: str
    corpus_fingerprint: str
    session_id: str
