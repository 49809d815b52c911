"""Event-sourced curation sessions.

A session records a person's verdicts over a trained model's rules:
approvals, disapprovals, and custom expressions built in the playground.
Every mutation appends an event, and replaying the event log against the
same model and corpus reconstructs the exact state, so a session file is
both a save format and an audit trail. Fingerprints of the model and corpus
are stored at creation and checked at load, which catches a session being
opened against artifacts it was not built from.

The curated output is deliberately weight-free: the export is just the
disjunction of approved expressions.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import numpy as np

from .corpus import Corpus, corpus_fingerprint
from .learner import WeightedRuleModel, model_fingerprint
from .predicates import MatchIndex, PredicateCatalog
from .rules import (
    DiffExample,
    LinguisticExpression,
    Metrics,
    RuleSet,
    add_predicate,
    compute_metrics,
    diff_examples,
    drop_predicate,
    eval_expression,
    eval_ruleset,
    parse_expression,
    render_expression,
    save_ruleset,
)


class SessionError(ValueError):
    pass


class UnknownExpressionError(SessionError):
    pass


class AlreadyApprovedError(SessionError):
    pass


class DuplicateExpressionError(SessionError):
    def __init__(self, message: str, existing_id: int):
        super().__init__(message)
        self.existing_id = existing_id


class FingerprintMismatchError(SessionError):
    pass


class EmptyApprovedError(SessionError):
    pass


class EventKind(str, Enum):
    APPROVE = "Approve"
    DISAPPROVE = "Disapprove"
    UNMARK = "Unmark"
    CREATE_CUSTOM = "CreateCustom"
    EDIT_CUSTOM = "EditCustom"


@dataclass(frozen=True)
class Event:
    sequence: int
    kind: EventKind
    payload: dict
    timestamp: str


@dataclass
class PlaygroundState:
    """A scratch expression being edited, with live quality feedback."""

    base_id: int
    base_expression: LinguisticExpression
    working_expression: LinguisticExpression
    metrics: Metrics
    diff_vs_base: list[DiffExample]
    diff_vs_previous: list[DiffExample]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


class Session:
    """Curation state bound to one model and one corpus."""

    def __init__(
        self,
        model: WeightedRuleModel,
        index: MatchIndex,
        corpus: Corpus,
        catalog: PredicateCatalog,
        session_id: str | None = None,
    ):
        self.model = model
        self.index = index
        self.corpus = corpus
        self.catalog = catalog
        self.session_id = session_id or uuid.uuid4().hex
        self.model_fingerprint = model_fingerprint(model, catalog)
        self.corpus_fingerprint = corpus_fingerprint(corpus)
        self.created_at = _now()
        self.updated_at = self.created_at
        self.approved: list[int] = []
        self.disapproved: set[int] = set()
        self.custom_expressions: dict[int, LinguisticExpression] = {}
        self.event_log: list[Event] = []
        self._by_id: dict[int, LinguisticExpression] = {}
        for rule in model.rules:
            if rule.expression.expr_id is None:
                raise SessionError("model rules must carry expression ids")
            self._by_id[rule.expression.expr_id] = rule.expression
        self._next_custom_id = max(self._by_id, default=-1) + 1

    # -- lookup ----------------------------------------------------------

    def resolve(self, expr_id: int) -> LinguisticExpression:
        expr = self._by_id.get(expr_id)
        if expr is None:
            raise UnknownExpressionError(f"unknown expression id {expr_id}")
        return expr

    def expression_ids(self) -> list[int]:
        return sorted(self._by_id)

    def is_custom(self, expr_id: int) -> bool:
        return expr_id in self.custom_expressions

    # -- events ----------------------------------------------------------

    def _append_event(self, kind: EventKind, payload: dict) -> None:
        self.event_log.append(Event(len(self.event_log), kind, payload, _now()))
        self.updated_at = _now()

    # -- verdicts ---------------------------------------------------------

    def approve(self, expr_id: int) -> Metrics:
        """Mark an expression approved and return the new combined metrics.

        Approving removes any standing disapproval; approving twice is an
        error surfaced to the caller rather than a silent no-op.
        """
        self.resolve(expr_id)
        if expr_id in self.approved:
            raise AlreadyApprovedError(f"expression {expr_id} is already approved")
        self.disapproved.discard(expr_id)
        self.approved.append(expr_id)
        self._append_event(EventKind.APPROVE, {"expression_id": expr_id})
        return self.combined_metrics()

    def disapprove(self, expr_id: int) -> None:
        self.resolve(expr_id)
        if expr_id in self.approved:
            self.approved.remove(expr_id)
        self.disapproved.add(expr_id)
        self._append_event(EventKind.DISAPPROVE, {"expression_id": expr_id})

    def unmark(self, expr_id: int) -> None:
        """Clear any verdict. Always recorded, even when nothing changes."""
        self.resolve(expr_id)
        if expr_id in self.approved:
            self.approved.remove(expr_id)
        self.disapproved.discard(expr_id)
        self._append_event(EventKind.UNMARK, {"expression_id": expr_id})

    # -- combined state ---------------------------------------------------

    def approved_ruleset(self) -> RuleSet:
        return RuleSet([self.resolve(i) for i in self.approved])

    def combined_matches(self) -> np.ndarray:
        return eval_ruleset(self.approved_ruleset(), self.index)

    def combined_metrics(self) -> Metrics:
        return compute_metrics(self.combined_matches(), self.index)

    # -- playground -------------------------------------------------------

    def open_playground(self, expr_id: int) -> PlaygroundState:
        base = self.resolve(expr_id)
        metrics = compute_metrics(eval_expression(base, self.index), self.index)
        return PlaygroundState(
            base_id=expr_id,
            base_expression=base,
            working_expression=base.with_id(None),
            metrics=metrics,
            diff_vs_base=[],
            diff_vs_previous=[],
        )

    def commit_playground(self, state: PlaygroundState) -> int:
        """Store the working expression as a new custom expression.

        Committing a duplicate of any known expression (a model rule or an
        earlier custom) is rejected, naming the existing id. The new
        expression is not approved automatically.
        """
        working = state.working_expression
        for existing_id, expr in self._by_id.items():
            if expr == working:
                raise DuplicateExpressionError(
                    f"expression duplicates existing id {existing_id}", existing_id
                )
        new_id = self._next_custom_id
        self._next_custom_id += 1
        stored = working.with_id(new_id)
        self.custom_expressions[new_id] = stored
        self._by_id[new_id] = stored
        kind = EventKind.EDIT_CUSTOM if state.base_id in self.custom_expressions else EventKind.CREATE_CUSTOM
        self._append_event(
            kind,
            {
                "expression_id": new_id,
                "expression": render_expression(stored, self.catalog),
                "base_id": state.base_id,
            },
        )
        return new_id

    # -- persistence ------------------------------------------------------

    def to_obj(self) -> dict:
        return {
            "session_id": self.session_id,
            "model_fingerprint": self.model_fingerprint,
            "corpus_fingerprint": self.corpus_fingerprint,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "approved": list(self.approved),
            "disapproved": sorted(self.disapproved),
            "custom_expressions": [
                {"id": i, "expression": render_expression(self.custom_expressions[i], self.catalog)}
                for i in sorted(self.custom_expressions)
            ],
            "event_log": [
                {
                    "sequence": e.sequence,
                    "kind": e.kind.value,
                    "payload": e.payload,
                    "timestamp": e.timestamp,
                }
                for e in self.event_log
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(
        cls,
        path: str | Path,
        model: WeightedRuleModel,
        index: MatchIndex,
        corpus: Corpus,
        catalog: PredicateCatalog,
    ) -> "Session":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        session = cls(model, index, corpus, catalog, session_id=obj["session_id"])
        if obj["model_fingerprint"] != session.model_fingerprint:
            raise FingerprintMismatchError(
                "session was created against a different model "
                f"({obj['model_fingerprint'][:12]} != {session.model_fingerprint[:12]})"
            )
        if obj["corpus_fingerprint"] != session.corpus_fingerprint:
            raise FingerprintMismatchError(
                "session was created against a different corpus "
                f"({obj['corpus_fingerprint'][:12]} != {session.corpus_fingerprint[:12]})"
            )
        session.created_at = obj["created_at"]
        session.updated_at = obj["updated_at"]
        for row in obj.get("custom_expressions", []):
            expr = parse_expression(row["expression"], catalog, expr_id=row["id"])
            session.custom_expressions[row["id"]] = expr
            session._by_id[row["id"]] = expr
            session._next_custom_id = max(session._next_custom_id, row["id"] + 1)
        session.approved = list(obj.get("approved", []))
        session.disapproved = set(obj.get("disapproved", []))
        for row in obj.get("event_log", []):
            session.event_log.append(
                Event(row["sequence"], EventKind(row["kind"]), row["payload"], row["timestamp"])
            )
        for expr_id in session.approved:
            session.resolve(expr_id)
        return session

    # -- replay -----------------------------------------------------------

    @classmethod
    def replay(
        cls,
        events: list[Event],
        model: WeightedRuleModel,
        index: MatchIndex,
        corpus: Corpus,
        catalog: PredicateCatalog,
        session_id: str | None = None,
    ) -> "Session":
        """Rebuild state purely from an event log.

        Replay applies each event's effect without appending new events;
        the resulting approved/disapproved sets and custom expressions are
        exactly those of the session that produced the log.
        """
        session = cls(model, index, corpus, catalog, session_id=session_id)
        for event in events:
            payload = event.payload
            expr_id = payload["expression_id"]
            if event.kind is EventKind.APPROVE:
                if expr_id not in session.approved:
                    session.disapproved.discard(expr_id)
                    session.approved.append(expr_id)
            elif event.kind is EventKind.DISAPPROVE:
                if expr_id in session.approved:
                    session.approved.remove(expr_id)
                session.disapproved.add(expr_id)
            elif event.kind is EventKind.UNMARK:
                if expr_id in session.approved:
                    session.approved.remove(expr_id)
                session.disapproved.discard(expr_id)
            elif event.kind in (EventKind.CREATE_CUSTOM, EventKind.EDIT_CUSTOM):
                expr = parse_expression(payload["expression"], catalog, expr_id=expr_id)
                session.custom_expressions[expr_id] = expr
                session._by_id[expr_id] = expr
                session._next_custom_id = max(session._next_custom_id, expr_id + 1)
            session.event_log.append(event)
        return session

    # -- export -----------------------------------------------------------

    def export_entries(self) -> list[tuple[LinguisticExpression, None]]:
        if not self.approved:
            raise EmptyApprovedError("nothing to export: no approved expressions")
        return [(self.resolve(i), None) for i in self.approved]

    def export_ruleset(self, path: str | Path) -> None:
        """Write the approved expressions as a weight-free rule-set file."""
        save_ruleset(path, self.export_entries(), self.catalog)


def playground_edit(
    state: PlaygroundState,
    op: str,
    pred_id: int,
    session: Session,
    diff_k: int = 8,
    diff_seed: int = 0,
) -> PlaygroundState:
    """Apply one add/drop edit, recomputing metrics and example diffs.

    Returns a new state; the input state is untouched so a service can keep
    the previous step for undo.
    """
    if op == "add":
        new_working = add_predicate(state.working_expression, pred_id)
    elif op == "drop":
        new_working = drop_predicate(state.working_expression, pred_id)
    else:
        raise SessionError(f"unknown playground edit op {op!r}")
    index, corpus = session.index, session.corpus
    return PlaygroundState(
        base_id=state.base_id,
        base_expression=state.base_expression,
        working_expression=new_working,
        metrics=compute_metrics(eval_expression(new_working, index), index),
        diff_vs_base=diff_examples(state.base_expression, new_working, index, corpus, diff_k, diff_seed),
        diff_vs_previous=diff_examples(
            state.working_expression, new_working, index, corpus, diff_k, diff_seed
        ),
    )
