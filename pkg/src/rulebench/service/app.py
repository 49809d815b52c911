"""HTTP service exposing one curation workspace.

The workspace binds a corpus, its predicate catalog and match index, a
trained model, and a live session. All mutating endpoints serialize on a
single lock so concurrent verdicts interleave cleanly and the event log
stays totally ordered. Error bodies always carry a machine-readable code::

    {"detail": {"code": "unknown_rule", "message": "..."}}

Responses are deterministic for given inputs and seeds; the only wall-clock
values are the explicitly named event timestamps.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from ..corpus import Corpus, DictionarySet, load_corpus, load_dictionaries
from ..learner import WeightedRuleModel, load_model
from ..predicates import CatalogConfig, MatchIndex, PredicateCatalog, build_catalog, build_match_index
from ..rules import (
    ExpressionError,
    LinguisticExpression,
    Metrics,
    compute_metrics,
    delta_report,
    eval_expression,
    eval_ruleset,
    filter_rules,
    rank_rules,
    render_expression,
    sample_examples,
    RuleSet,
)
from ..session import (
    AlreadyApprovedError,
    DuplicateExpressionError,
    EventKind,
    FingerprintMismatchError,
    PlaygroundState,
    Session,
    SessionError,
    UnknownExpressionError,
    playground_edit,
)
from . import schemas


@dataclass
class Workspace:
    corpus: Corpus
    dictionaries: DictionarySet
    catalog: PredicateCatalog
    index: MatchIndex
    model: WeightedRuleModel
    session: Session
    playgrounds: dict[str, PlaygroundState] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _playground_counter: int = 0
    _metrics_cache: dict[tuple[int, ...], Metrics] = field(default_factory=dict)

    def metrics_for(self, expr: LinguisticExpression) -> Metrics:
        cached = self._metrics_cache.get(expr.predicate_ids)
        if cached is None:
            cached = compute_metrics(eval_expression(expr, self.index), self.index)
            self._metrics_cache[expr.predicate_ids] = cached
        return cached

    def next_playground_id(self) -> str:
        self._playground_counter += 1
        return f"pg-{self._playground_counter}"


def build_workspace(
    corpus_path: str | Path,
    dictionaries_path: str | Path,
    model_path: str | Path,
    session_path: str | Path | None = None,
) -> Workspace:
    """Load artifacts and assemble a workspace. The catalog is rebuilt with
    the min_support recorded in the model so expression names resolve to
    the same predicates the model was trained against."""
    corpus = load_corpus(corpus_path)
    dictionaries = load_dictionaries(dictionaries_path)
    # peek at the model config before the catalog exists
    import json

    model_obj = json.loads(Path(model_path).read_text(encoding="utf-8"))
    min_support = int(model_obj.get("config", {}).get("min_support", 5))
    catalog = build_catalog(corpus, dictionaries, CatalogConfig(min_support=min_support))
    index = build_match_index(catalog, corpus, dictionaries)
    model = load_model(model_path, catalog)
    if session_path is not None:
        session = Session.load(session_path, model, index, corpus, catalog)
    else:
        session = Session(model, index, corpus, catalog)
    return Workspace(corpus, dictionaries, catalog, index, model, session)


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _metrics_out(m: Metrics) -> schemas.MetricsOut:
    return schemas.MetricsOut(tp=m.tp, fp=m.fp, fn=m.fn, precision=m.precision, recall=m.recall, f1=m.f1)


def create_app(workspace: Workspace, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="rulebench", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    ws = workspace

    def rule_out(expr_id: int) -> schemas.RuleOut:
        session = ws.session
        expr = session.resolve(expr_id)
        weight = None
        if not session.is_custom(expr_id):
            for rule in ws.model.rules:
                if rule.expression.expr_id == expr_id:
                    weight = rule.weight
                    break
        if expr_id in session.approved:
            status = "approved"
        elif expr_id in session.disapproved:
            status = "disapproved"
        else:
            status = "none"
        return schemas.RuleOut(
            id=expr_id,
            expression=render_expression(expr, ws.catalog),
            predicate_ids=list(expr.predicate_ids),
            weight=weight,
            metrics=_metrics_out(ws.metrics_for(expr)),
            status=status,
            custom=session.is_custom(expr_id),
        )

    def progress_out() -> schemas.ProgressOut:
        session = ws.session
        combined = session.combined_metrics()
        f1_history: list[float] = []
        approved: list[int] = []
        # one point per event: the combined F1 after that event took effect
        for event in session.event_log:
            expr_id = event.payload["expression_id"]
            if event.kind is EventKind.APPROVE:
                if expr_id not in approved:
                    approved.append(expr_id)
            elif event.kind in (EventKind.DISAPPROVE, EventKind.UNMARK):
                if expr_id in approved:
                    approved.remove(expr_id)
            exprs = [session.resolve(i) for i in approved if i in session._by_id]
            matches = eval_ruleset(RuleSet(exprs), ws.index)
            f1_history.append(compute_metrics(matches, ws.index).f1)
        return schemas.ProgressOut(
            approved_count=len(session.approved),
            disapproved_count=len(session.disapproved),
            custom_count=len(session.custom_expressions),
            event_count=len(session.event_log),
            combined=_metrics_out(combined),
            f1_history=f1_history,
        )

    def resolve_predicate_ref(ref: int | str) -> int:
        if isinstance(ref, int):
            if not 0 <= ref < len(ws.catalog):
                raise _error(404, "unknown_predicate", f"unknown predicate id {ref}")
            return ref
        pred_id = ws.catalog.by_name.get(ref)
        if pred_id is None:
            raise _error(404, "unknown_predicate", f"unknown predicate {ref!r}")
        return pred_id

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/meta", response_model=schemas.MetaOut)
    def meta():
        return schemas.MetaOut(
            corpus_size=len(ws.corpus.sentences),
            positives=ws.corpus.positives,
            negatives=ws.corpus.negatives,
            predicate_count=len(ws.catalog),
            rule_count=len(ws.model.rules),
            custom_count=len(ws.session.custom_expressions),
            model_fingerprint=ws.session.model_fingerprint,
            corpus_fingerprint=ws.session.corpus_fingerprint,
            session_id=ws.session.session_id,
        )

    @app.get("/predicates", response_model=list[schemas.PredicateOut])
    def predicates():
        popcounts = ws.index.popcounts()
        return [
            schemas.PredicateOut(
                id=p.id, name=p.display_name, kind=p.kind.value, support=int(popcounts[p.id])
            )
            for p in ws.catalog.predicates
        ]

    @app.get("/rules", response_model=schemas.RuleListOut)
    def list_rules(
        rank_by: str = Query("f1"),
        min_precision: float | None = Query(None),
        min_recall: float | None = Query(None),
        min_f1: float | None = Query(None),
        require: str | None = Query(None),
        exclude: str | None = Query(None),
        status: str = Query("all"),
    ):
        if rank_by not in ("precision", "recall", "f1"):
            raise _error(422, "invalid_filter", f"rank_by must be precision, recall, or f1, not {rank_by!r}")
        if status not in ("all", "active", "approved", "disapproved", "unreviewed"):
            raise _error(422, "invalid_filter", f"unknown status filter {status!r}")
        thresholds = {}
        if min_precision is not None:
            thresholds["precision"] = min_precision
        if min_recall is not None:
            thresholds["recall"] = min_recall
        if min_f1 is not None:
            thresholds["f1"] = min_f1

        def parse_refs(raw: str | None) -> set[int]:
            ids: set[int] = set()
            if raw:
                for part in raw.split(","):
                    part = part.strip()
                    if part:
                        ids.add(resolve_predicate_ref(part))
            return ids

        required, excluded = parse_refs(require), parse_refs(exclude)
        session = ws.session
        scored = [
            (session.resolve(expr_id), ws.metrics_for(session.resolve(expr_id)))
            for expr_id in session.expression_ids()
        ]
        kept = filter_rules(scored, thresholds, required or None, excluded or None)
        ranked = rank_rules(kept, rank_by)

        def status_of(expr_id: int) -> str:
            if expr_id in session.approved:
                return "approved"
            if expr_id in session.disapproved:
                return "disapproved"
            return "none"

        rows = []
        for expr, _ in ranked:
            s = status_of(expr.expr_id)
            if status == "active" and s == "disapproved":
                continue
            if status == "approved" and s != "approved":
                continue
            if status == "disapproved" and s != "disapproved":
                continue
            if status == "unreviewed" and s != "none":
                continue
            rows.append(rule_out(expr.expr_id))
        return schemas.RuleListOut(rules=rows, total=len(rows))

    @app.get("/rules/{rule_id}", response_model=schemas.RuleOut)
    def get_rule(rule_id: int):
        try:
            return rule_out(rule_id)
        except UnknownExpressionError as exc:
            raise _error(404, "unknown_rule", str(exc))

    @app.get("/rules/{rule_id}/examples", response_model=schemas.ExampleSampleOut)
    def rule_examples(rule_id: int, seed: int = Query(0)):
        try:
            expr = ws.session.resolve(rule_id)
        except UnknownExpressionError as exc:
            raise _error(404, "unknown_rule", str(exc))
        sample = sample_examples(expr, ws.index, ws.corpus, ws.catalog, ws.dictionaries, seed=seed)
        obj = sample.to_obj()
        return schemas.ExampleSampleOut(
            rule_id=rule_id,
            seed=seed,
            true_positives=obj["true_positives"],
            false_positives=obj["false_positives"],
        )

    @app.get("/rules/{rule_id}/delta", response_model=schemas.DeltaOut)
    def rule_delta(rule_id: int):
        session = ws.session
        try:
            expr = session.resolve(rule_id)
        except UnknownExpressionError as exc:
            raise _error(404, "unknown_rule", str(exc))
        if rule_id in session.approved:
            raise _error(409, "already_approved", f"expression {rule_id} is already approved")
        report = delta_report(session.approved_ruleset(), expr, ws.index)
        return schemas.DeltaOut(
            rule_id=rule_id,
            base=_metrics_out(report.base_metrics),
            combined=_metrics_out(report.combined_metrics),
            delta_tp=report.delta_tp,
            delta_fp=report.delta_fp,
            new_match_count=len(report.new_match_ids),
            new_match_ids=list(report.new_match_ids),
        )

    @app.post("/rules/{rule_id}/approve", response_model=schemas.ProgressOut)
    def approve(rule_id: int):
        with ws.lock:
            try:
                ws.session.approve(rule_id)
            except UnknownExpressionError as exc:
                raise _error(404, "unknown_rule", str(exc))
            except AlreadyApprovedError as exc:
                raise _error(409, "already_approved", str(exc))
            return progress_out()

    @app.post("/rules/{rule_id}/disapprove", response_model=schemas.ProgressOut)
    def disapprove(rule_id: int):
        with ws.lock:
            try:
                ws.session.disapprove(rule_id)
            except UnknownExpressionError as exc:
                raise _error(404, "unknown_rule", str(exc))
            return progress_out()

    @app.post("/rules/{rule_id}/unmark", response_model=schemas.ProgressOut)
    def unmark(rule_id: int):
        with ws.lock:
            try:
                ws.session.unmark(rule_id)
            except UnknownExpressionError as exc:
                raise _error(404, "unknown_rule", str(exc))
            return progress_out()

    @app.get("/progress", response_model=schemas.ProgressOut)
    def progress():
        return progress_out()

    def playground_out(pid: str, state: PlaygroundState) -> schemas.PlaygroundOut:
        return schemas.PlaygroundOut(
            playground_id=pid,
            base_id=state.base_id,
            expression=render_expression(state.working_expression, ws.catalog),
            predicate_ids=list(state.working_expression.predicate_ids),
            metrics=_metrics_out(state.metrics),
            diff_vs_base=[schemas.DiffExampleOut(**d.to_obj()) for d in state.diff_vs_base],
            diff_vs_previous=[schemas.DiffExampleOut(**d.to_obj()) for d in state.diff_vs_previous],
        )

    @app.post("/playground", response_model=schemas.PlaygroundOut)
    def open_playground(body: schemas.OpenPlaygroundIn):
        with ws.lock:
            try:
                state = ws.session.open_playground(body.expression_id)
            except UnknownExpressionError as exc:
                raise _error(404, "unknown_rule", str(exc))
            pid = ws.next_playground_id()
            ws.playgrounds[pid] = state
            return playground_out(pid, state)

    @app.get("/playground/{pid}", response_model=schemas.PlaygroundOut)
    def get_playground(pid: str):
        state = ws.playgrounds.get(pid)
        if state is None:
            raise _error(404, "unknown_playground", f"unknown playground {pid!r}")
        return playground_out(pid, state)

    @app.post("/playground/{pid}/edit", response_model=schemas.PlaygroundOut)
    def edit_playground(pid: str, body: schemas.EditIn):
        with ws.lock:
            state = ws.playgrounds.get(pid)
            if state is None:
                raise _error(404, "unknown_playground", f"unknown playground {pid!r}")
            pred_id = resolve_predicate_ref(body.predicate)
            try:
                new_state = playground_edit(state, body.op, pred_id, ws.session)
            except (ExpressionError, SessionError) as exc:
                raise _error(422, "invalid_edit", str(exc))
            ws.playgrounds[pid] = new_state
            return playground_out(pid, new_state)

    @app.post("/playground/{pid}/commit", response_model=schemas.CommitOut)
    def commit_playground(pid: str):
        with ws.lock:
            state = ws.playgrounds.get(pid)
            if state is None:
                raise _error(404, "unknown_playground", f"unknown playground {pid!r}")
            try:
                new_id = ws.session.commit_playground(state)
            except DuplicateExpressionError as exc:
                raise _error(409, "duplicate_expression", str(exc))
            del ws.playgrounds[pid]
            return schemas.CommitOut(new_id=new_id, rule=rule_out(new_id), progress=progress_out())

    @app.post("/session/save", response_model=schemas.SavedOut)
    def save_session(body: schemas.SessionPathIn):
        with ws.lock:
            ws.session.save(body.path)
            return schemas.SavedOut(ok=True, path=body.path)

    @app.post("/session/load", response_model=schemas.ProgressOut)
    def load_session(body: schemas.SessionPathIn):
        with ws.lock:
            try:
                ws.session = Session.load(body.path, ws.model, ws.index, ws.corpus, ws.catalog)
            except FileNotFoundError:
                raise _error(404, "unknown_session", f"no session file at {body.path!r}")
            except FingerprintMismatchError as exc:
                raise _error(409, "fingerprint_mismatch", str(exc))
            ws.playgrounds.clear()
            return progress_out()

    @app.get("/session")
    def get_session():
        return ws.session.to_obj()

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
