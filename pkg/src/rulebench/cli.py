"""Command-line interface.

Batch subcommands call the library directly and exit 0 on success, 1 when
inputs fail validation, and 2 on usage errors. ``serve`` starts the HTTP
service over the same core.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .corpus import (
    Corpus,
    CorpusError,
    DictionaryError,
    DictionarySet,
    corpus_fingerprint,
    dictionaries_fingerprint,
    load_corpus,
    load_dictionaries,
)
from .fingerprint import fingerprint_obj
from .learner import (
    LearnerConfig,
    generate_candidates,
    load_model,
    model_to_obj,
    save_model,
    top_k_select,
    train_weights,
)
from .predicates import CatalogConfig, build_catalog, build_match_index
from .rules import (
    ExpressionError,
    RuleSet,
    compute_metrics,
    eval_ruleset,
    load_ruleset,
    render_expression,
)
from .session import Session, SessionError
from .synthgen import SynthConfig, SynthesisError, generate, load_synth_config, write_outputs


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _load_corpus_or_fail(path: str) -> Corpus:
    try:
        return load_corpus(path)
    except (CorpusError, OSError) as exc:
        raise _fail(f"corpus {path}: {exc}")


def _load_dicts_or_fail(path: str | None) -> DictionarySet:
    if path is None:
        return DictionarySet({})
    try:
        return load_dictionaries(path)
    except (DictionaryError, OSError) as exc:
        raise _fail(f"dictionaries {path}: {exc}")


def _metrics_lines(metrics) -> list[str]:
    return [
        f"tp         {metrics.tp}",
        f"fp         {metrics.fp}",
        f"fn         {metrics.fn}",
        f"precision  {metrics.precision:.3f}",
        f"recall     {metrics.recall:.3f}",
        f"f1         {metrics.f1:.3f}",
    ]


def _metrics_obj(metrics) -> dict:
    return {
        "tp": metrics.tp,
        "fp": metrics.fp,
        "fn": metrics.fn,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
    }


@click.group()
def main():
    """Learn, evaluate, and curate conjunctive classification rules."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dicts", "dicts_path", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
def ingest(corpus_path, dicts_path, as_json):
    """Validate a corpus (and optional dictionaries) and print fingerprints."""
    corpus = _load_corpus_or_fail(corpus_path)
    info = {
        "sentences": len(corpus.sentences),
        "positives": corpus.positives,
        "negatives": corpus.negatives,
        "corpus_fingerprint": corpus_fingerprint(corpus),
    }
    if dicts_path is not None:
        dictionaries = _load_dicts_or_fail(dicts_path)
        info["dictionaries"] = len(dictionaries)
        info["dictionaries_fingerprint"] = dictionaries_fingerprint(dictionaries)
    if as_json:
        click.echo(json.dumps(info, sort_keys=True))
    else:
        for key, value in info.items():
            click.echo(f"{key}: {value}")


def _learner_config(config_path: str | None, seed: int | None) -> LearnerConfig:
    fields = {}
    if config_path is not None:
        try:
            obj = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise _fail(f"config {config_path}: {exc}")
        if not isinstance(obj, dict):
            raise _fail(f"config {config_path}: must be a JSON object")
        fields.update(obj)
    if seed is not None:
        fields["rng_seed"] = seed
    try:
        return LearnerConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise _fail(f"invalid learner config: {exc}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dicts", "dicts_path", type=click.Path(), default=None)
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
def learn(corpus_path, dicts_path, model_path, config_path, seed, as_json):
    """Train a weighted rule model and write it to --model."""
    config = _learner_config(config_path, seed)
    corpus = _load_corpus_or_fail(corpus_path)
    dictionaries = _load_dicts_or_fail(dicts_path)
    catalog = build_catalog(corpus, dictionaries, CatalogConfig(min_support=config.min_support))
    index = build_match_index(catalog, corpus, dictionaries)
    candidates = generate_candidates(index, config)
    if not candidates:
        raise _fail("no candidate expressions cleared min_support; nothing to train")
    model = train_weights(candidates, index, config)
    save_model(model, model_path, catalog)
    info = {
        "candidates": len(candidates),
        "rules": len(model.rules),
        "bias": model.bias,
        "final_loss": model.loss_history[-1],
        "model": str(model_path),
    }
    if as_json:
        click.echo(json.dumps(info, sort_keys=True))
    else:
        for key, value in info.items():
            click.echo(f"{key}: {value}")


@main.command("eval")
@click.option("--rules", "rules_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dicts", "dicts_path", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
def eval_cmd(rules_path, corpus_path, dicts_path, as_json):
    """Evaluate a rule-set file against a labeled corpus.

    The catalog is built with min_support 1 so any predicate observable in
    the corpus resolves; a rule naming anything else is an error.
    """
    corpus = _load_corpus_or_fail(corpus_path)
    dictionaries = _load_dicts_or_fail(dicts_path)
    catalog = build_catalog(corpus, dictionaries, CatalogConfig(min_support=1))
    try:
        entries = load_ruleset(rules_path, catalog)
    except (ExpressionError, OSError, json.JSONDecodeError) as exc:
        raise _fail(f"rules {rules_path}: {exc}")
    index = build_match_index(catalog, corpus, dictionaries)
    ruleset = RuleSet([expr for expr, _ in entries])
    metrics = compute_metrics(eval_ruleset(ruleset, index), index)
    if as_json:
        click.echo(json.dumps({"rules": len(entries), **_metrics_obj(metrics)}, sort_keys=True))
    else:
        click.echo(f"rules      {len(entries)}")
        for line in _metrics_lines(metrics):
            click.echo(line)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dicts", "dicts_path", type=click.Path(), default=None)
@click.option("--k-max", type=int, default=8, show_default=True)
@click.option("--rules", "rules_out", type=click.Path(), default=None, help="Write the chosen rule set here.")
@click.option("--json", "as_json", is_flag=True, default=False)
def topk(model_path, corpus_path, dicts_path, k_max, rules_out, as_json):
    """Pick the best small disjunction from a trained model."""
    corpus = _load_corpus_or_fail(corpus_path)
    dictionaries = _load_dicts_or_fail(dicts_path)
    catalog, index, model = _load_model_workspace(model_path, corpus, dictionaries)
    try:
        result = top_k_select(model, index, k_max)
    except ValueError as exc:
        raise _fail(str(exc))
    if rules_out is not None:
        from .rules import save_ruleset

        save_ruleset(rules_out, [(expr, None) for expr in result.chosen.expressions], catalog)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "k": result.k,
                    "expressions": [render_expression(e, catalog) for e in result.chosen.expressions],
                    "trace": [{"id": i, "f1_gain": g} for i, g in result.selection_trace],
                    **_metrics_obj(result.train_metrics),
                },
                sort_keys=True,
            )
        )
    else:
        click.echo(f"k          {result.k}")
        for line in _metrics_lines(result.train_metrics):
            click.echo(line)
        for expr_id, gain in result.selection_trace:
            expr = next(e for e in result.chosen.expressions if e.expr_id == expr_id)
            click.echo(f"  +{gain:.4f}  [{expr_id}] {render_expression(expr, catalog)}")


def _load_model_workspace(model_path, corpus, dictionaries):
    try:
        model_obj = json.loads(Path(model_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(f"model {model_path}: {exc}")
    min_support = int(model_obj.get("config", {}).get("min_support", 5))
    catalog = build_catalog(corpus, dictionaries, CatalogConfig(min_support=min_support))
    index = build_match_index(catalog, corpus, dictionaries)
    try:
        model = load_model(model_path, catalog)
    except (ExpressionError, ValueError, KeyError) as exc:
        raise _fail(f"model {model_path}: {exc}")
    return catalog, index, model


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True, default=False)
def synth(config_path, seed, out_dir, as_json):
    """Generate a synthetic corpus with planted rules into --out."""
    try:
        config = load_synth_config(config_path) if config_path else SynthConfig()
        if seed is not None:
            fields = {**config.__dict__, "rng_seed": seed}
            config = SynthConfig(**fields)
        result = generate(config)
    except (ValueError, SynthesisError, OSError) as exc:
        raise _fail(f"synth: {exc}")
    paths = write_outputs(result, out_dir)
    info = {
        "train_sentences": len(result.train.sentences),
        "train_positives": result.train.positives,
        "test_sentences": len(result.test.sentences),
        "test_positives": result.test.positives,
        "planted_rules": result.planted_expressions,
    }
    info.update({f"{key}_path": value for key, value in paths.items()})
    if as_json:
        click.echo(json.dumps(info, sort_keys=True))
    else:
        for key, value in info.items():
            click.echo(f"{key}: {value}")


@main.command()
@click.option("--session", "session_path", required=True, type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--rules", "rules_out", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True, default=False)
def export(session_path, model_path, rules_out, as_json):
    """Write a session's approved expressions as a weight-free rule set.

    Works textually from the session and model files: approved ids resolve
    to the expression strings stored in either file.
    """
    try:
        session_obj = json.loads(Path(session_path).read_text(encoding="utf-8"))
        model_obj = json.loads(Path(model_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise _fail(f"export: {exc}")
    if fingerprint_obj(model_obj) != session_obj.get("model_fingerprint"):
        raise _fail("export: session was created against a different model file")
    expressions: dict[int, str] = {}
    for row in model_obj.get("rules", []):
        expressions[row["id"]] = row["expression"]
    for row in session_obj.get("custom_expressions", []):
        expressions[row["id"]] = row["expression"]
    approved = session_obj.get("approved", [])
    if not approved:
        raise _fail("export: session has no approved expressions")
    missing = [i for i in approved if i not in expressions]
    if missing:
        raise _fail(f"export: approved ids {missing} not found in model or session")
    obj = {"rules": [{"id": i, "expression": expressions[i], "weight": None} for i in approved]}
    Path(rules_out).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if as_json:
        click.echo(json.dumps({"rules": len(approved), "path": rules_out}, sort_keys=True))
    else:
        click.echo(f"wrote {len(approved)} rules to {rules_out}")


@main.command()
@click.option("--session", "session_path", required=True, type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dicts", "dicts_path", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True, default=False)
def replay(session_path, model_path, corpus_path, dicts_path, as_json):
    """Rebuild a session from its event log and check it matches the file."""
    corpus = _load_corpus_or_fail(corpus_path)
    dictionaries = _load_dicts_or_fail(dicts_path)
    catalog, index, model = _load_model_workspace(model_path, corpus, dictionaries)
    try:
        stored = Session.load(session_path, model, index, corpus, catalog)
    except (SessionError, ExpressionError, OSError, json.JSONDecodeError, KeyError) as exc:
        raise _fail(f"session {session_path}: {exc}")
    rebuilt = Session.replay(stored.event_log, model, index, corpus, catalog)
    mismatches = []
    if rebuilt.approved != stored.approved:
        mismatches.append(f"approved: replay {rebuilt.approved} != stored {stored.approved}")
    if rebuilt.disapproved != stored.disapproved:
        mismatches.append(
            f"disapproved: replay {sorted(rebuilt.disapproved)} != stored {sorted(stored.disapproved)}"
        )
    if rebuilt.custom_expressions != stored.custom_expressions:
        mismatches.append("custom expressions differ between replay and stored state")
    if mismatches:
        raise _fail("replay mismatch: " + "; ".join(mismatches))
    info = {
        "events": len(stored.event_log),
        "approved": len(stored.approved),
        "disapproved": len(stored.disapproved),
        "custom_expressions": len(stored.custom_expressions),
        "combined": _metrics_obj(rebuilt.combined_metrics()),
        "consistent": True,
    }
    if as_json:
        click.echo(json.dumps(info, sort_keys=True))
    else:
        click.echo(f"replayed {info['events']} events: state consistent")
        for line in _metrics_lines(rebuilt.combined_metrics()):
            click.echo(line)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--dicts", "dicts_path", type=click.Path(), default=None)
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--session", "session_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--ui-dir", "ui_dir", type=click.Path(), default=None, help="Directory of built UI assets to serve at /ui.")
def serve(corpus_path, dicts_path, model_path, session_path, host, port, ui_dir):
    """Run the HTTP service for interactive curation."""
    import uvicorn

    from .service import build_workspace, create_app

    if dicts_path is None:
        raise _fail("serve requires --dicts (rules may reference dictionaries)")
    try:
        workspace = build_workspace(corpus_path, dicts_path, model_path, session_path)
    except (CorpusError, DictionaryError, ExpressionError, SessionError, ValueError, OSError) as exc:
        raise _fail(f"serve: {exc}")
    app = create_app(workspace, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
