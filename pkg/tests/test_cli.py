import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from rulebench.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def synth_dir(runner, tmp_path):
    out = tmp_path / "data"
    config = tmp_path / "synth.json"
    config.write_text(
        json.dumps({"rng_seed": 29, "n_sentences": 280, "min_rule_support": 5})
    )
    result = runner.invoke(main, ["synth", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture()
def noiseless_dir(runner, tmp_path):
    out = tmp_path / "clean"
    config = tmp_path / "clean.json"
    config.write_text(
        json.dumps(
            {"rng_seed": 31, "n_sentences": 260, "label_noise": 0.0, "min_rule_support": 5}
        )
    )
    result = runner.invoke(main, ["synth", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


class TestSynth:
    def test_two_runs_byte_identical(self, runner, tmp_path):
        args = ["synth", "--seed", "57", "--out"]
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"n_sentences": 200, "min_rule_support": 4}))
        base = ["synth", "--config", str(config), "--seed", "57", "--out"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, base + [str(a)]).exit_code == 0
        assert runner.invoke(main, base + [str(b)]).exit_code == 0
        for name in ("train.jsonl", "test.jsonl", "dictionaries.json", "planted_rules.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_json_reports_planted(self, runner, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"rng_seed": 3, "n_sentences": 200, "min_rule_support": 4}))
        result = runner.invoke(main, ["synth", "--config", str(config), "--out", str(tmp_path / "o"), "--json"])
        assert result.exit_code == 0
        info = json.loads(result.output)
        assert info["train_sentences"] + info["test_sentences"] == 200
        assert len(info["planted_rules"]) == 5

    def test_infeasible_config_fails(self, runner, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"n_sentences": 30, "min_rule_support": 400}))
        result = runner.invoke(main, ["synth", "--config", str(config), "--out", str(tmp_path / "o")])
        assert result.exit_code == 1
        assert "synth" in result.output


class TestIngest:
    def test_reports_counts_and_fingerprints(self, runner, synth_dir):
        result = runner.invoke(
            main,
            [
                "ingest",
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
                "--json",
            ],
        )
        assert result.exit_code == 0
        info = json.loads(result.output)
        assert info["sentences"] == info["positives"] + info["negatives"]
        assert len(info["corpus_fingerprint"]) == 64
        assert len(info["dictionaries_fingerprint"]) == 64

    def test_rejects_malformed_corpus(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": 0, "broken\n')
        result = runner.invoke(main, ["ingest", "--corpus", str(bad)])
        assert result.exit_code == 1
        assert "line 1" in result.output


class TestLearnEval:
    def learn(self, runner, data_dir, model_path, seed="0"):
        return runner.invoke(
            main,
            [
                "learn",
                "--corpus",
                str(data_dir / "train.jsonl"),
                "--dicts",
                str(data_dir / "dictionaries.json"),
                "--model",
                str(model_path),
                "--seed",
                seed,
            ],
        )

    def test_learn_writes_deterministic_model(self, runner, synth_dir, tmp_path):
        a, b = tmp_path / "m1.json", tmp_path / "m2.json"
        assert self.learn(runner, synth_dir, a).exit_code == 0
        assert self.learn(runner, synth_dir, b).exit_code == 0
        assert a.read_bytes() == b.read_bytes()
        obj = json.loads(a.read_text())
        assert obj["rules"] and all(r["weight"] > 0 for r in obj["rules"])

    def test_eval_planted_rules_noiseless_perfect(self, runner, noiseless_dir):
        result = runner.invoke(
            main,
            [
                "eval",
                "--rules",
                str(noiseless_dir / "planted_rules.json"),
                "--corpus",
                str(noiseless_dir / "test.jsonl"),
                "--dicts",
                str(noiseless_dir / "dictionaries.json"),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "f1         1.000" in result.output
        assert "precision  1.000" in result.output

    def test_eval_json_output(self, runner, noiseless_dir):
        result = runner.invoke(
            main,
            [
                "eval",
                "--rules",
                str(noiseless_dir / "planted_rules.json"),
                "--corpus",
                str(noiseless_dir / "train.jsonl"),
                "--dicts",
                str(noiseless_dir / "dictionaries.json"),
                "--json",
            ],
        )
        info = json.loads(result.output)
        assert info["f1"] == 1.0 and info["fn"] == 0 and info["fp"] == 0

    def test_eval_unknown_predicate_fails(self, runner, synth_dir, tmp_path):
        rules = tmp_path / "rules.json"
        rules.write_text(
            json.dumps({"rules": [{"id": 0, "expression": "prop:tense=pluperfect", "weight": None}]})
        )
        result = runner.invoke(
            main,
            [
                "eval",
                "--rules",
                str(rules),
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
            ],
        )
        assert result.exit_code == 1
        assert "pluperfect" in result.output


class TestTopk:
    def test_chosen_rules_evaluate_to_reported_f1(self, runner, synth_dir, tmp_path):
        model = tmp_path / "model.json"
        TestLearnEval().learn(runner, synth_dir, model)
        chosen = tmp_path / "chosen.json"
        result = runner.invoke(
            main,
            [
                "topk",
                "--model",
                str(model),
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
                "--k-max",
                "8",
                "--rules",
                str(chosen),
                "--json",
            ],
        )
        assert result.exit_code == 0, result.output
        info = json.loads(result.output)
        assert 1 <= info["k"] <= 8
        assert len(info["expressions"]) == info["k"]

        evaluated = runner.invoke(
            main,
            [
                "eval",
                "--rules",
                str(chosen),
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
                "--json",
            ],
        )
        eval_info = json.loads(evaluated.output)
        assert eval_info["f1"] == pytest.approx(info["f1"], abs=1e-12)
        assert eval_info["rules"] == info["k"]


def build_session_file(synth_dir, model_path, session_path):
    from rulebench.corpus import load_corpus, load_dictionaries
    from rulebench.learner import load_model
    from rulebench.predicates import CatalogConfig, build_catalog, build_match_index
    from rulebench.session import Session, playground_edit

    corpus = load_corpus(synth_dir / "train.jsonl")
    dictionaries = load_dictionaries(synth_dir / "dictionaries.json")
    model_obj = json.loads(Path(model_path).read_text())
    min_support = model_obj["config"]["min_support"]
    catalog = build_catalog(corpus, dictionaries, CatalogConfig(min_support=min_support))
    index = build_match_index(catalog, corpus, dictionaries)
    model = load_model(model_path, catalog)
    session = Session(model, index, corpus, catalog, session_id="cli-test")
    first = model.rules[0].expression.expr_id
    second = model.rules[1].expression.expr_id
    session.approve(first)
    session.approve(second)
    session.disapprove(model.rules[2].expression.expr_id)
    state = session.open_playground(first)
    known = {e.predicate_ids for e in session._by_id.values()}
    for pid in range(len(catalog)):
        if pid in state.working_expression.predicate_ids:
            continue
        if tuple(sorted(state.working_expression.predicate_ids + (pid,))) not in known:
            state = playground_edit(state, "add", pid, session)
            break
    custom_id = session.commit_playground(state)
    session.approve(custom_id)
    session.save(session_path)
    return session


class TestExportReplay:
    @pytest.fixture()
    def session_setup(self, runner, synth_dir, tmp_path):
        model = tmp_path / "model.json"
        TestLearnEval().learn(runner, synth_dir, model)
        session_path = tmp_path / "session.json"
        session = build_session_file(synth_dir, model, session_path)
        return model, session_path, session

    def test_export_weight_free_in_approval_order(self, runner, session_setup, tmp_path):
        model, session_path, session = session_setup
        rules_out = tmp_path / "approved.json"
        result = runner.invoke(
            main,
            ["export", "--session", str(session_path), "--model", str(model), "--rules", str(rules_out)],
        )
        assert result.exit_code == 0, result.output
        obj = json.loads(rules_out.read_text())
        assert [r["id"] for r in obj["rules"]] == session.approved
        assert all(r["weight"] is None for r in obj["rules"])

    def test_exported_rules_eval_matches_session_metrics(self, runner, session_setup, synth_dir, tmp_path):
        model, session_path, session = session_setup
        rules_out = tmp_path / "approved.json"
        runner.invoke(
            main,
            ["export", "--session", str(session_path), "--model", str(model), "--rules", str(rules_out)],
        )
        evaluated = runner.invoke(
            main,
            [
                "eval",
                "--rules",
                str(rules_out),
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
                "--json",
            ],
        )
        info = json.loads(evaluated.output)
        expected = session.combined_metrics()
        assert info["tp"] == expected.tp and info["fp"] == expected.fp
        assert info["f1"] == pytest.approx(expected.f1, abs=1e-12)

    def test_export_model_mismatch_fails(self, runner, session_setup, tmp_path):
        model, session_path, _ = session_setup
        tampered = tmp_path / "other_model.json"
        obj = json.loads(model.read_text())
        obj["bias"] += 1.0
        tampered.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
        result = runner.invoke(
            main,
            ["export", "--session", str(session_path), "--model", str(tampered), "--rules", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 1
        assert "different model" in result.output

    def test_replay_consistent_session(self, runner, session_setup, synth_dir):
        model, session_path, _ = session_setup
        result = runner.invoke(
            main,
            [
                "replay",
                "--session",
                str(session_path),
                "--model",
                str(model),
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
                "--json",
            ],
        )
        assert result.exit_code == 0, result.output
        info = json.loads(result.output)
        assert info["consistent"] is True
        assert info["approved"] == 3

    def test_replay_detects_tampered_state(self, runner, session_setup, synth_dir):
        model, session_path, session = session_setup
        obj = json.loads(session_path.read_text())
        touched = set(
            event["payload"]["expression_id"] for event in obj["event_log"]
        )
        spare = next(
            r.expression.expr_id for r in session.model.rules if r.expression.expr_id not in touched
        )
        obj["approved"] = obj["approved"] + [spare]
        session_path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
        result = runner.invoke(
            main,
            [
                "replay",
                "--session",
                str(session_path),
                "--model",
                str(model),
                "--corpus",
                str(synth_dir / "train.jsonl"),
                "--dicts",
                str(synth_dir / "dictionaries.json"),
            ],
        )
        assert result.exit_code == 1
        assert "replay mismatch" in result.output


class TestExitCodes:
    def test_missing_required_option_usage_error(self, runner):
        result = runner.invoke(main, ["learn"])
        assert result.exit_code == 2

    def test_unknown_command_usage_error(self, runner):
        result = runner.invoke(main, ["train"])
        assert result.exit_code == 2

    def test_missing_file_operational_error(self, runner, tmp_path):
        result = runner.invoke(main, ["ingest", "--corpus", str(tmp_path / "absent.jsonl")])
        assert result.exit_code == 1

    def test_serve_listed_in_help(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("ingest", "learn", "eval", "topk", "synth", "export", "replay", "serve"):
            assert command in result.output
