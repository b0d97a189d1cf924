from __future__ import annotations

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from crus.cli import main
from crus.dataset import (
    NOMINAL,
    NUMERIC,
    AttributeSpec,
    Dataset,
    DatasetSchema,
    save_schema,
    write_csv,
)
from crus.ensembles import EnsembleConfig, fit_bagging, save_ensemble
from crus.evaluation import SyntheticConfig, gen_synthetic
from crus.trees import TreeConfig, fit_tree, save_tree


@pytest.fixture
def runner():
    return CliRunner()


def write_dataset(tmp_path, cfg=None):
    data = gen_synthetic(cfg or SyntheticConfig(blob_sizes=(60, 90), blob_irs=(2.0, 5.0), seed=3))
    csv_path = tmp_path / "data.csv"
    schema_path = tmp_path / "data.schema.yaml"
    write_csv(data.dataset, csv_path)
    save_schema(data.dataset.schema, schema_path)
    return csv_path, schema_path


def write_run_config(tmp_path, **overrides):
    doc = {
        "dataset": "data.csv",
        "schema": "data.schema.yaml",
        "k_folds": 3,
        "seed": 5,
        "metrics": ["g_mean", "op"],
        "samplers": [
            {"name": "none", "method": "none"},
            {"name": "rus", "method": "rus", "spread": 2.0},
        ],
        "classifiers": [
            {"name": "tree", "method": "tree"},
            {"name": "bag", "method": "bagging", "n_members": 3},
        ],
    }
    doc.update(overrides)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


def read_tree(out_dir):
    return {
        p.relative_to(out_dir).as_posix(): p.read_bytes()
        for p in sorted(out_dir.rglob("*"))
        if p.is_file()
    }


def test_run_smoke_writes_report_set(tmp_path, runner):
    write_dataset(tmp_path)
    cfg = write_run_config(tmp_path)
    result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output
    out = tmp_path / "out"
    expected = {
        "folds.csv",
        "summary.csv",
        "table_none.csv",
        "table_rus.csv",
        "loss_g_mean.csv",
        "loss_op.csv",
        "loss_combined.csv",
        "loss.md",
        "tpr_tnr.csv",
        "stats_g_mean.txt",
        "stats_op.txt",
        "pvalues_g_mean_raw.csv",
        "pvalues_g_mean_holm.csv",
        "pvalues_op_raw.csv",
        "pvalues_op_holm.csv",
        "cd_g_mean.svg",
        "cd_g_mean.txt",
        "cd_op.svg",
        "cd_op.txt",
        "warnings.txt",
        "manifest.yaml",
    }
    present = {p.name for p in out.iterdir()}
    assert expected <= present
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("sampler,classifier,")
    assert len(summary) == 5  # header + 2x2 grid
    manifest = yaml.safe_load((out / "manifest.yaml").read_text())
    assert manifest["treatments"] == ["none+tree", "none+bag", "rus+tree", "rus+bag"]
    assert sorted(manifest["outputs"]) == manifest["outputs"]


def test_run_rerun_is_byte_identical(tmp_path, runner):
    write_dataset(tmp_path)
    cfg = write_run_config(tmp_path)
    a = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "a")])
    b = runner.invoke(
        main, ["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--jobs", "2"]
    )
    assert a.exit_code == 0 and b.exit_code == 0, a.output + b.output
    assert read_tree(tmp_path / "a") == read_tree(tmp_path / "b")


def test_run_save_models_emits_model_files(tmp_path, runner):
    write_dataset(tmp_path)
    cfg = write_run_config(
        tmp_path,
        samplers=[
            {"name": "crus", "method": "clustering_rus", "threshold": 3.0, "cluster_k": 2},
        ],
        classifiers=[{"name": "tree", "method": "tree"}],
    )
    result = runner.invoke(
        main,
        ["run", "--config", str(cfg), "--out", str(tmp_path / "out"), "--save-models"],
    )
    assert result.exit_code == 0, result.output
    models = tmp_path / "out" / "models"
    assert (models / "crus+tree.cluster.json").is_file()
    group_files = sorted(p.name for p in models.glob("crus+tree.*_IR_group.json"))
    assert group_files


def test_run_missing_schema_fails_with_path(tmp_path, runner):
    write_dataset(tmp_path)
    (tmp_path / "data.schema.yaml").unlink()
    cfg = write_run_config(tmp_path)
    result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code != 0
    assert "data.schema.yaml" in result.output


def test_run_unknown_config_key_rejected(tmp_path, runner):
    write_dataset(tmp_path)
    cfg = write_run_config(tmp_path, typo_key=3)
    result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert "typo_key" in result.output


def test_run_bad_grid_entry_names_the_cell(tmp_path, runner):
    write_dataset(tmp_path)
    cfg = write_run_config(
        tmp_path, classifiers=[{"name": "bad", "method": "perceptron"}]
    )
    result = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert "bad" in result.output and "perceptron" in result.output


def test_gen_synth_deterministic_and_reports_ir(tmp_path, runner):
    args = ["gen-synth", "--out", str(tmp_path / "a.csv"), "--seed", "0"]
    a = runner.invoke(main, args)
    assert a.exit_code == 0, a.output
    assert "global imbalance ratio: 4.2" in a.output
    b = runner.invoke(main, ["gen-synth", "--out", str(tmp_path / "b.csv"), "--seed", "0"])
    assert b.exit_code == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.schema.yaml").read_bytes() == (tmp_path / "b.schema.yaml").read_bytes()


def test_gen_synth_config_and_blob_map(tmp_path, runner):
    cfg = tmp_path / "gen.yaml"
    cfg.write_text(
        yaml.safe_dump({"blob_sizes": [40, 60], "blob_irs": [2, 4], "seed": 1}),
        encoding="utf-8",
    )
    result = runner.invoke(
        main,
        [
            "gen-synth",
            "--config",
            str(cfg),
            "--out",
            str(tmp_path / "d.csv"),
            "--blob-out",
            str(tmp_path / "blobs.csv"),
        ],
    )
    assert result.exit_code == 0, result.output
    blob_lines = (tmp_path / "blobs.csv").read_text().splitlines()
    assert blob_lines[0] == "row,blob"
    assert len(blob_lines) == 101


def test_gen_synth_rejects_degenerate_blob(tmp_path, runner):
    cfg = tmp_path / "gen.yaml"
    cfg.write_text(yaml.safe_dump({"blob_sizes": [0, 100], "blob_irs": [2, 4]}), encoding="utf-8")
    result = runner.invoke(main, ["gen-synth", "--config", str(cfg), "--out", str(tmp_path / "d.csv")])
    assert result.exit_code == 2
    assert "blob" in result.output.lower()


def test_featsel_perfect_attribute_tops_reports(tmp_path, runner):
    rng = np.random.default_rng(0)
    n = 120
    y = (rng.uniform(size=n) < 0.4).astype(np.int8)
    schema = DatasetSchema(
        (
            AttributeSpec("signal", NOMINAL, ("c0", "c1")),
            AttributeSpec("noise", NUMERIC),
        ),
        "y",
        "neg",
        "pos",
    )
    values = np.column_stack([y.astype(np.float64), rng.normal(0, 1, n)])
    d = Dataset(schema, values, y)
    write_csv(d, tmp_path / "d.csv")
    save_schema(schema, tmp_path / "d.schema.yaml")
    cfg = tmp_path / "fs.yaml"
    cfg.write_text(
        yaml.safe_dump({"dataset": "d.csv", "schema": "d.schema.yaml"}), encoding="utf-8"
    )
    result = runner.invoke(main, ["featsel", "--config", str(cfg), "--out", str(tmp_path / "fs")])
    assert result.exit_code == 0, result.output
    ranking = (tmp_path / "fs" / "gain_ratio_ranking.csv").read_text().splitlines()
    assert ranking[0] == "rank,attribute,gain_ratio"
    assert ranking[1].startswith("1,signal,")
    subset = (tmp_path / "fs" / "cfs_subset.txt").read_text()
    assert "signal" in subset
    again = runner.invoke(main, ["featsel", "--config", str(cfg), "--out", str(tmp_path / "fs2")])
    assert again.exit_code == 0
    assert (tmp_path / "fs2" / "gain_ratio_ranking.csv").read_text() == "\n".join(ranking) + "\n"


def test_featsel_no_attributes_errors(tmp_path, runner):
    schema = DatasetSchema((), "y", "neg", "pos")
    d = Dataset(schema, np.empty((4, 0)), np.array([0, 1, 0, 1], dtype=np.int8))
    write_csv(d, tmp_path / "d.csv")
    save_schema(schema, tmp_path / "d.schema.yaml")
    cfg = tmp_path / "fs.yaml"
    cfg.write_text(
        yaml.safe_dump({"dataset": "d.csv", "schema": "d.schema.yaml"}), encoding="utf-8"
    )
    result = runner.invoke(main, ["featsel", "--config", str(cfg), "--out", str(tmp_path / "fs")])
    assert result.exit_code == 2
    assert "attribute" in result.output.lower()


def separable_dataset(rng, n=60):
    schema = DatasetSchema((AttributeSpec("f0", NUMERIC),), "y", "neg", "pos")
    x = np.concatenate([rng.normal(0, 1, n // 2), rng.normal(6, 1, n // 2)])
    y = np.concatenate([np.zeros(n // 2, dtype=np.int8), np.ones(n // 2, dtype=np.int8)])
    return Dataset(schema, x[:, None], y)


def test_rules_tree_one_line_per_leaf(tmp_path, runner):
    rng = np.random.default_rng(1)
    d = separable_dataset(rng)
    tree = fit_tree(d, TreeConfig())
    save_tree(tree, tmp_path / "tree.json")
    result = runner.invoke(main, ["rules", "--model", str(tmp_path / "tree.json")])
    assert result.exit_code == 0, result.output
    lines = [ln for ln in result.output.splitlines() if ln]
    assert len(lines) == tree.n_leaves()
    assert all(ln.startswith("IF ") and " THEN " in ln for ln in lines)


def test_rules_single_leaf_model(tmp_path, runner):
    schema = DatasetSchema((AttributeSpec("f0", NUMERIC),), "y", "neg", "pos")
    d = Dataset(schema, np.zeros((10, 1)), np.array([0] * 9 + [1], dtype=np.int8))
    tree = fit_tree(d, TreeConfig())
    save_tree(tree, tmp_path / "leaf.json")
    result = runner.invoke(main, ["rules", "--model", str(tmp_path / "leaf.json")])
    assert result.exit_code == 0
    lines = [ln for ln in result.output.splitlines() if ln]
    assert lines == ["IF TRUE THEN y = neg"]


def test_rules_ensemble_members_have_headers(tmp_path, runner):
    rng = np.random.default_rng(2)
    d = separable_dataset(rng)
    model = fit_bagging(d, EnsembleConfig(n_members=2, seed=0))
    save_ensemble(model, tmp_path / "ens.json")
    out_path = tmp_path / "rules.txt"
    result = runner.invoke(
        main, ["rules", "--model", str(tmp_path / "ens.json"), "--out", str(out_path)]
    )
    assert result.exit_code == 0, result.output
    text = out_path.read_text()
    assert "member 0 (weight " in text and "member 1 (weight " in text
    rule_lines = [ln for ln in text.splitlines() if ln.strip().startswith("IF ")]
    assert len(rule_lines) == sum(m.n_leaves() for m in model.members)


def test_rules_rejects_other_json(tmp_path, runner):
    path = tmp_path / "junk.json"
    path.write_text('{"kind": "cluster_model"}', encoding="utf-8")
    result = runner.invoke(main, ["rules", "--model", str(path)])
    assert result.exit_code == 2
