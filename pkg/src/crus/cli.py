"""Command line interface.

Subcommands:

* ``run``: evaluate a grid of (sampler, classifier) cells on one dataset
  with shared stratified folds and write a fixed set of report files.
* ``gen-synth``: write a synthetic imbalanced dataset (CSV plus schema).
* ``featsel``: emit a gain-ratio ranking and a CFS subset report.
* ``rules``: print the rule list of a saved tree or ensemble model.

Every command is deterministic given its config and seed: reruns produce
byte-identical files, whatever ``--jobs`` is.  Grid cells may run in
parallel worker processes; all report writing happens afterwards, single
threaded, in a fixed order.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__
from .clustering import save_cluster_model
from .dataset import DataError, Dataset, imbalance_ratio, load_csv, save_schema, stratified_kfold, write_csv
from .ensembles import load_ensemble, save_ensemble
from .evaluation import (
    ClassifierSpec,
    CvResult,
    SamplerSpec,
    SyntheticConfig,
    apply_sampler,
    fit_classifier,
    gen_synthetic,
    run_experiment,
)
from .feature_selection import cfs_best_first, gain_ratio_rank
from .metrics import METRIC_COLUMNS, format_report_row, report_values
from .resampling import HIGH_GROUP, LOW_GROUP, apply_clustering_rus, plan_cluster_partition, suggest_threshold
from .seeds import derive_seed
from .stats import ScoreMatrix, average_combined_loss, cd_diagram, compare_treatments, loss_vs_best
from .trees import DecisionTree, export_rules, load_tree, save_tree

_NAME_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*\Z")

_RUN_KEYS = {
    "dataset",
    "schema",
    "k_folds",
    "seed",
    "beta",
    "metrics",
    "comparison",
    "output",
    "samplers",
    "classifiers",
}
_COMPARISON_KEYS = {"alpha", "blocks"}
_SAMPLER_KEYS = {
    "name",
    "method",
    "spread",
    "percentage",
    "k_neighbors",
    "cluster_k",
    "threshold",
    "reduction_fraction",
    "policy",
}
_CLASSIFIER_KEYS = {
    "name",
    "method",
    "n_members",
    "min_leaf_weight",
    "use_pruning",
    "confidence_factor",
    "subspace_size",
}
_GEN_KEYS = {
    "blob_sizes",
    "blob_irs",
    "n_numeric",
    "n_nominal",
    "n_categories",
    "noise",
    "category_bias",
    "blob_spacing",
    "seed",
}
_FEATSEL_KEYS = {"dataset", "schema", "max_stale"}


def _fail(msg: str) -> None:
    raise click.UsageError(msg)


def _load_yaml(path: Path, what: str) -> dict:
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        _fail(f"cannot read {what} {path}: {exc}")
    except yaml.YAMLError as exc:
        _fail(f"cannot parse {what} {path}: {exc}")
    if not isinstance(doc, dict):
        _fail(f"{what} {path} must be a key/value mapping")
    return doc


def _check_keys(doc: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        _fail(f"{where}: unknown keys {unknown}; allowed keys are {sorted(allowed)}")


def _as_int(doc: dict, key: str, default: int, where: str) -> int:
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"{where}: '{key}' must be an integer, got {v!r}")
    return v


def _as_float(doc: dict, key: str, default: float, where: str) -> float:
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{where}: '{key}' must be a number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    schema: str
    dataset_path: Path
    schema_path: Path
    k_folds: int
    seed: int
    beta: float
    alpha: float
    metrics: tuple[str, ...]
    output: str | None
    samplers: tuple[tuple[str, SamplerSpec], ...]
    classifiers: tuple[tuple[str, ClassifierSpec], ...]


def _parse_grid(doc: dict, key: str, allowed: set[str], builder) -> tuple[tuple[str, object], ...]:
    entries = doc.get(key)
    if not isinstance(entries, list) or not entries:
        _fail(f"config: '{key}' must be a non-empty list")
    out = []
    seen: set[str] = set()
    for i, entry in enumerate(entries):
        where = f"config: {key}[{i}]"
        if not isinstance(entry, dict):
            _fail(f"{where} must be a mapping")
        _check_keys(entry, allowed, where)
        name = entry.get("name")
        if not isinstance(name, str) or not _NAME_RE.match(name):
            _fail(f"{where}: 'name' must match {_NAME_RE.pattern}")
        if name in seen:
            _fail(f"{where}: duplicate name '{name}'")
        seen.add(name)
        params = {k: v for k, v in entry.items() if k != "name"}
        try:
            spec = builder(**params)
        except (TypeError, ValueError) as exc:
            _fail(f"{where} ('{name}'): {exc}")
        out.append((name, spec))
    return tuple(out)


def load_run_config(path: Path, seed_override: int | None = None, alpha_override: float | None = None) -> RunConfig:
    doc = _load_yaml(path, "config")
    _check_keys(doc, _RUN_KEYS, "config")
    for req in ("dataset", "schema", "samplers", "classifiers"):
        if req not in doc:
            _fail(f"config: missing required key '{req}'")
    for key in ("dataset", "schema"):
        if not isinstance(doc[key], str) or not doc[key]:
            _fail(f"config: '{key}' must be a file path string")
    k_folds = _as_int(doc, "k_folds", 10, "config")
    if k_folds < 2:
        _fail(f"config: k_folds must be at least 2, got {k_folds}")
    seed = seed_override if seed_override is not None else _as_int(doc, "seed", 0, "config")
    beta = _as_float(doc, "beta", 1.0, "config")
    comparison = doc.get("comparison", {})
    if not isinstance(comparison, dict):
        _fail("config: 'comparison' must be a mapping")
    _check_keys(comparison, _COMPARISON_KEYS, "config: comparison")
    alpha = alpha_override if alpha_override is not None else _as_float(comparison, "alpha", 0.05, "config: comparison")
    if not 0 < alpha < 1:
        _fail(f"config: comparison alpha must be in (0, 1), got {alpha}")
    blocks = comparison.get("blocks", "folds")
    if blocks != "folds":
        _fail(f"config: comparison blocks '{blocks}' is not supported; only 'folds'")
    metrics = doc.get("metrics", ["g_mean", "op"])
    if not isinstance(metrics, list) or not metrics:
        _fail("config: 'metrics' must be a non-empty list")
    for m in metrics:
        if m not in METRIC_COLUMNS:
            _fail(f"config: unknown metric '{m}'; choices are {list(METRIC_COLUMNS)}")
    if len(set(metrics)) != len(metrics):
        _fail("config: 'metrics' contains duplicates")
    output = doc.get("output")
    if output is not None and (not isinstance(output, str) or not output):
        _fail("config: 'output' must be a directory path string")
    samplers = _parse_grid(doc, "samplers", _SAMPLER_KEYS, SamplerSpec)
    classifiers = _parse_grid(doc, "classifiers", _CLASSIFIER_KEYS, ClassifierSpec)
    base = path.parent
    dataset_path = (base / doc["dataset"]).resolve()
    schema_path = (base / doc["schema"]).resolve()
    for p in (dataset_path, schema_path):
        if not p.is_file():
            _fail(f"config: referenced file does not exist: {p}")
    return RunConfig(
        dataset=doc["dataset"],
        schema=doc["schema"],
        dataset_path=dataset_path,
        schema_path=schema_path,
        k_folds=k_folds,
        seed=seed,
        beta=beta,
        alpha=alpha,
        metrics=tuple(metrics),
        output=output,
        samplers=samplers,
        classifiers=tuple((n, c) for n, c in classifiers),
    )


def _evaluate_cell(payload: dict) -> CvResult:
    """Worker entry point; must stay importable for process pools."""
    d = load_csv(payload["dataset"], payload["schema"])
    sampler = SamplerSpec(**payload["sampler"])
    classifier = ClassifierSpec(**payload["classifier"])
    return run_experiment(d, classifier, sampler, payload["k"], payload["seed"], payload["beta"])


def _fmt(v: float) -> str:
    return f"{v:.6f}"


class _Reports:
    """Accumulates report files so the manifest can list them."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self.names: list[str] = []

    def write(self, rel_name: str, text: str) -> None:
        path = self.out_dir / rel_name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.names.append(rel_name)


def _folds_csv(cells, results) -> str:
    lines = [
        "sampler,classifier,fold,group,n_test,n_train,n_synthetic_train,"
        + ",".join(METRIC_COLUMNS)
        + ",degenerate"
    ]
    for (s_name, c_name, _, _), res in zip(cells, results):
        for fr in res.folds:
            prefix = [
                s_name,
                c_name,
                str(fr.fold),
                fr.group,
                str(int(fr.truth.size)),
                str(int(fr.train_indices.size) + fr.n_synthetic_train),
                str(fr.n_synthetic_train),
            ]
            lines.append(format_report_row(prefix, fr.report) + "," + ";".join(fr.report.degenerate))
    return "\n".join(lines) + "\n"


def _summary_csv(cells, results) -> str:
    head = (
        "sampler,classifier,"
        + ",".join(f"mean_{c}" for c in METRIC_COLUMNS)
        + ","
        + ",".join(f"pooled_{c}" for c in METRIC_COLUMNS)
    )
    lines = [head]
    for (s_name, c_name, _, _), res in zip(cells, results):
        values = [_fmt(v) for v in report_values(res.mean)] + [_fmt(v) for v in report_values(res.pooled)]
        lines.append(",".join([s_name, c_name] + values))
    return "\n".join(lines) + "\n"


def _sampler_table_csv(sampler_name: str, cells, results) -> str:
    lines = ["classifier," + ",".join(METRIC_COLUMNS)]
    for (s_name, c_name, _, _), res in zip(cells, results):
        if s_name == sampler_name:
            lines.append(",".join([c_name] + [_fmt(v) for v in report_values(res.mean)]))
    return "\n".join(lines) + "\n"


def _p_matrix_csv(rep, adjusted: bool) -> str:
    n = len(rep.treatments)
    lines = ["," + ",".join(rep.treatments)]
    for i in range(n):
        row = [rep.treatments[i]]
        for j in range(n):
            row.append("" if i == j else f"{(rep.pair(i, j).p_holm if adjusted else rep.pair(i, j).p_raw):.6e}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _stats_text(rep) -> str:
    f = rep.friedman
    lines = [
        f"metric: {rep.metric}",
        f"alpha: {rep.alpha:g}",
        f"friedman_statistic: {f.statistic:.6f}",
        f"friedman_df: {f.df}",
        f"friedman_p: {f.p_value:.6e}",
        "average_ranks:",
    ]
    lines += [f"  {name}: {rank:.6f}" for name, rank in zip(rep.treatments, f.average_ranks)]
    lines.append("pairwise_wilcoxon (raw_p, holm_p, significant):")
    for pr in rep.pairwise:
        sig = "yes" if pr.p_holm < rep.alpha else "no"
        lines.append(
            f"  {rep.treatments[pr.i]} vs {rep.treatments[pr.j]}: {pr.p_raw:.6e}, {pr.p_holm:.6e}, {sig}"
        )
    lines.append("cliques (no significant difference within):")
    for clique in rep.cliques:
        lines.append("  {" + ", ".join(rep.treatments[t] for t in clique) + "}")
    return "\n".join(lines) + "\n"


def _loss_csv(metric: str, names, mean_values, losses) -> str:
    lines = [f"treatment,mean_{metric},loss_pct"]
    for name, v, loss in zip(names, mean_values, losses if losses else [None] * len(names)):
        lines.append(",".join([name, _fmt(v), "" if loss is None else _fmt(loss)]))
    return "\n".join(lines) + "\n"


def _loss_markdown(metrics, names, means, losses) -> str:
    parts = ["# Percent loss vs best (fold-mean metrics)", ""]
    for m in metrics:
        parts.append(f"## {m}")
        parts.append("")
        parts.append("| treatment | mean | loss % |")
        parts.append("|---|---|---|")
        for t, name in enumerate(names):
            loss = losses[m][t] if losses[m] else None
            parts.append(f"| {name} | {means[m][t]:.6f} | {'' if loss is None else f'{loss:.2f}'} |")
        parts.append("")
    if len(metrics) >= 2 and losses[metrics[0]] and losses[metrics[1]]:
        m1, m2 = metrics[0], metrics[1]
        parts.append(f"## combined ({m1} + {m2})")
        parts.append("")
        parts.append(f"| treatment | loss {m1} % | loss {m2} % | average |")
        parts.append("|---|---|---|---|")
        for t, name in enumerate(names):
            avg = average_combined_loss(losses[m1][t], losses[m2][t])
            parts.append(f"| {name} | {losses[m1][t]:.2f} | {losses[m2][t]:.2f} | {avg:.2f} |")
        parts.append("")
    return "\n".join(parts) + "\n"


def _save_model(model, path: Path) -> None:
    if isinstance(model, DecisionTree):
        save_tree(model, path)
    else:
        save_ensemble(model, path)


def _save_cell_models(d: Dataset, cell_name: str, sampler: SamplerSpec, classifier: ClassifierSpec,
                      seed: int, reports: _Reports) -> None:
    """Refit on the full dataset and save deployable model files."""
    models_dir = reports.out_dir / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    if sampler.method == "clustering_rus":
        threshold = sampler.threshold
        if threshold is None:
            threshold = suggest_threshold(imbalance_ratio(d), sampler.reduction_fraction)
        partition = plan_cluster_partition(
            d, sampler.cluster_k, threshold, derive_seed(seed, "final", "cluster"), sampler.policy
        )
        groups = apply_clustering_rus(d, partition, sampler.spread, derive_seed(seed, "final", "sampler"))
        save_cluster_model(partition.model, models_dir / f"{cell_name}.cluster.json")
        reports.names.append(f"models/{cell_name}.cluster.json")
        for g_name, g_train in ((LOW_GROUP, groups.low_group), (HIGH_GROUP, groups.high_group)):
            if len(g_train) > 0:
                model = fit_classifier(g_train, classifier, derive_seed(seed, "final", "classifier"))
                _save_model(model, models_dir / f"{cell_name}.{g_name}.json")
                reports.names.append(f"models/{cell_name}.{g_name}.json")
    else:
        train = apply_sampler(d, sampler, derive_seed(seed, "final", "sampler"))
        model = fit_classifier(train, classifier, derive_seed(seed, "final", "classifier"))
        _save_model(model, models_dir / f"{cell_name}.json")
        reports.names.append(f"models/{cell_name}.json")


@click.group()
@click.version_option(__version__, prog_name="crus")
def main() -> None:
    """Imbalance-aware evaluation toolkit: resampling, trees, ensembles."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="YAML run config.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Output directory (overrides the config's 'output').")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--alpha", type=float, default=None, help="Override the comparison alpha.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes for grid cells.")
@click.option("--save-models", is_flag=True,
              help="Also refit each cell on the full dataset and save the model files.")
def run(config_path: Path, out_dir: Path | None, seed: int | None, alpha: float | None,
        jobs: int, save_models: bool) -> None:
    """Evaluate a sampler x classifier grid with shared stratified folds."""
    if jobs < 1:
        _fail(f"--jobs must be at least 1, got {jobs}")
    cfg = load_run_config(config_path, seed, alpha)
    if out_dir is None:
        if cfg.output is None:
            _fail("no output directory: set 'output' in the config or pass --out")
        out_dir = config_path.parent / cfg.output
    try:
        d = load_csv(cfg.dataset_path, cfg.schema_path)
        stratified_kfold(d, cfg.k_folds, derive_seed(cfg.seed, "folds"))
    except (DataError, ValueError, OSError) as exc:
        _fail(f"cannot evaluate {cfg.dataset}: {exc}")

    cells = [
        (s_name, c_name, s_spec, c_spec)
        for s_name, s_spec in cfg.samplers
        for c_name, c_spec in cfg.classifiers
    ]
    names = [f"{s}+{c}" for s, c, _, _ in cells]
    payloads = [
        {
            "dataset": str(cfg.dataset_path),
            "schema": str(cfg.schema_path),
            "sampler": asdict(s_spec),
            "classifier": asdict(c_spec),
            "k": cfg.k_folds,
            "seed": cfg.seed,
            "beta": cfg.beta,
        }
        for _, _, s_spec, c_spec in cells
    ]
    results: list[CvResult] = []
    if jobs == 1 or len(cells) == 1:
        for name, payload in zip(names, payloads):
            try:
                results.append(_evaluate_cell(payload))
            except (DataError, ValueError) as exc:
                raise click.ClickException(f"evaluation failed for cell {name}: {exc}")
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as ex:
            futures = [ex.submit(_evaluate_cell, p) for p in payloads]
            for name, fut in zip(names, futures):
                try:
                    results.append(fut.result())
                except (DataError, ValueError) as exc:
                    raise click.ClickException(f"evaluation failed for cell {name}: {exc}")

    out_dir.mkdir(parents=True, exist_ok=True)
    reports = _Reports(out_dir)
    reports.write("folds.csv", _folds_csv(cells, results))
    reports.write("summary.csv", _summary_csv(cells, results))
    for s_name, _ in cfg.samplers:
        reports.write(f"table_{s_name}.csv", _sampler_table_csv(s_name, cells, results))

    run_warnings = [
        f"{name}: {w}" for name, res in zip(names, results) for w in res.warnings
    ]
    means = {m: [getattr(res.mean, m) for res in results] for m in cfg.metrics}
    losses: dict[str, list[float] | None] = {}
    for m in cfg.metrics:
        try:
            losses[m] = loss_vs_best(means[m])
        except ValueError:
            losses[m] = None
            run_warnings.append(f"loss_{m}: best mean value is not positive; losses omitted")
        reports.write(f"loss_{m}.csv", _loss_csv(m, names, means[m], losses[m]))
    if len(cfg.metrics) >= 2 and losses[cfg.metrics[0]] and losses[cfg.metrics[1]]:
        m1, m2 = cfg.metrics[0], cfg.metrics[1]
        lines = [f"treatment,loss_{m1},loss_{m2},average_combined_loss"]
        for t, name in enumerate(names):
            avg = average_combined_loss(losses[m1][t], losses[m2][t])
            lines.append(",".join([name, _fmt(losses[m1][t]), _fmt(losses[m2][t]), _fmt(avg)]))
        reports.write("loss_combined.csv", "\n".join(lines) + "\n")
    reports.write("loss.md", _loss_markdown(list(cfg.metrics), names, means, losses))

    tpr_lines = ["treatment,tpr,tnr"]
    for name, res in zip(names, results):
        tpr_lines.append(",".join([name, _fmt(res.mean.tpr), _fmt(res.mean.tnr)]))
    reports.write("tpr_tnr.csv", "\n".join(tpr_lines) + "\n")

    comparisons = "written"
    if len(cells) >= 2:
        for m in cfg.metrics:
            values = np.array(
                [[getattr(res.fold_reports[b], m) for res in results] for b in range(cfg.k_folds)]
            )
            rep = compare_treatments(ScoreMatrix(values, tuple(names), metric=m), cfg.alpha)
            reports.write(f"stats_{m}.txt", _stats_text(rep))
            reports.write(f"pvalues_{m}_raw.csv", _p_matrix_csv(rep, adjusted=False))
            reports.write(f"pvalues_{m}_holm.csv", _p_matrix_csv(rep, adjusted=True))
            cd = cd_diagram(rep)
            reports.write(f"cd_{m}.svg", cd.to_svg())
            reports.write(f"cd_{m}.txt", cd.to_text())
    else:
        comparisons = "skipped (fewer than 2 treatments)"

    if save_models:
        for (s_name, c_name, s_spec, c_spec), name in zip(cells, names):
            try:
                _save_cell_models(d, name, s_spec, c_spec, cfg.seed, reports)
            except (DataError, ValueError) as exc:
                raise click.ClickException(f"model refit failed for cell {name}: {exc}")

    reports.write("warnings.txt", "".join(w + "\n" for w in run_warnings))
    manifest = {
        "tool": "crus",
        "version": __version__,
        "dataset": cfg.dataset,
        "schema": cfg.schema,
        "k_folds": cfg.k_folds,
        "seed": cfg.seed,
        "beta": cfg.beta,
        "alpha": cfg.alpha,
        "metrics": list(cfg.metrics),
        "comparisons": comparisons,
        "samplers": [{"name": n, **asdict(s)} for n, s in cfg.samplers],
        "classifiers": [{"name": n, **asdict(c)} for n, c in cfg.classifiers],
        "treatments": names,
        "outputs": sorted(reports.names + ["manifest.yaml"]),
    }
    (out_dir / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=True), encoding="utf-8")
    click.echo(f"evaluated {len(cells)} cells; wrote {len(reports.names) + 1} files")


@main.command("gen-synth")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="YAML generator config (all keys optional).")
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path),
              help="Output CSV path.")
@click.option("--schema-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Schema path (default: CSV path with .schema.yaml).")
@click.option("--blob-out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Optional CSV mapping row index to ground-truth blob.")
@click.option("--seed", type=int, default=None, help="Override the generator seed.")
def gen_synth(config_path: Path | None, out: Path, schema_out: Path | None,
              blob_out: Path | None, seed: int | None) -> None:
    """Write a synthetic imbalanced dataset and its schema."""
    params: dict = {}
    if config_path is not None:
        doc = _load_yaml(config_path, "generator config")
        _check_keys(doc, _GEN_KEYS, "generator config")
        params.update(doc)
    for key in ("blob_sizes", "blob_irs"):
        if key in params:
            if not isinstance(params[key], list):
                _fail(f"generator config: '{key}' must be a list")
            params[key] = tuple(params[key])
    if seed is not None:
        params["seed"] = seed
    try:
        cfg = SyntheticConfig(**params)
    except (TypeError, ValueError) as exc:
        _fail(f"generator config: {exc}")
    data = gen_synthetic(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data.dataset, out)
    schema_path = schema_out if schema_out is not None else out.with_suffix(".schema.yaml")
    schema_path.parent.mkdir(parents=True, exist_ok=True)
    save_schema(data.dataset.schema, schema_path)
    if blob_out is not None:
        blob_out.parent.mkdir(parents=True, exist_ok=True)
        lines = ["row,blob"] + [f"{i},{b}" for i, b in enumerate(data.blob_of)]
        blob_out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    for b, ir in enumerate(data.realized_irs):
        click.echo(f"blob {b}: size {cfg.blob_sizes[b]}, imbalance ratio {ir:.4f}")
    click.echo(f"global imbalance ratio: {imbalance_ratio(data.dataset):.4f}")
    click.echo(f"wrote {out} and {schema_path}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="YAML with 'dataset' and 'schema' paths (optional 'max_stale').")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path),
              help="Output directory.")
def featsel(config_path: Path, out_dir: Path) -> None:
    """Write a gain-ratio ranking and a CFS subset report."""
    doc = _load_yaml(config_path, "config")
    _check_keys(doc, _FEATSEL_KEYS, "config")
    for req in ("dataset", "schema"):
        if req not in doc or not isinstance(doc[req], str):
            _fail(f"config: missing file path '{req}'")
    max_stale = _as_int(doc, "max_stale", 5, "config")
    base = config_path.parent
    try:
        d = load_csv((base / doc["dataset"]).resolve(), (base / doc["schema"]).resolve())
        if not d.schema.attributes:
            raise DataError("no attributes besides the class")
        ranks = gain_ratio_rank(d)
        cfs = cfs_best_first(d, max_stale=max_stale)
    except (DataError, ValueError, OSError) as exc:
        _fail(f"feature selection failed: {exc}")
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["rank,attribute,gain_ratio"]
    lines += [f"{i + 1},{r.name},{r.score:.6f}" for i, r in enumerate(ranks)]
    (out_dir / "gain_ratio_ranking.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfs_text = (
        f"selected: {', '.join(cfs.names)}\n"
        f"merit: {cfs.merit:.6f}\n"
        f"subsets_evaluated: {cfs.n_evaluated}\n"
    )
    (out_dir / "cfs_subset.txt").write_text(cfs_text, encoding="utf-8")
    click.echo(f"top attribute: {ranks[0].name} ({ranks[0].score:.6f})")
    click.echo(f"cfs selected {len(cfs.selected)} attributes, merit {cfs.merit:.6f}")


@main.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Saved tree or ensemble JSON.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the rules here instead of stdout.")
def rules(model_path: Path, out_path: Path | None) -> None:
    """Print the decision rules of a saved model."""
    try:
        doc = json.loads(model_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read model {model_path}: {exc}")
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "tree":
        text = "\n".join(export_rules(load_tree(model_path))) + "\n"
    elif kind == "ensemble":
        model = load_ensemble(model_path)
        parts = []
        for i, (member, w) in enumerate(zip(model.members, model.member_weights)):
            parts.append(f"member {i} (weight {w:g}):")
            parts += ["  " + r for r in export_rules(member)]
        text = "\n".join(parts) + "\n"
    else:
        _fail(f"{model_path} is not a saved tree or ensemble model")
    if out_path is not None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main(prog_name="crus")
