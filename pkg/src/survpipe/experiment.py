"""Declarative experiment runner: one config file in, reports out.

The stage order is fixed: decode, label, required-field deletion, cohort
filter, predictor selection, train/test split, imputation fitted on the
training side only, encoding and standardization fitted on the training
side only, imbalance remedies applied to training rows only, per-model
cross-validated selection, final retrain, test evaluation, importance
ranking, report emission.

Every random stage draws its seed as a pure function of (master seed,
stage name), so reruns of the same config reproduce every metric file byte
for byte and reordering the model grid cannot move the data split.
"""
from __future__ import annotations

import configparser
import hashlib
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__ as VERSION
from .crossval import cross_validate
from .dataset import (
    COHORTS,
    CohortRule,
    Dataset,
    LabelRule,
    decode,
    derive_labels,
    drop_required_missing,
    filter_cohort,
    split,
)
from .encoding import EncodedMatrix, FeatureMap, encode, fit_encoder, fit_standardizer
from .errors import ConfigError, SurvpipeError
from .imbalance import ImbalancePlan, METHODS, apply_plan
from .impute import ImputePlan, apply_mice, fit_mice
from .ingest import parse_fixed_width_bytes, read_delimited
from .metrics import evaluate_scores, roc_points
from .models import MODEL_KINDS, TrainConfig, default_grid, predict_proba, save_model, train
from .ranking import importance, rank_table
from .reports import grouped_bar_figure, importance_figure, write_table_pair
from .schema import parse_schema
from .synth import benchmark_spec, generate_synthetic, parse_synth_spec

ALL_COHORTS = "all"


def stage_seed(master_seed: int, stage: str) -> int:
    """Derive a 63-bit stage seed from the master seed and a stage name."""
    digest = hashlib.sha256(f"{master_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass(frozen=True)
class DataSource:
    source: str = "synth"  # synth | file
    schema_path: Path | None = None
    input_path: Path | None = None
    input_format: str = "csv"  # fixed | csv
    synth_spec_path: Path | None = None
    synth_rows: int = 20000
    synth_positive_fraction: float = 0.806
    synth_separation: float = 1.0
    synth_cohort_tags: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataSource = DataSource()
    cohorts: tuple[str, ...] = (ALL_COHORTS,)
    cohort_rule: CohortRule = CohortRule()
    label_rule: LabelRule = LabelRule()
    required_fields: tuple[str, ...] = ()
    predictors: tuple[str, ...] = ()  # empty = every field except label/cohort fields
    impute_plan: ImputePlan = ImputePlan()
    impute_before_split: bool = False
    test_fraction: float = 0.2
    k: int = 5
    stratified: bool = True
    plans: tuple[str, ...] = ("none",)
    ratio: float = 1.0
    factor: float = 5.0
    model_kinds: tuple[str, ...] = ("logistic",)
    grids: dict = field(default_factory=dict)  # kind -> list[TrainConfig]
    seed: int = 0
    threshold: float = 0.5
    metric: str = "auc"
    top_k: int = 7
    raw_text: str = ""  # canonical config text, hashed into the manifest

    def grid_for(self, kind: str) -> list[TrainConfig]:
        return self.grids.get(kind) or default_grid(kind)

    def grid_signature(self) -> dict:
        return {kind: [c.describe() for c in self.grid_for(kind)] for kind in self.model_kinds}

    def config_hash(self) -> str:
        return hashlib.sha256(self.raw_text.encode()).hexdigest()


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


_GRID_FIELDS = {
    "logistic": ("learning_rate", "epochs", "l2"),
    "forest": ("n_trees", "max_depth", "min_leaf", "features_per_split", "criterion", "bootstrap"),
    "adaboost": ("n_rounds",),
    "mlp": ("hidden", "dropout", "mlp_learning_rate", "mlp_epochs", "batch_size"),
}


def _grid_value(kind: str, key: str, raw: str):
    raw = raw.strip()
    if key in ("epochs", "n_trees", "min_leaf", "n_rounds", "mlp_epochs", "batch_size"):
        return int(raw)
    if key in ("learning_rate", "l2", "dropout", "mlp_learning_rate"):
        return float(raw)
    if key == "max_depth":
        return None if raw.lower() == "none" else int(raw)
    if key == "features_per_split":
        return raw if raw in ("sqrt", "all") else int(raw)
    if key == "criterion":
        return raw
    if key == "bootstrap":
        return _parse_bool(raw)
    if key == "hidden":
        return tuple(int(w) for w in raw.split("x"))
    raise ConfigError(f"unknown {kind} hyperparameter {key!r}")


def parse_grid_section(kind: str, items: dict) -> list[TrainConfig]:
    """Comma-separated values per hyperparameter expand to their cartesian product."""
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}")
    allowed = _GRID_FIELDS[kind]
    axes = []
    for key, raw in items.items():
        if key not in allowed:
            raise ConfigError(f"hyperparameter {key!r} is not valid for {kind} "
                              f"(expected one of {allowed})")
        values = [_grid_value(kind, key, v) for v in raw.split(",")]
        axes.append([(key, v) for v in values])
    if not axes:
        return default_grid(kind)
    grid = []
    for combo in itertools.product(*axes):
        grid.append(TrainConfig(kind=kind, **dict(combo)))
    return grid


def parse_experiment_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    base = Path(base_dir) if base_dir is not None else Path(".")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad experiment config: {exc}") from None

    def section(name):
        return parser[name] if parser.has_section(name) else {}

    data_sec = section("data")
    source = data_sec.get("source", "synth")
    if source not in ("synth", "file"):
        raise ConfigError(f"data source must be synth or file, got {source!r}")
    if source == "file":
        if "schema" not in data_sec or "input" not in data_sec:
            raise ConfigError("file data source requires schema and input paths")
    fmt = data_sec.get("format", "csv")
    if fmt not in ("fixed", "csv"):
        raise ConfigError(f"data format must be fixed or csv, got {fmt!r}")
    data = DataSource(
        source=source,
        schema_path=base / data_sec["schema"] if "schema" in data_sec else None,
        input_path=base / data_sec["input"] if "input" in data_sec else None,
        input_format=fmt,
        synth_spec_path=base / data_sec["synth_spec"] if "synth_spec" in data_sec else None,
        synth_rows=int(data_sec.get("synth_rows", 20000)),
        synth_positive_fraction=float(data_sec.get("synth_positive_fraction", 0.806)),
        synth_separation=float(data_sec.get("synth_separation", 1.0)),
        synth_cohort_tags=_parse_bool(data_sec.get("synth_cohort_tags", "false")),
    )

    cohort_sec = section("cohort")
    cohorts = tuple(_split_list(cohort_sec.get("which", ALL_COHORTS)))
    for c in cohorts:
        if c not in COHORTS + (ALL_COHORTS,):
            raise ConfigError(f"unknown cohort {c!r}")
    cohort_rule = CohortRule(
        race_field=cohort_sec.get("race_field", "race_recode"),
        origin_field=cohort_sec.get("origin_field", "hispanic_origin"),
        white_race_codes=frozenset(_split_list(cohort_sec.get("white_race_codes", "1"))),
        non_hispanic_codes=frozenset(_split_list(cohort_sec.get("non_hispanic_codes", "0"))),
        hispanic_origin_codes=frozenset(_split_list(cohort_sec.get("hispanic_origin_codes", "1,2"))),
    )

    label_sec = section("label")
    label_rule = LabelRule(
        survival_field=label_sec.get("survival_field", "survival_months"),
        cause_field=label_sec.get("cause_field", "cause_of_death"),
        cutoff_months=int(label_sec.get("cutoff", 24)),
        cause_codes=frozenset(_split_list(label_sec.get("cause_codes", "C18"))),
    )

    prep_sec = section("prep")
    impute_plan = ImputePlan(
        targets=tuple(_split_list(prep_sec.get("impute_targets", "tumor_size,positive_nodes"))),
        cycles=int(prep_sec.get("impute_cycles", 10)),
        initial_fill=prep_sec.get("impute_fill", "mean"),
    )

    split_sec = section("split")
    imb_sec = section("imbalance")
    plans = tuple(_split_list(imb_sec.get("plans", "none")))
    for p in plans:
        if p not in METHODS:
            raise ConfigError(f"unknown imbalance plan {p!r}")

    models_sec = section("models")
    kinds = tuple(_split_list(models_sec.get("kinds", "logistic")))
    for kd in kinds:
        if kd not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {kd!r}")
    grids = {}
    for kind in kinds:
        sect = f"grid.{kind}"
        if parser.has_section(sect):
            grids[kind] = parse_grid_section(kind, dict(parser[sect]))

    run_sec = section("run")
    metric = run_sec.get("metric", "auc")
    if metric not in ("auc", "gmean"):
        raise ConfigError(f"selection metric must be auc or gmean, got {metric!r}")

    return ExperimentConfig(
        data=data,
        cohorts=cohorts,
        cohort_rule=cohort_rule,
        label_rule=label_rule,
        required_fields=tuple(_split_list(prep_sec.get("required", ""))),
        predictors=tuple(_split_list(prep_sec.get("predictors", ""))),
        impute_plan=impute_plan,
        impute_before_split=_parse_bool(prep_sec.get("impute_before_split", "false")),
        test_fraction=float(split_sec.get("test_fraction", 0.2)),
        k=int(split_sec.get("k", 5)),
        stratified=_parse_bool(split_sec.get("stratified", "true")),
        plans=plans,
        ratio=float(imb_sec.get("ratio", 1.0)),
        factor=float(imb_sec.get("factor", 5.0)),
        model_kinds=kinds,
        grids=grids,
        seed=int(run_sec.get("seed", 0)),
        threshold=float(run_sec.get("threshold", 0.5)),
        metric=metric,
        top_k=int(run_sec.get("top_k", 7)),
        raw_text=text,
    )


def load_experiment_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    return parse_experiment_config(path.read_text(), base_dir=path.parent)


@dataclass
class RunManifest:
    config_hash: str
    version: str
    stage_seeds: dict
    artifacts: list[str]
    timings: dict
    results: dict

    def to_json(self) -> str:
        return json.dumps({
            "config_hash": self.config_hash,
            "version": self.version,
            "stage_seeds": self.stage_seeds,
            "artifacts": self.artifacts,
            "timings": self.timings,
            "results": self.results,
        }, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        return cls(d["config_hash"], d["version"], d["stage_seeds"],
                   d["artifacts"], d["timings"], d["results"])


def _load_raw(cfg: ExperimentConfig):
    if cfg.data.source == "synth":
        seed = stage_seed(cfg.seed, "synth")
        if cfg.data.synth_spec_path is not None:
            spec = parse_synth_spec(cfg.data.synth_spec_path.read_text(), seed=seed)
        else:
            spec = benchmark_spec(
                n_rows=cfg.data.synth_rows,
                positive_fraction=cfg.data.synth_positive_fraction,
                separation=cfg.data.synth_separation,
                seed=seed,
                cohort_tags=cfg.data.synth_cohort_tags,
            )
        return generate_synthetic(spec).raw
    schema = parse_schema(cfg.data.schema_path.read_text())
    if cfg.data.input_format == "fixed":
        return parse_fixed_width_bytes(cfg.data.input_path.read_bytes(), schema)
    return read_delimited(cfg.data.input_path.read_text(), schema)


def _predictor_names(cfg: ExperimentConfig, ds: Dataset) -> list[str]:
    if cfg.predictors:
        return list(cfg.predictors)
    reserved = {cfg.label_rule.survival_field, cfg.label_rule.cause_field,
                cfg.cohort_rule.race_field, cfg.cohort_rule.origin_field}
    return [c.name for c in ds.columns if c.name not in reserved]


@dataclass
class PreparedCohort:
    """Train/test matrices for one cohort, standardized twin included.

    Gradient-trained kinds (logistic, mlp) consume the standardized pair;
    the tree kinds are scale-invariant and use the plain encoding.
    """
    cohort: str
    train_plain: EncodedMatrix
    test_plain: EncodedMatrix
    train_scaled: EncodedMatrix
    test_scaled: EncodedMatrix
    feature_map: FeatureMap

    def for_kind(self, kind: str):
        if kind in ("logistic", "mlp"):
            return self.train_scaled, self.test_scaled
        return self.train_plain, self.test_plain


def prepare_cohort(cfg: ExperimentConfig, ds: Dataset, cohort: str) -> PreparedCohort:
    """Filter one cohort, split, and fit all preprocessing on the training side."""
    if cohort != ALL_COHORTS:
        ds = filter_cohort(ds, cfg.cohort_rule, cohort)
    ds = ds.select_features(_predictor_names(cfg, ds))
    if cfg.impute_before_split:
        ds = fit_mice(ds, cfg.impute_plan, stage_seed(cfg.seed, f"impute:{cohort}"))[0]
    train_ds, test_ds = split(ds, cfg.test_fraction, stage_seed(cfg.seed, f"split:{cohort}"))
    if not cfg.impute_before_split:
        train_ds, fitted = fit_mice(train_ds, cfg.impute_plan,
                                    stage_seed(cfg.seed, f"impute:{cohort}"))
        test_ds = apply_mice(test_ds, fitted)
    fmap = fit_encoder(train_ds)
    m_train = encode(train_ds, fmap)
    m_test = encode(test_ds, fmap)
    scaler = fit_standardizer(m_train)
    return PreparedCohort(cohort, m_train, m_test,
                          scaler.transform(m_train), scaler.transform(m_test), fmap)


def _plan_for(cfg: ExperimentConfig, method: str, cohort: str) -> ImbalancePlan:
    return ImbalancePlan(method=method, ratio=cfg.ratio, factor=cfg.factor,
                         seed=stage_seed(cfg.seed, f"imbalance:{cohort}:{method}"))


@dataclass
class JobResult:
    cohort: str
    kind: str
    plan: str
    report: object
    cv: object
    model: object
    roc: np.ndarray


def _run_job(cfg: ExperimentConfig, prepared: PreparedCohort, kind: str, method: str) -> JobResult:
    m_train, m_test = prepared.for_kind(kind)
    plan = _plan_for(cfg, method, prepared.cohort)
    grid = [c.with_seed(stage_seed(cfg.seed, f"train:{prepared.cohort}:{method}:{kind}:{i}"))
            for i, c in enumerate(cfg.grid_for(kind))]
    cv = cross_validate(m_train, grid, plan=plan, k=cfg.k,
                        seed=stage_seed(cfg.seed, f"cv:{prepared.cohort}:{method}:{kind}"),
                        metric=cfg.metric, stratified=cfg.stratified,
                        threshold=cfg.threshold)
    final_matrix, sample_weight = apply_plan(m_train, plan)
    model = train(final_matrix, cv.selected_config, sample_weight)
    scores = predict_proba(model, m_test)
    report = evaluate_scores(scores, m_test.labels, cfg.threshold,
                             cohort=prepared.cohort, model_kind=kind, imbalance=method)
    return JobResult(prepared.cohort, kind, method, report, cv, model,
                     roc_points(scores, m_test.labels))


def _max_workers() -> int:
    raw = os.environ.get("SURVPIPE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"SURVPIPE_THREADS must be an integer, got {raw!r}") from None


@contextmanager
def _stage(timings: dict, name: str):
    """Time a stage; on failure, re-raise with the stage name attached.
    Artifacts written before the failure stay on disk for debugging."""
    t0 = time.perf_counter()
    try:
        yield
    except SurvpipeError as exc:
        raise type(exc)(f"[stage {name}] {exc}") from exc
    except OSError as exc:
        raise SurvpipeError(f"[stage {name}] {exc}") from exc
    finally:
        timings[name] = time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig, out_dir: Path) -> RunManifest:
    """Execute the full protocol and write reports, figures, models, manifest.

    Jobs (cohort x imbalance plan x model kind) are independent; the
    SURVPIPE_THREADS environment variable caps how many run concurrently.
    Results are reduced in config order regardless of completion order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings = {}
    artifacts = []

    with _stage(timings, "ingest"):
        raw = _load_raw(cfg)

    with _stage(timings, "label"):
        ds = decode(raw)
        ds = derive_labels(ds, cfg.label_rule)
        if cfg.required_fields:
            ds = drop_required_missing(ds, cfg.required_fields)

    with _stage(timings, "preprocess"):
        prepared = {cohort: prepare_cohort(cfg, ds, cohort) for cohort in cfg.cohorts}

    jobs = [(cohort, kind, method)
            for cohort in cfg.cohorts
            for method in cfg.plans
            for kind in cfg.model_kinds]
    with _stage(timings, "train_eval"):
        workers = _max_workers()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(
                    lambda j: _run_job(cfg, prepared[j[0]], j[1], j[2]), jobs))
        else:
            results = [_run_job(cfg, prepared[c], kind, m) for c, kind, m in jobs]

    with _stage(timings, "ranking"):
        baseline_method = cfg.plans[0]
        rankings = []
        for cohort in cfg.cohorts:
            for kind in cfg.model_kinds:
                if kind == "mlp":
                    rankings.append({"cohort": cohort, "model": kind,
                                     "top": None, "note": "unavailable"})
                    continue
                job = next(r for r in results
                           if (r.cohort, r.kind, r.plan) == (cohort, kind, baseline_method))
                imp = importance(job.model, prepared[cohort].feature_map, cohort=cohort)
                rankings.append({"cohort": cohort, "model": kind,
                                 "top": [n for n, _ in imp.ranked()[:cfg.top_k]],
                                 "scores": imp.as_dict()})

    with _stage(timings, "report"):
        artifacts += _write_reports(cfg, results, rankings, out_dir)
        artifacts += _write_models(results, prepared, out_dir)

    results_payload = {
        "cohorts": list(cfg.cohorts),
        "model_kinds": list(cfg.model_kinds),
        "plans": list(cfg.plans),
        "grid_signature": cfg.grid_signature(),
        "metrics": [
            {"cohort": r.cohort, "model": r.kind, "plan": r.plan,
             "auc": r.report.auc, "g_mean": r.report.g_mean,
             "sensitivity": r.report.sensitivity, "specificity": r.report.specificity,
             "tp": r.report.confusion.tp, "tn": r.report.confusion.tn,
             "fp": r.report.confusion.fp, "fn": r.report.confusion.fn,
             "selected": r.cv.selected_config.describe()}
            for r in results
        ],
        "rankings": rankings,
    }
    manifest = RunManifest(
        config_hash=cfg.config_hash(),
        version=VERSION,
        stage_seeds={name: stage_seed(cfg.seed, name) for name in ("synth",)} | {
            f"split:{c}": stage_seed(cfg.seed, f"split:{c}") for c in cfg.cohorts},
        artifacts=sorted(str(a.relative_to(out_dir)) for a in artifacts),
        timings=timings,
        results=results_payload,
    )
    (out_dir / "manifest.json").write_text(manifest.to_json())
    return manifest


def _metric_lookup(results, cohort, kind, method):
    for r in results:
        if (r.cohort, r.kind, r.plan) == (cohort, kind, method):
            return r
    return None


def _write_reports(cfg: ExperimentConfig, results, rankings, out_dir: Path) -> list[Path]:
    reports_dir = out_dir / "reports"
    figures_dir = out_dir / "figures"
    written = []
    baseline = cfg.plans[0]

    # model x cohort AUC for the baseline plan
    headers = ["model"] + [str(c) for c in cfg.cohorts]
    rows = []
    for kind in cfg.model_kinds:
        row = [kind]
        for cohort in cfg.cohorts:
            job = _metric_lookup(results, cohort, kind, baseline)
            row.append(job.report.auc if job else "")
        rows.append(row)
    written += write_table_pair(reports_dir, "auc_models",
                                "Test AUC by model and cohort", headers, rows)
    written.append(grouped_bar_figure(
        figures_dir / "auc_models.png", "Test AUC by model and cohort", "AUC",
        list(cfg.model_kinds),
        {str(c): [float(_metric_lookup(results, c, k, baseline).report.auc)
                  for k in cfg.model_kinds] for c in cfg.cohorts}))

    # top-k rankings, one column per (model, cohort); mlp is marked unavailable
    rank_headers = []
    rank_columns = []
    for entry in rankings:
        rank_headers.append(f"{entry['model']}/{entry['cohort']}")
        if entry["top"] is None:
            rank_columns.append(["unavailable"])
        else:
            rank_columns.append(list(entry["top"]))
    depth = max(len(c) for c in rank_columns)
    rank_rows = [["rank " + str(i + 1)] + [c[i] if i < len(c) else "" for c in rank_columns]
                 for i in range(depth)]
    written += write_table_pair(reports_dir, "rankings",
                                f"Top-{cfg.top_k} features by model and cohort",
                                ["rank"] + rank_headers, rank_rows)

    # per-plan metric tables (G-mean and AUC), rows = model x plan
    for metric_name, stem in (("g_mean", "imbalance_gmean"), ("auc", "imbalance_auc")):
        headers = ["model", "plan"] + [str(c) for c in cfg.cohorts]
        rows = []
        for kind in cfg.model_kinds:
            for method in cfg.plans:
                row = [kind, method]
                for cohort in cfg.cohorts:
                    job = _metric_lookup(results, cohort, kind, method)
                    row.append(getattr(job.report, metric_name) if job else "")
                rows.append(row)
        title = ("G-mean" if metric_name == "g_mean" else "AUC") + \
            " by model, imbalance plan, and cohort"
        written += write_table_pair(reports_dir, stem, title, headers, rows)
    written.append(grouped_bar_figure(
        figures_dir / "gmean_by_plan.png", "G-mean by model and imbalance plan", "G-mean",
        [f"{k}/{m}" for k in cfg.model_kinds for m in cfg.plans],
        {str(c): [float(_metric_lookup(results, c, k, m).report.g_mean)
                  for k in cfg.model_kinds for m in cfg.plans] for c in cfg.cohorts}))

    # sensitivity/specificity detail and per-fold CV table
    headers = ["cohort", "model", "plan", "auc", "g_mean", "sensitivity", "specificity",
               "tp", "tn", "fp", "fn", "selected"]
    rows = [[r.cohort, r.kind, r.plan, r.report.auc, r.report.g_mean,
             r.report.sensitivity, r.report.specificity,
             r.report.confusion.tp, r.report.confusion.tn,
             r.report.confusion.fp, r.report.confusion.fn,
             r.cv.selected_config.describe()] for r in results]
    written += write_table_pair(reports_dir, "test_metrics",
                                "Test-set metrics for every trained model", headers, rows)

    cv_headers = ["cohort", "model", "plan", "grid_index", "fold",
                  "auc", "g_mean", "sensitivity", "specificity"]
    cv_rows = []
    for r in results:
        for e in r.cv.entries:
            cv_rows.append([r.cohort, r.kind, r.plan, e.config_index, e.fold,
                            e.auc, e.g_mean, e.sensitivity, e.specificity])
    written += write_table_pair(reports_dir, "cv_folds",
                                "Cross-validation fold metrics", cv_headers, cv_rows)

    # ROC points per job
    roc_dir = reports_dir / "roc"
    roc_dir.mkdir(parents=True, exist_ok=True)
    for r in results:
        path = roc_dir / f"{r.cohort}_{r.kind}_{r.plan}.csv"
        lines = ["fpr,tpr"] + [f"{p[0]:.6f},{p[1]:.6f}" for p in r.roc]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)

    # importance bar figure per cohort for the first rankable model kind
    for entry in rankings:
        if entry["top"] is None or entry["model"] != next(
                (k for k in cfg.model_kinds if k != "mlp"), None):
            continue
        names = list(entry["scores"].keys())
        scores = [entry["scores"][n] for n in names]
        written.append(importance_figure(
            figures_dir / f"importance_{entry['model']}_{entry['cohort']}.png",
            f"Feature importance ({entry['model']}, {entry['cohort']})",
            names, scores))
    return written


def _write_models(results, prepared, out_dir: Path) -> list[Path]:
    models_dir = out_dir / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    written = []
    seen_maps = set()
    for r in results:
        path = models_dir / f"{r.cohort}_{r.kind}_{r.plan}.model"
        path.write_bytes(save_model(r.model))
        written.append(path)
        if r.cohort not in seen_maps:
            seen_maps.add(r.cohort)
            map_path = models_dir / f"{r.cohort}.map.json"
            map_path.write_text(prepared[r.cohort].feature_map.to_json())
            written.append(map_path)
    return written


def compare_cohorts(manifests: list[RunManifest]) -> dict:
    """Merge >= 2 manifests into side-by-side metric and ranking tables.

    All manifests must share the model grid; metric values are reported per
    (cohort, model, plan) column-wise, with MLP ranking cells marked
    unavailable.
    """
    if len(manifests) < 2:
        raise SurvpipeError("cohort comparison requires at least two manifests")
    signature = manifests[0].results["grid_signature"]
    for m in manifests[1:]:
        if m.results["grid_signature"] != signature:
            raise SurvpipeError("manifests have mismatched model grids")
    columns = []  # (cohort, manifest) in declaration order
    for m in manifests:
        for cohort in m.results["cohorts"]:
            columns.append((cohort, m))
    kinds = manifests[0].results["model_kinds"]
    plans = manifests[0].results["plans"]

    def metric_of(m, cohort, kind, plan, name):
        for row in m.results["metrics"]:
            if (row["cohort"], row["model"], row["plan"]) == (cohort, kind, plan):
                return row[name]
        return ""

    auc_rows = [[kind] + [metric_of(m, c, kind, plans[0], "auc") for c, m in columns]
                for kind in kinds]
    gmean_rows = [[f"{kind}/{plan}"] + [metric_of(m, c, kind, plan, "g_mean")
                                        for c, m in columns]
                  for kind in kinds for plan in plans]

    def ranking_of(m, cohort, kind):
        for entry in m.results["rankings"]:
            if (entry["cohort"], entry["model"]) == (cohort, kind):
                return entry["top"] if entry["top"] is not None else ["unavailable"]
        return [""]

    ranking_columns = {f"{kind}/{c}": ranking_of(m, c, kind)
                       for kind in kinds for c, m in columns}
    return {
        "cohort_labels": [c for c, _ in columns],
        "auc": {"headers": ["model"] + [c for c, _ in columns], "rows": auc_rows},
        "g_mean": {"headers": ["model/plan"] + [c for c, _ in columns], "rows": gmean_rows},
        "rankings": ranking_columns,
    }
