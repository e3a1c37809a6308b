"""survpipe command line: ingest, synth, prep, train, eval, rank, run, compare.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import COHORTS, CohortRule, LabelRule, decode, derive_labels, drop_required_missing, filter_cohort
from .encoding import EncodedMatrix, FeatureMap, encode, fit_encoder, fit_standardizer
from .errors import ConfigError, ModelIOError, ParseError, SchemaError, SurvpipeError, ValidationError
from .experiment import (
    compare_cohorts,
    load_experiment_config,
    parse_grid_section,
    run_experiment,
    RunManifest,
)
from .imbalance import ImbalancePlan, METHODS, apply_plan
from .impute import ImputePlan, mice_impute
from .ingest import RawDataset, parse_fixed_width_bytes, read_delimited, write_delimited
from .metrics import evaluate_scores, roc_points
from .models import MODEL_KINDS, TrainConfig, load_model, predict_proba, save_model, train
from .ranking import importance, rank_table
from .reports import render_csv, render_text_table, write_table_pair
from .schema import CONTINUOUS, format_schema, parse_schema
from .synth import generate_synthetic, parse_synth_spec

LABEL_COLUMN = "label"


def _read_schema(path: str):
    return parse_schema(Path(path).read_text())


def _read_dataset(schema_path: str, input_path: str, fmt: str) -> RawDataset:
    schema = _read_schema(schema_path)
    if fmt == "fixed":
        return parse_fixed_width_bytes(Path(input_path).read_bytes(), schema)
    return read_delimited(Path(input_path).read_text(), schema)


def _write_labeled(path: Path, raw_text: str, labels: np.ndarray | None) -> None:
    """Append the label column to delimited text (labels ride along the data)."""
    lines = raw_text.rstrip("\n").split("\n")
    if labels is None:
        path.write_text(raw_text)
        return
    if LABEL_COLUMN in lines[0].split(","):
        raise ValidationError(f"field name {LABEL_COLUMN!r} is reserved for the label column")
    out = [lines[0] + f",{LABEL_COLUMN}"]
    for line, lab in zip(lines[1:], labels):
        out.append(f"{line},{int(lab)}")
    path.write_text("\n".join(out) + "\n")


def _split_labeled(text: str) -> tuple[str, np.ndarray | None]:
    """Strip a trailing label column written by _write_labeled, if present."""
    lines = text.rstrip("\n").split("\n")
    header = lines[0].split(",")
    if header[-1] != LABEL_COLUMN:
        return text, None
    labels = []
    data_lines = [",".join(header[:-1])]
    for line in lines[1:]:
        cells = line.split(",")
        labels.append(int(cells[-1]))
        data_lines.append(",".join(cells[:-1]))
    return "\n".join(data_lines) + "\n", np.array(labels, dtype=np.int8)


def _dataset_to_raw(ds) -> RawDataset:
    """Typed dataset back to raw cells (repr keeps floats round-trippable)."""
    from .schema import FieldSpec, Schema
    fields = []
    columns = []
    offset = 0
    for c in ds.columns:
        width = 25
        fields.append(FieldSpec(c.name, c.kind, offset, width, categories=c.categories))
        offset += width
        col = np.empty(len(c.values), dtype=object)
        if c.kind == CONTINUOUS:
            for i, v in enumerate(c.values):
                col[i] = None if np.isnan(v) else repr(float(v))
        else:
            col[:] = c.values
        columns.append(col)
    return RawDataset(Schema(offset, tuple(fields)), tuple(columns))


def cmd_ingest(args) -> int:
    raw = _read_dataset(args.schema, args.input, args.format)
    Path(args.output).write_text(write_delimited(raw))
    print(f"wrote {raw.n_rows} rows to {args.output}")
    return 0


def cmd_synth(args) -> int:
    spec = parse_synth_spec(Path(args.spec).read_text(), seed=args.seed)
    result = generate_synthetic(spec)
    _write_labeled(Path(args.output), write_delimited(result.raw), result.labels)
    if args.out_schema:
        Path(args.out_schema).write_text(format_schema(result.schema))
    print(f"wrote {result.raw.n_rows} rows "
          f"({result.labels.mean():.3f} positive) to {args.output}")
    return 0


def _load_typed(args):
    text, labels = _split_labeled(Path(args.input).read_text())
    schema = _read_schema(args.schema)
    ds = decode(read_delimited(text, schema))
    if labels is not None:
        ds = ds.with_labels(labels)
    return ds


def cmd_prep_label(args) -> int:
    ds = _load_typed(args)
    rule = LabelRule(survival_field=args.survival_field, cause_field=args.cause_field,
                     cutoff_months=args.cutoff,
                     cause_codes=frozenset(args.cause_codes.split(",")))
    ds = derive_labels(ds, rule)
    if args.required:
        ds = drop_required_missing(ds, args.required.split(","))
    _write_labeled(Path(args.output), write_delimited(_dataset_to_raw(ds)), ds.labels)
    print(f"labeled {ds.n_rows} rows ({float(ds.labels.mean()):.3f} positive)")
    return 0


def cmd_prep_cohort(args) -> int:
    ds = _load_typed(args)
    rule = CohortRule(race_field=args.race_field, origin_field=args.origin_field,
                      white_race_codes=frozenset(args.white_codes.split(",")),
                      non_hispanic_codes=frozenset(args.non_hispanic_codes.split(",")),
                      hispanic_origin_codes=frozenset(args.hispanic_codes.split(",")))
    out = filter_cohort(ds, rule, args.which)
    _write_labeled(Path(args.output), write_delimited(_dataset_to_raw(out)), out.labels)
    print(f"cohort {args.which}: {out.n_rows} of {ds.n_rows} rows kept")
    return 0


def cmd_prep_impute(args) -> int:
    ds = _load_typed(args)
    plan = ImputePlan(targets=tuple(args.targets.split(",")), cycles=args.cycles,
                      initial_fill=args.fill)
    out = mice_impute(ds, plan, seed=args.seed)
    _write_labeled(Path(args.output), write_delimited(_dataset_to_raw(out)), out.labels)
    print(f"imputed targets {plan.targets} over {plan.cycles} cycles")
    return 0


def cmd_prep_encode(args) -> int:
    ds = _load_typed(args)
    if args.features:
        ds = ds.select_features(args.features.split(","))
    fmap = fit_encoder(ds)
    matrix = encode(ds, fmap)
    if args.standardize:
        matrix = fit_standardizer(matrix).transform(matrix)
    header = ",".join(fmap.column_names())
    lines = [header + (f",{LABEL_COLUMN}" if matrix.labels is not None else "")]
    for i in range(matrix.n_rows):
        cells = [repr(float(v)) for v in matrix.X[i]]
        if matrix.labels is not None:
            cells.append(str(int(matrix.labels[i])))
        lines.append(",".join(cells))
    Path(args.out_matrix).write_text("\n".join(lines) + "\n")
    Path(args.out_map).write_text(fmap.to_json())
    print(f"encoded {matrix.n_rows} x {matrix.n_columns} matrix")
    return 0


def _read_matrix(matrix_path: str, map_path: str) -> EncodedMatrix:
    fmap = FeatureMap.from_json(Path(map_path).read_text())
    lines = Path(matrix_path).read_text().rstrip("\n").split("\n")
    header = lines[0].split(",")
    has_labels = header[-1] == LABEL_COLUMN
    expected = fmap.column_names() + ([LABEL_COLUMN] if has_labels else [])
    if header != expected:
        raise ParseError("matrix header does not match the feature map")
    rows = [line.split(",") for line in lines[1:]]
    X = np.array([[float(v) for v in r[: len(r) - (1 if has_labels else 0)]] for r in rows])
    labels = np.array([int(r[-1]) for r in rows], dtype=np.int8) if has_labels else None
    if X.size == 0:
        X = X.reshape(0, fmap.n_columns)
    return EncodedMatrix(X, fmap, labels)


def _imbalance_plan(args) -> ImbalancePlan | None:
    if args.imbalance == "none":
        return None
    return ImbalancePlan(method=args.imbalance, ratio=args.ratio, factor=args.factor,
                         seed=args.seed)


def cmd_train(args) -> int:
    matrix = _read_matrix(args.matrix, args.map)
    if args.config:
        parser = configparser.ConfigParser()
        parser.read_string(Path(args.config).read_text())
        for section in (args.model, f"grid.{args.model}"):
            if parser.has_section(section):
                break
        else:
            raise ConfigError(f"config has no [{args.model}] section")
        grid = parse_grid_section(args.model, dict(parser[section]))
        if len(grid) != 1:
            raise ConfigError(
                f"train expects exactly one grid point, config expands to {len(grid)}")
        cfg = grid[0].with_seed(args.seed)
    else:
        cfg = TrainConfig(kind=args.model, seed=args.seed)
    m, sample_weight = apply_plan(matrix, _imbalance_plan(args))
    model = train(m, cfg, sample_weight)
    Path(args.output).write_bytes(save_model(model))
    print(f"trained {args.model} on {m.n_rows} rows -> {args.output}")
    return 0


def cmd_eval(args) -> int:
    matrix = _read_matrix(args.matrix, args.map)
    model = load_model(Path(args.model).read_bytes())
    scores = predict_proba(model, matrix)
    report = evaluate_scores(scores, matrix.labels, threshold=args.threshold,
                             model_kind=model.kind)
    headers = ["metric", "value"]
    rows = [["auc", report.auc], ["g_mean", report.g_mean],
            ["sensitivity", report.sensitivity], ["specificity", report.specificity],
            ["tp", report.confusion.tp], ["tn", report.confusion.tn],
            ["fp", report.confusion.fp], ["fn", report.confusion.fn],
            ["threshold", report.threshold]]
    text = render_text_table(f"Evaluation ({model.kind})", headers, rows)
    print(text, end="")
    if args.output:
        write_table_pair(Path(args.output).parent, Path(args.output).name,
                         f"Evaluation ({model.kind})", headers, rows)
    if args.roc_out:
        pts = roc_points(scores, matrix.labels)
        Path(args.roc_out).write_text(
            "fpr,tpr\n" + "\n".join(f"{p[0]:.6f},{p[1]:.6f}" for p in pts) + "\n")
    primary = report.auc if args.metric == "auc" else report.g_mean
    print(f"{args.metric} = {primary:.4f}")
    return 0


def cmd_rank(args) -> int:
    fmap = FeatureMap.from_json(Path(args.map).read_text())
    model = load_model(Path(args.model).read_bytes())
    imp = importance(model, fmap)
    headers, rows = rank_table([imp], top_k=args.top)
    table = render_text_table(f"Top-{args.top} features", ["rank"] + headers,
                              [[i + 1] + row for i, row in enumerate(rows)])
    print(table, end="")
    if args.output:
        Path(args.output).write_text(
            render_csv(["rank"] + headers, [[i + 1] + row for i, row in enumerate(rows)]))
    return 0


def cmd_run(args) -> int:
    cfg = load_experiment_config(Path(args.config))
    manifest = run_experiment(cfg, Path(args.out))
    print(f"run complete: {len(manifest.artifacts)} artifacts in {args.out}")
    print(f"config hash {manifest.config_hash[:12]}")
    return 0


def cmd_compare(args) -> int:
    manifests = [RunManifest.from_json(Path(p).read_text()) for p in args.manifests]
    merged = compare_cohorts(manifests)
    out_dir = Path(args.out)
    write_table_pair(out_dir, "compare_auc", "Test AUC by model and cohort",
                     merged["auc"]["headers"], merged["auc"]["rows"])
    write_table_pair(out_dir, "compare_gmean", "G-mean by model/plan and cohort",
                     merged["g_mean"]["headers"], merged["g_mean"]["rows"])
    rank_headers = list(merged["rankings"].keys())
    depth = max(len(v) for v in merged["rankings"].values())
    rank_rows = [[i + 1] + [merged["rankings"][h][i] if i < len(merged["rankings"][h]) else ""
                            for h in rank_headers] for i in range(depth)]
    write_table_pair(out_dir, "compare_rankings", "Feature rankings by model and cohort",
                     ["rank"] + rank_headers, rank_rows)
    print(f"comparison tables written to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="survpipe",
        description="cohort-specific survivability modeling pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="decode a fixed-width or delimited file")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("fixed", "csv"), required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--out-schema", help="also write the generated schema file")
    p.set_defaults(func=cmd_synth)

    prep = sub.add_parser("prep", help="preprocessing stages").add_subparsers(
        dest="prep_command", required=True)

    p = prep.add_parser("label", help="derive binary outcome labels")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--cutoff", type=int, default=24)
    p.add_argument("--cause-codes", default="C18")
    p.add_argument("--survival-field", default="survival_months")
    p.add_argument("--cause-field", default="cause_of_death")
    p.add_argument("--required", default="", help="comma list: drop rows missing these")
    p.set_defaults(func=cmd_prep_label)

    p = prep.add_parser("cohort", help="filter to one cohort")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--which", choices=COHORTS, required=True)
    p.add_argument("--race-field", default="race_recode")
    p.add_argument("--origin-field", default="hispanic_origin")
    p.add_argument("--white-codes", default="1")
    p.add_argument("--non-hispanic-codes", default="0")
    p.add_argument("--hispanic-codes", default="1,2")
    p.set_defaults(func=cmd_prep_cohort)

    p = prep.add_parser("impute", help="chained-equation imputation")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--targets", default="tumor_size,positive_nodes")
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--fill", choices=("mean", "median"), default="mean")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_prep_impute)

    p = prep.add_parser("encode", help="one-hot encode to a design matrix")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out-matrix", required=True)
    p.add_argument("--out-map", required=True)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--features", default="", help="comma list of predictor fields (default: all)")
    p.set_defaults(func=cmd_prep_encode)

    p = sub.add_parser("train", help="train one model on an encoded matrix")
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config", help="hyperparameter file (one grid point)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--imbalance", choices=METHODS, default="none")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--factor", type=float, default=5.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--metric", choices=("auc", "gmean"), default="auc")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--output", help="write the metric table here (stem path)")
    p.add_argument("--roc-out", help="write (FPR, TPR) points here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rank", help="feature importance ranking from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--top", type=int, default=7)
    p.add_argument("--output", help="write the ranking as CSV here")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="merge manifests into cross-cohort tables")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, ParseError, ValidationError, ModelIOError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (FileNotFoundError, SurvpipeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
