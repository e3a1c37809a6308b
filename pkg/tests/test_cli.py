import json
from pathlib import Path

import numpy as np
import pytest

from survpipe.cli import main

SYNTH_SPEC = """
rows 600
positive_fraction 0.75
continuous age mean=60 sd=10 shift=-0.8
continuous tumor_size mean=40 sd=20 shift=-0.9 missing=0.15
categorical stage codes=1,2,3 freqs=0.5,0.3,0.2 tilt=-0.8
"""

RUN_CONFIG = """
[data]
source = synth
synth_rows = 1200

[split]
k = 3

[models]
kinds = logistic

[grid.logistic]
epochs = 60

[run]
seed = 3
"""


def invoke(*argv):
    return main(list(argv))


@pytest.fixture
def synth_files(tmp_path):
    spec = tmp_path / "cohort.synthspec"
    spec.write_text(SYNTH_SPEC)
    data = tmp_path / "cohort.csv"
    schema = tmp_path / "cohort.schema"
    assert invoke("synth", "--spec", str(spec), "--seed", "7",
                  "--output", str(data), "--out-schema", str(schema)) == 0
    return tmp_path, schema, data


def test_synth_then_ingest_round_trip(synth_files, capsys):
    tmp, schema, data = synth_files
    # strip the label column for plain ingest
    lines = data.read_text().splitlines()
    header = ",".join(lines[0].split(",")[:-1])
    body = [",".join(l.split(",")[:-1]) for l in lines[1:]]
    unlabeled = tmp / "plain.csv"
    unlabeled.write_text("\n".join([header] + body) + "\n")
    out = tmp / "echo.csv"
    assert invoke("ingest", "--schema", str(schema), "--input", str(unlabeled),
                  "--format", "csv", "--output", str(out)) == 0
    assert out.read_text() == unlabeled.read_text()


def test_full_prep_train_eval_rank_flow(synth_files, tmp_path, capsys):
    tmp, schema, data = synth_files
    labeled = tmp / "labeled.csv"
    assert invoke("prep", "label", "--schema", str(schema), "--input", str(data),
                  "--output", str(labeled), "--cause-codes", "C18") == 0
    imputed = tmp / "imputed.csv"
    assert invoke("prep", "impute", "--schema", str(schema), "--input", str(labeled),
                  "--targets", "tumor_size", "--cycles", "5", "--fill", "mean",
                  "--seed", "1", "--output", str(imputed)) == 0
    matrix, fmap = tmp / "m.csv", tmp / "map.json"
    assert invoke("prep", "encode", "--schema", str(schema), "--input", str(imputed),
                  "--out-matrix", str(matrix), "--out-map", str(fmap),
                  "--standardize", "--features", "age,tumor_size,stage") == 0
    model = tmp / "model.bin"
    assert invoke("train", "--model", "logistic", "--matrix", str(matrix),
                  "--map", str(fmap), "--seed", "5", "--imbalance", "weights",
                  "--output", str(model)) == 0
    roc = tmp / "roc.csv"
    assert invoke("eval", "--model", str(model), "--matrix", str(matrix),
                  "--map", str(fmap), "--metric", "auc", "--threshold", "0.5",
                  "--roc-out", str(roc)) == 0
    out = capsys.readouterr().out
    assert "auc = 0." in out
    assert roc.read_text().startswith("fpr,tpr")
    assert invoke("rank", "--model", str(model), "--map", str(fmap), "--top", "3") == 0
    out = capsys.readouterr().out
    assert "stage" in out


def test_cohort_subcommand(synth_files, tmp_path):
    tmp, schema, data = synth_files
    # no race fields in this spec: the command must fail as a data error
    out = tmp / "white.csv"
    code = invoke("prep", "cohort", "--schema", str(schema), "--input", str(data),
                  "--which", "white", "--output", str(out))
    assert code == 3


def test_run_and_compare(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(RUN_CONFIG)
    out_a = tmp_path / "out_a"
    out_b = tmp_path / "out_b"
    assert invoke("run", "--config", str(cfg), "--out", str(out_a)) == 0
    cfg_b = tmp_path / "exp_b.cfg"
    cfg_b.write_text(RUN_CONFIG.replace("seed = 3", "seed = 4"))
    assert invoke("run", "--config", str(cfg_b), "--out", str(out_b)) == 0
    cmp_dir = tmp_path / "cmp"
    assert invoke("compare", str(out_a / "manifest.json"), str(out_b / "manifest.json"),
                  "--out", str(cmp_dir)) == 0
    assert (cmp_dir / "compare_auc.csv").exists()


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[models]\nkinds = quantum\n")
    assert invoke("run", "--config", str(bad), "--out", str(tmp_path / "x")) == 2


def test_data_error_exit_code(tmp_path):
    schema = tmp_path / "s.schema"
    schema.write_text("record_width 3\nage continuous 0 3\n")
    data = tmp_path / "short.dat"
    data.write_bytes(b"06\n")
    assert invoke("ingest", "--schema", str(schema), "--input", str(data),
                  "--format", "fixed", "--output", str(tmp_path / "o.csv")) == 3


def test_missing_file_exit_code(tmp_path):
    assert invoke("ingest", "--schema", str(tmp_path / "nope.schema"),
                  "--input", str(tmp_path / "nope.dat"), "--format", "fixed",
                  "--output", str(tmp_path / "o.csv")) == 3


def test_fixed_width_ingest(tmp_path):
    schema = tmp_path / "s.schema"
    schema.write_text("record_width 6\ncode categorical 0 2\nval continuous 2 4 missing=9999\n")
    data = tmp_path / "records.dat"
    data.write_bytes(b"AB12.5\nCD9999\n")
    out = tmp_path / "o.csv"
    assert invoke("ingest", "--schema", str(schema), "--input", str(data),
                  "--format", "fixed", "--output", str(out)) == 0
    assert out.read_text() == "code,val\nAB,12.5\nCD,\n"
