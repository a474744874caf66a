"""End-to-end pipeline: prepare, sweep, report, train, eval.

A small synthetic corpus drives a real sweep once per module; the tests
then assert on its artifacts (row cardinality, CSV shape, determinism,
failure isolation) rather than re-running the pipeline per test.
"""

import json
import os

import numpy as np
import pytest

import pyroclass.experiment as experiment
from pyroclass.config import config_from_dict
from pyroclass.dataset import load_dataset
from pyroclass.errors import DataError, TrainingError, UsageError
from pyroclass.experiment import (CSV_HEADER, WORKERS_ENV, cmd_eval,
                                  cmd_prepare, cmd_report, cmd_sweep,
                                  cmd_train, format_eval_row,
                                  load_any_model, load_report, metrics_row,
                                  resolve_workers, save_report)
from pyroclass.synthetic import write_corpus

N_PER_CLASS = 6
RESOLUTIONS = [8, 12]

SMALL_GRID = {
    "C": [1.0],
    "polynomial_degree": [2],
    "polynomial_offset": [1.0],
    "gaussian_gamma": ["1/d"],
    "sigmoid_slope": ["1/d"],
    "sigmoid_offset": [0.0],
}


def small_config(root, out, **extra):
    doc = {
        "train_root": str(root / "train"),
        "test_roots": {"hold": str(root / "hold"),
                       "skew": str(root / "skew")},
        "output_dir": str(out),
        "resolutions": RESOLUTIONS,
        "grid": SMALL_GRID,
        "folds": 4,
        "seed": 1,
        "stratified": True,
        "logreg": {"iterations": 200},
        **extra,
    }
    return config_from_dict(doc)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    write_corpus(root / "train", N_PER_CLASS, seed=1)
    write_corpus(root / "hold", N_PER_CLASS, seed=2)
    write_corpus(root / "skew", 3, seed=3)
    return root


@pytest.fixture(scope="module")
def sweep_out(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = small_config(corpus, out)
    report = cmd_sweep(cfg, implicit_prepare=True)
    return cfg, report, out


# ----------------------------------------------------------------- corpus

def test_corpus_is_byte_deterministic(tmp_path):
    write_corpus(tmp_path / "a", 3, seed=9)
    write_corpus(tmp_path / "b", 3, seed=9)
    for sub in ("fire", "nofire"):
        a_files = sorted((tmp_path / "a" / sub).iterdir())
        b_files = sorted((tmp_path / "b" / sub).iterdir())
        assert [p.name for p in a_files] == [p.name for p in b_files]
        for pa, pb in zip(a_files, b_files):
            assert pa.read_bytes() == pb.read_bytes()


# ---------------------------------------------------------------- prepare

def test_prepare_writes_expected_datasets(corpus, tmp_path):
    cfg = small_config(corpus, tmp_path / "out")
    manifest = cmd_prepare(cfg)
    assert set(manifest) == {
        (kind, name, res)
        for res in RESOLUTIONS
        for kind, name in (("train", "train"), ("test", "hold"),
                           ("test", "skew"))
    }
    for res in RESOLUTIONS:
        train = load_dataset(cfg.train_file(res))
        # flip + blur quadruple every source image
        assert train.n_samples == 2 * N_PER_CLASS * 4
        assert train.n_features == res * res * 3
        assert train.resolution == res
        assert int(np.sum(train.labels == 1)) == N_PER_CLASS * 4
        hold = load_dataset(cfg.test_file("hold", res))
        assert hold.n_samples == 2 * N_PER_CLASS  # never augmented
        skew = load_dataset(cfg.test_file("skew", res))
        assert skew.n_samples == 6


def test_prepare_ingests_everything_before_writing(corpus, tmp_path):
    out = tmp_path / "out"
    cfg = small_config(corpus, out,
                       test_roots={"hold": str(corpus / "hold"),
                                   "gone": str(tmp_path / "missing")})
    with pytest.raises(DataError):
        cmd_prepare(cfg)
    assert not cfg.dataset_dir().exists()  # failed before any write


def test_prepare_is_deterministic(corpus, tmp_path):
    cfg_a = small_config(corpus, tmp_path / "a")
    cfg_b = small_config(corpus, tmp_path / "b")
    cmd_prepare(cfg_a)
    cmd_prepare(cfg_b)
    for res in RESOLUTIONS:
        assert cfg_a.train_file(res).read_bytes() == \
            cfg_b.train_file(res).read_bytes()


# ------------------------------------------------------------------ sweep

def test_sweep_row_cardinality(sweep_out):
    cfg, report, _ = sweep_out
    assert len(report.rows) == len(cfg.models) * len(RESOLUTIONS) * 2
    assert report.failures == ()
    assert len(report.searches) == len(cfg.models) * len(RESOLUTIONS)
    seen = {(r["model"], r["test_set"], r["resolution"])
            for r in report.rows}
    assert len(seen) == len(report.rows)


def test_sweep_requires_prepared_data_without_flag(corpus, tmp_path):
    cfg = small_config(corpus, tmp_path / "out")
    with pytest.raises(DataError) as err:
        cmd_sweep(cfg, implicit_prepare=False)
    assert "prepare" in str(err.value)


def test_sweep_learns_the_classes(sweep_out):
    _, report, _ = sweep_out
    for row in report.rows:
        if row["model"] == "svm-gaussian" and row["test_set"] == "hold":
            assert row["accuracy"] >= 0.9, row


def test_csv_shape_and_order(sweep_out):
    cfg, report, out = sweep_out
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + len(report.rows)
    keys = []
    for line in lines[1:]:
        fields = line.split(",")
        assert len(fields) == 12
        keys.append((cfg.models.index(fields[0]),
                     ("hold", "skew").index(fields[1]),
                     int(fields[2])))
        float(fields[3])  # accuracy parses
        for field in fields[4:8]:
            int(field)
    assert keys == sorted(keys)


def test_report_json_roundtrip(sweep_out):
    _, report, out = sweep_out
    back = load_report(out / "report.json")
    assert back.rows == report.rows
    assert back.models == report.models
    assert back.test_sets == report.test_sets
    assert back.resolutions == report.resolutions
    assert back.point_rocs == report.point_rocs
    assert back.provenance["config_hash"] == \
        report.provenance["config_hash"]


def test_report_charts_written(sweep_out):
    cfg, report, out = sweep_out
    for name in report.test_sets:
        assert (out / f"accuracy_{name}.svg").exists()
    for model in cfg.models:
        for name in report.test_sets:
            assert (out / f"roc_{model}_{name}.svg").exists()


def test_rerun_is_byte_identical(corpus, sweep_out, tmp_path):
    _, _, out_first = sweep_out
    out_again = tmp_path / "again"
    cmd_sweep(small_config(corpus, out_again), implicit_prepare=True)
    assert (out_again / "results.csv").read_bytes() == \
        (out_first / "results.csv").read_bytes()
    for svg in sorted(out_first.glob("*.svg")):
        assert (out_again / svg.name).read_bytes() == svg.read_bytes()


def test_rerender_from_report_is_identical(sweep_out, tmp_path):
    _, _, out = sweep_out
    report = load_report(out / "report.json")
    rerender = tmp_path / "rerender"
    written = cmd_report(report, rerender)
    assert (rerender / "results.csv").read_bytes() == \
        (out / "results.csv").read_bytes()
    assert {p.name for p in written} == \
        {"results.csv"} | {p.name for p in out.glob("*.svg")}


def test_parallel_sweep_matches_sequential(corpus, sweep_out, tmp_path):
    _, _, out_seq = sweep_out
    out_par = tmp_path / "par"
    cfg = small_config(corpus, out_par, workers=2)
    report = cmd_sweep(cfg, implicit_prepare=True)
    assert report.provenance["workers"] == 2
    assert (out_par / "results.csv").read_bytes() == \
        (out_seq / "results.csv").read_bytes()


def test_sweep_isolates_cell_failures(corpus, tmp_path, monkeypatch):
    out = tmp_path / "out"
    cfg = small_config(corpus, out, models=["logreg", "svm-gaussian"])
    real = experiment.train_smo

    def flaky(ds, svm_cfg):
        if ds.resolution == RESOLUTIONS[0]:
            raise TrainingError("injected failure")
        return real(ds, svm_cfg)

    monkeypatch.setattr(experiment, "train_smo", flaky)
    report = cmd_sweep(cfg, implicit_prepare=True)
    # the gaussian cell at the first resolution failed outright
    assert len(report.failures) == 1
    failure = report.failures[0]
    assert failure["model"] == "svm-gaussian"
    assert failure["resolution"] == RESOLUTIONS[0]
    assert failure["test_set"] is None
    assert "injected failure" in failure["error"]
    # every other cell still produced rows
    assert len(report.rows) == (2 * len(RESOLUTIONS) - 1) * 2
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 1 + len(report.rows)


def test_sweep_isolates_corrupt_test_set(corpus, tmp_path):
    out = tmp_path / "out"
    cfg = small_config(corpus, out, models=["logreg"])
    cmd_prepare(cfg)
    victim = cfg.test_file("skew", RESOLUTIONS[1])
    victim.write_bytes(victim.read_bytes()[:40])  # truncate mid-header
    report = cmd_sweep(cfg)
    assert len(report.failures) == 1
    assert report.failures[0]["test_set"] == "skew"
    assert report.failures[0]["resolution"] == RESOLUTIONS[1]
    assert len(report.rows) == len(RESOLUTIONS) * 2 - 1


# ------------------------------------------------------------ metrics_row

def test_metrics_row_basic():
    row = metrics_row("logreg", "hold", 10,
                      np.array([1, 1, -1, -1]),
                      np.array([1, -1, 1, -1]),
                      np.array([0.9, 0.2, 0.6, 0.1]))
    assert (row["tp"], row["fp"], row["fn"], row["tn"]) == (1, 1, 1, 1)
    assert row["accuracy"] == 0.5
    assert row["auc"] is not None
    assert row["roc"][0] == [0.0, 0.0] and row["roc"][-1] == [1.0, 1.0]


def test_metrics_row_single_class_has_no_roc():
    row = metrics_row("logreg", "hold", 10,
                      np.array([1, 1]), np.array([1, -1]),
                      np.array([0.9, 0.2]))
    assert row["auc"] is None
    assert row["roc"] == []
    assert row["fpr"] is None


# ---------------------------------------------------------------- workers

def test_resolve_workers(monkeypatch):
    cfg = config_from_dict({"train_root": "t", "test_roots": {"a": "p"},
                            "output_dir": "o", "workers": 3})
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert resolve_workers(cfg) == 3
    monkeypatch.setenv(WORKERS_ENV, "5")
    assert resolve_workers(cfg) == 5
    monkeypatch.setenv(WORKERS_ENV, "zero")
    with pytest.raises(UsageError):
        resolve_workers(cfg)
    monkeypatch.setenv(WORKERS_ENV, "0")
    with pytest.raises(UsageError):
        resolve_workers(cfg)


# ----------------------------------------------------------- train / eval

def test_train_and_eval_roundtrip(corpus, sweep_out, tmp_path):
    cfg, report, _ = sweep_out
    res = RESOLUTIONS[0]
    for model_name in ("logreg", "svm-gaussian"):
        model_path = tmp_path / f"{model_name}.bin"
        info = cmd_train(cfg, model_name, res, model_path)
        assert info["model"] == model_name
        assert model_path.exists()
        row = cmd_eval(model_path, cfg.test_file("hold", res))
        sweep_row = next(r for r in report.rows
                         if r["model"] == model_name
                         and r["test_set"] == "hold"
                         and r["resolution"] == res)
        for key in ("accuracy", "tp", "fp", "fn", "tn", "auc"):
            assert row[key] == sweep_row[key], (model_name, key)
        assert row["model"] == model_name
        assert row["test_set"] == f"test_hold_{res}"
        assert row["resolution"] == res


def test_train_rejects_unknown_model(corpus, sweep_out, tmp_path):
    cfg, _, _ = sweep_out
    with pytest.raises(UsageError) as err:
        cmd_train(cfg, "svm-rbf", RESOLUTIONS[0], tmp_path / "m.bin")
    assert "svm-gaussian" in str(err.value)


def test_train_requires_prepared_data(corpus, tmp_path):
    cfg = small_config(corpus, tmp_path / "fresh")
    with pytest.raises(DataError):
        cmd_train(cfg, "logreg", RESOLUTIONS[0], tmp_path / "m.bin")


def test_load_any_model_dispatch(tmp_path, sweep_out, corpus):
    cfg, _, _ = sweep_out
    bad = tmp_path / "junk.bin"
    bad.write_bytes(b"JUNKJUNKJUNK")
    with pytest.raises(DataError) as err:
        load_any_model(bad)
    assert "SVMM" in str(err.value) and "LOGR" in str(err.value)
    with pytest.raises(DataError):
        load_any_model(tmp_path / "absent.bin")


def test_eval_dimension_mismatch(corpus, sweep_out, tmp_path):
    cfg, _, _ = sweep_out
    model_path = tmp_path / "m.bin"
    cmd_train(cfg, "logreg", RESOLUTIONS[0], model_path)
    with pytest.raises(DataError) as err:
        cmd_eval(model_path, cfg.test_file("hold", RESOLUTIONS[1]))
    d0 = RESOLUTIONS[0] ** 2 * 3
    d1 = RESOLUTIONS[1] ** 2 * 3
    assert str(d0) in str(err.value) and str(d1) in str(err.value)


def test_format_eval_row():
    row = {"model": "logreg", "test_set": "hold", "resolution": 10,
           "accuracy": 0.8684214, "tp": 165, "fp": 25, "fn": 25, "tn": 165,
           "tpr": 0.868421, "fpr": 0.131579, "f1": 0.868421, "auc": None}
    text = format_eval_row(row)
    head, line = text.splitlines()
    assert head == CSV_HEADER
    assert line == ("logreg,hold,10,0.868421,165,25,25,165,"
                    "0.868421,0.131579,0.868421,n/a")


# ------------------------------------------------------------ report i/o

def test_load_report_errors(tmp_path):
    with pytest.raises(DataError):
        load_report(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    with pytest.raises(DataError):
        load_report(bad)
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"provenance": {}, "models": []}))
    with pytest.raises(DataError) as err:
        load_report(partial)
    assert "missing section" in str(err.value)


def test_empty_report_renders_header_only(tmp_path):
    report = experiment.SweepReport(
        provenance={}, models=(), resolutions=(), test_sets=(),
        rows=(), failures=(), searches=(), point_rocs=())
    save_report(report, tmp_path / "report.json")
    written = cmd_report(load_report(tmp_path / "report.json"), tmp_path)
    assert [p.name for p in written] == ["results.csv"]
    assert (tmp_path / "results.csv").read_text() == CSV_HEADER + "\n"
    assert not list(tmp_path.glob("*.svg"))
