"""End-to-end experiment pipeline: prepare, sweep, report, train, eval.

prepare materializes per-resolution FFDS datasets (training data resized
and augmented, test sets resized only). sweep grid-searches every requested
model at every resolution, refits the winners, and scores them on every
test set. report renders a sweep's results as a CSV table plus SVG charts.
train/eval are single-cell commands for debugging and CI.

Determinism contract: a sweep with the same config and seed produces
byte-identical CSV and SVG outputs, regardless of worker count; cell
results land in pre-indexed slots so scheduling order cannot matter.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import logreg as logreg_mod
from . import svm as svm_mod
from .config import (SCALE_BY_DIM, ExperimentConfig, config_hash,
                     canonical_dict)
from .dataset import (LabeledDataset, ingest_directory, load_dataset,
                      save_dataset, vectorize)
from .errors import DataError, PyroclassError, UsageError
from .kernels import (GaussianKernel, PolynomialKernel, SigmoidKernel,
                      describe_kernel)
from .logreg import LogRegConfig, LogRegModel
from .metrics import (accuracy, auc, confusion, f1, fpr, roc_from_points,
                      roc_from_scores, tpr)
from .model_select import GridCell, grid_search
from .preprocess import augment, resize_bilinear
from .svgplot import line_chart, roc_chart, write_svg
from .svm import SvmConfig, SvmModel, train_smo

CSV_HEADER = "model,test_set,resolution,accuracy,tp,fp,fn,tn,tpr,fpr,f1,auc"

WORKERS_ENV = "PYROCLASS_WORKERS"


@dataclass(frozen=True, eq=False)
class SweepReport:
    """Everything a sweep produced, serializable to report.json."""

    provenance: dict
    models: tuple
    resolutions: tuple
    test_sets: tuple
    rows: tuple        # one dict per (model, resolution, test set)
    failures: tuple    # dicts: model, resolution, test_set (or None), error
    searches: tuple    # per-cell cross-validation tables
    point_rocs: tuple  # across-resolution operating-point curves


def resolve_workers(cfg: ExperimentConfig) -> int:
    """Config worker count, overridden by the PYROCLASS_WORKERS env var."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return cfg.workers
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, "
                         f"got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1, got {value}")
    return value


# ---------------------------------------------------------------- prepare

def _vectorize_resized(pairs, resolution: int, plan=None) -> LabeledDataset:
    """Resize (image, label) pairs to a square and vectorize.

    With an augmentation plan, each image's variants are materialized one
    source image at a time to bound peak memory at one image's worth.
    """
    variants_per = plan.variants_per_image if plan else 1
    n = len(pairs) * variants_per
    d = resolution * resolution * 3
    features = np.empty((n, d), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    row = 0
    for img, label in pairs:
        resized = resize_bilinear(img, resolution, resolution)
        if plan is None:
            group = [(resized, label)]
        else:
            group = augment([(resized, label)], plan)
        for variant, variant_label in group:
            features[row] = vectorize(variant)
            labels[row] = variant_label
            row += 1
    return LabeledDataset(features=features, labels=labels,
                          resolution=resolution)


def cmd_prepare(cfg: ExperimentConfig) -> dict:
    """Write per-resolution FFDS files for the training and test trees.

    Training data is augmented per the plan; test sets are never augmented.
    All source trees are ingested before the first file is written.
    Returns {(kind, name, resolution): path}.
    """
    train_pairs = ingest_directory(cfg.train_root, cfg.positive_dir,
                                   cfg.negative_dir)
    test_pairs = {name: ingest_directory(root, cfg.positive_dir,
                                         cfg.negative_dir)
                  for name, root in cfg.test_roots}
    cfg.dataset_dir().mkdir(parents=True, exist_ok=True)
    manifest = {}
    for resolution in sorted(cfg.resolutions):
        ds = _vectorize_resized(train_pairs, resolution, cfg.augmentation)
        path = cfg.train_file(resolution)
        save_dataset(ds, path)
        manifest[("train", "train", resolution)] = str(path)
        for name, _ in cfg.test_roots:
            ds = _vectorize_resized(test_pairs[name], resolution)
            path = cfg.test_file(name, resolution)
            save_dataset(ds, path)
            manifest[("test", name, resolution)] = str(path)
    return manifest


# ------------------------------------------------------------ model cells

def _resolve_scaled(values, d_feat: int) -> list:
    out = []
    for v in values:
        out.append(1.0 / d_feat if v == SCALE_BY_DIM else float(v))
    return sorted(set(out))


def _svm_trainer(kernel, c_value: float, cfg: ExperimentConfig):
    svm_cfg = SvmConfig(
        kernel=kernel, C=c_value,
        kkt_tol=cfg.svm.kkt_tol, eps=cfg.svm.eps,
        max_passes=cfg.svm.max_passes, max_iter=cfg.svm.max_iter,
        gram_budget_bytes=cfg.gram_cache_budget_bytes,
    )

    def train(ds: LabeledDataset):
        model = train_smo(ds, svm_cfg)
        return lambda X: svm_mod.predict_many(model, X)

    return svm_cfg, train


def _logreg_trainer(cfg: ExperimentConfig):
    lr_cfg = LogRegConfig(
        learning_rate=cfg.logreg.learning_rate,
        iterations=cfg.logreg.iterations,
        l2_strength=cfg.logreg.l2_strength,
    )

    def train(ds: LabeledDataset):
        model = logreg_mod.train_gd(ds, lr_cfg)
        return lambda X: logreg_mod.predict_many(model, X)

    return lr_cfg, train


def build_cells(model_name: str, cfg: ExperimentConfig,
                d_feat: int) -> list:
    """Grid cells for one model, in documented tie-break order.

    The order is ascending C, then ascending kernel parameters in each
    kernel's declared field order; ties in grid search resolve to the
    earliest cell.
    """
    grid = cfg.grid
    cells = []
    if model_name == "logreg":
        lr_cfg, train = _logreg_trainer(cfg)
        label = (f"logreg(learning_rate={lr_cfg.learning_rate:g},"
                 f"iterations={lr_cfg.iterations},"
                 f"l2_strength={lr_cfg.l2_strength:g})")
        return [GridCell(label=label, sort_key=(0.0,), make_trainer=train)]
    if model_name == "svm-gaussian":
        for c_value in sorted(set(map(float, grid.C))):
            for gamma in _resolve_scaled(grid.gaussian_gamma, d_feat):
                kernel = GaussianKernel(gamma=gamma)
                _, train = _svm_trainer(kernel, c_value, cfg)
                cells.append(GridCell(
                    label=f"C={c_value:g},{describe_kernel(kernel)}",
                    sort_key=(c_value, gamma), make_trainer=train))
        return cells
    if model_name == "svm-poly":
        for c_value in sorted(set(map(float, grid.C))):
            for degree in sorted(set(map(int, grid.polynomial_degree))):
                for offset in sorted(set(map(float,
                                             grid.polynomial_offset))):
                    kernel = PolynomialKernel(degree=degree, offset=offset)
                    _, train = _svm_trainer(kernel, c_value, cfg)
                    cells.append(GridCell(
                        label=f"C={c_value:g},{describe_kernel(kernel)}",
                        sort_key=(c_value, degree, offset),
                        make_trainer=train))
        return cells
    if model_name == "svm-sigmoid":
        for c_value in sorted(set(map(float, grid.C))):
            for slope in _resolve_scaled(grid.sigmoid_slope, d_feat):
                for offset in sorted(set(map(float, grid.sigmoid_offset))):
                    kernel = SigmoidKernel(slope=slope, offset=offset)
                    _, train = _svm_trainer(kernel, c_value, cfg)
                    cells.append(GridCell(
                        label=f"C={c_value:g},{describe_kernel(kernel)}",
                        sort_key=(c_value, slope, offset),
                        make_trainer=train))
        return cells
    raise UsageError(f"unknown model {model_name!r}; valid models: "
                     f"logreg, svm-sigmoid, svm-poly, svm-gaussian")


def _refit_best(model_name: str, best_label: str, cfg: ExperimentConfig,
                ds: LabeledDataset, d_feat: int):
    """Re-train the winning cell's model on the full training data."""
    if model_name == "logreg":
        lr_cfg, _ = _logreg_trainer(cfg)
        return logreg_mod.train_gd(ds, lr_cfg)
    for cell_kernel, c_value in _cells_params(model_name, cfg, d_feat):
        label = f"C={c_value:g},{describe_kernel(cell_kernel)}"
        if label == best_label:
            svm_cfg, _ = _svm_trainer(cell_kernel, c_value, cfg)
            return train_smo(ds, svm_cfg)
    raise PyroclassError(f"best cell {best_label!r} not found "
                         f"for {model_name}")


def _cells_params(model_name: str, cfg: ExperimentConfig, d_feat: int):
    """(kernel, C) pairs matching build_cells order for SVM models."""
    grid = cfg.grid
    if model_name == "svm-gaussian":
        for c_value in sorted(set(map(float, grid.C))):
            for gamma in _resolve_scaled(grid.gaussian_gamma, d_feat):
                yield GaussianKernel(gamma=gamma), c_value
    elif model_name == "svm-poly":
        for c_value in sorted(set(map(float, grid.C))):
            for degree in sorted(set(map(int, grid.polynomial_degree))):
                for offset in sorted(set(map(float,
                                             grid.polynomial_offset))):
                    yield PolynomialKernel(degree=degree,
                                           offset=offset), c_value
    elif model_name == "svm-sigmoid":
        for c_value in sorted(set(map(float, grid.C))):
            for slope in _resolve_scaled(grid.sigmoid_slope, d_feat):
                for offset in sorted(set(map(float, grid.sigmoid_offset))):
                    yield SigmoidKernel(slope=slope, offset=offset), c_value


def _decide(model, X) -> np.ndarray:
    if isinstance(model, SvmModel):
        return svm_mod.decision_many(model, X)
    return logreg_mod.decision_many(model, X)


def _predict(model, X) -> np.ndarray:
    if isinstance(model, SvmModel):
        return svm_mod.predict_many(model, X)
    return logreg_mod.predict_many(model, X)


def metrics_row(model_name: str, test_name: str, resolution: int,
                labels, predictions, scores) -> dict:
    """One report row: confusion counts, rates, and the threshold ROC."""
    cm = confusion(labels, predictions)
    try:
        curve = roc_from_scores(labels, scores)
        roc_points = [list(p) for p in curve.points]
        auc_value = auc(curve)
    except DataError:
        roc_points = []
        auc_value = None
    return {
        "model": model_name,
        "test_set": test_name,
        "resolution": resolution,
        "tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn,
        "accuracy": accuracy(cm),
        "tpr": tpr(cm), "fpr": fpr(cm), "f1": f1(cm),
        "auc": auc_value,
        "roc": roc_points,
    }


def _run_cell(cfg: ExperimentConfig, model_name: str, resolution: int):
    """Grid-search, refit, and score one (model, resolution) cell.

    Returns (search record, row dicts, failure dicts). Raises
    PyroclassError only if the cell is unusable as a whole.
    """
    train_path = cfg.train_file(resolution)
    if not train_path.exists():
        raise DataError(f"{train_path}: missing prepared dataset; "
                        f"run prepare first")
    ds = load_dataset(train_path)
    d_feat = ds.n_features
    cells = build_cells(model_name, cfg, d_feat)
    result = grid_search(ds, cells, cfg.folds, cfg.seed,
                         stratified=cfg.stratified)
    best_label = result.best.label
    model = _refit_best(model_name, best_label, cfg, ds, d_feat)
    search = {
        "model": model_name,
        "resolution": resolution,
        "best": best_label,
        "best_mean_accuracy": result.best_mean,
        "cells": [
            {
                "cell": cell.label,
                "fold_accuracies": (list(res.fold_accuracies)
                                    if res is not None else None),
                "mean_accuracy": res.mean if res is not None else None,
            }
            for cell, res in zip(result.cells, result.results)
        ],
        "cell_errors": [{"cell": result.cells[i].label, "error": msg}
                        for i, msg in result.cell_errors],
    }
    if isinstance(model, SvmModel):
        search["converged"] = model.converged
        search["iterations"] = model.iterations
    rows = []
    failures = []
    for test_name, _ in cfg.test_roots:
        try:
            test_ds = load_dataset(cfg.test_file(test_name, resolution))
            scores = _decide(model, test_ds.features)
            preds = _predict(model, test_ds.features)
            row = metrics_row(model_name, test_name, resolution,
                              test_ds.labels, preds, scores)
            row["best_params"] = best_label
            rows.append(row)
        except PyroclassError as exc:
            failures.append({"model": model_name, "resolution": resolution,
                             "test_set": test_name, "error": str(exc)})
    return search, rows, failures


def _run_cell_task(cfg: ExperimentConfig, model_name: str, resolution: int):
    """Worker entry point; exceptions are collapsed to failure records."""
    try:
        return _run_cell(cfg, model_name, resolution)
    except PyroclassError as exc:
        failure = {"model": model_name, "resolution": resolution,
                   "test_set": None, "error": str(exc)}
        return None, [], [failure]


# -------------------------------------------------------------- the sweep

def cmd_sweep(cfg: ExperimentConfig,
              implicit_prepare: bool = False) -> SweepReport:
    """Run every (model, resolution) cell and write report + CSV + SVGs.

    Cell failures are recorded in the report without aborting the rest.
    With implicit_prepare, missing FFDS files trigger cmd_prepare first.
    """
    resolutions = tuple(sorted(cfg.resolutions))
    needed = [cfg.train_file(r) for r in resolutions]
    needed += [cfg.test_file(name, r) for name, _ in cfg.test_roots
               for r in resolutions]
    if any(not p.exists() for p in needed):
        if implicit_prepare:
            cmd_prepare(cfg)
        else:
            missing = next(p for p in needed if not p.exists())
            raise DataError(f"{missing}: missing prepared dataset; run "
                            f"prepare first or pass --prepare")

    tasks = [(model, resolution) for model in cfg.models
             for resolution in resolutions]
    workers = resolve_workers(cfg)
    slots = {}
    if workers == 1 or len(tasks) <= 1:
        for model, resolution in tasks:
            slots[(model, resolution)] = _run_cell_task(cfg, model,
                                                        resolution)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {key: pool.submit(_run_cell_task, cfg, *key)
                       for key in tasks}
            for key, fut in futures.items():
                slots[key] = fut.result()

    rows = []
    failures = []
    searches = []
    for key in tasks:  # deterministic order, independent of scheduling
        search, cell_rows, cell_failures = slots[key]
        if search is not None:
            searches.append(search)
        rows.extend(cell_rows)
        failures.extend(cell_failures)

    point_rocs = []
    for model in cfg.models:
        for test_name, _ in cfg.test_roots:
            points = [(row["fpr"], row["tpr"]) for row in rows
                      if row["model"] == model
                      and row["test_set"] == test_name
                      and row["fpr"] is not None
                      and row["tpr"] is not None]
            if not points:
                continue
            curve = roc_from_points(points)
            point_rocs.append({
                "model": model,
                "test_set": test_name,
                "points": [list(p) for p in curve.points],
                "auc": auc(curve),
            })

    report = SweepReport(
        provenance={
            "config_hash": config_hash(cfg),
            "seed": cfg.seed,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "package_version": _package_version(),
            "workers": workers,
            "config": canonical_dict(cfg),
        },
        models=tuple(cfg.models),
        resolutions=resolutions,
        test_sets=tuple(name for name, _ in cfg.test_roots),
        rows=tuple(rows),
        failures=tuple(failures),
        searches=tuple(searches),
        point_rocs=tuple(point_rocs),
    )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_report(report, out_dir / "report.json")
    cmd_report(report, out_dir)
    return report


def _package_version() -> str:
    from . import __version__
    return __version__


def save_report(report: SweepReport, path) -> None:
    doc = {
        "provenance": report.provenance,
        "models": list(report.models),
        "resolutions": list(report.resolutions),
        "test_sets": list(report.test_sets),
        "rows": list(report.rows),
        "failures": list(report.failures),
        "searches": list(report.searches),
        "point_rocs": list(report.point_rocs),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_report(path) -> SweepReport:
    p = str(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise DataError(f"{p}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{p}: invalid report JSON ({exc})") from None
    try:
        return SweepReport(
            provenance=doc["provenance"],
            models=tuple(doc["models"]),
            resolutions=tuple(doc["resolutions"]),
            test_sets=tuple(doc["test_sets"]),
            rows=tuple(doc["rows"]),
            failures=tuple(doc["failures"]),
            searches=tuple(doc["searches"]),
            point_rocs=tuple(doc["point_rocs"]),
        )
    except KeyError as exc:
        raise DataError(f"{p}: report is missing section {exc}") from None


# -------------------------------------------------------------- reporting

def _csv_cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _row_order_key(report: SweepReport, row: dict):
    return (report.models.index(row["model"]),
            report.test_sets.index(row["test_set"]),
            row["resolution"])


def cmd_report(report: SweepReport, out_dir) -> list:
    """Write results.csv and the SVG charts; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: "
                        f"{exc}") from None
    written = []

    rows = sorted(report.rows, key=lambda r: _row_order_key(report, r))
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join([
            row["model"], row["test_set"], str(row["resolution"]),
            _csv_cell(row["accuracy"]),
            str(row["tp"]), str(row["fp"]), str(row["fn"]), str(row["tn"]),
            _csv_cell(row["tpr"]), _csv_cell(row["fpr"]),
            _csv_cell(row["f1"]), _csv_cell(row["auc"]),
        ]))
    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        f.write("\n".join(lines) + "\n")
    written.append(csv_path)

    for test_name in report.test_sets:
        series = []
        for model in report.models:
            pts = [(row["resolution"], row["accuracy"]) for row in rows
                   if row["model"] == model and row["test_set"] == test_name]
            if pts:
                series.append((model, pts))
        if not series:
            continue
        svg_path = out / f"accuracy_{test_name}.svg"
        write_svg(line_chart(series, f"accuracy vs resolution "
                                     f"({test_name})",
                             "resolution", "accuracy"), svg_path)
        written.append(svg_path)

    point_lookup = {(pr["model"], pr["test_set"]): pr
                    for pr in report.point_rocs}
    for model in report.models:
        for test_name in report.test_sets:
            curves = []
            for row in rows:
                if (row["model"] == model and row["test_set"] == test_name
                        and row["roc"]):
                    curves.append((f"res {row['resolution']}",
                                   [tuple(p) for p in row["roc"]]))
            pr = point_lookup.get((model, test_name))
            if pr:
                curves.append(("operating points",
                               [tuple(p) for p in pr["points"]]))
            if not curves:
                continue
            svg_path = out / f"roc_{model}_{test_name}.svg"
            write_svg(roc_chart(curves, f"ROC {model} ({test_name})"),
                      svg_path)
            written.append(svg_path)
    return written


# ----------------------------------------------------------- train / eval

def cmd_train(cfg: ExperimentConfig, model_name: str, resolution: int,
              out_path) -> dict:
    """Grid-search one cell, refit the winner, and serialize it."""
    if model_name not in ("logreg", "svm-sigmoid", "svm-poly",
                          "svm-gaussian"):
        raise UsageError(f"unknown model {model_name!r}; valid models: "
                         f"logreg, svm-sigmoid, svm-poly, svm-gaussian")
    train_path = cfg.train_file(resolution)
    if not train_path.exists():
        raise DataError(f"{train_path}: missing prepared dataset; "
                        f"run prepare first")
    ds = load_dataset(train_path)
    cells = build_cells(model_name, cfg, ds.n_features)
    result = grid_search(ds, cells, cfg.folds, cfg.seed,
                         stratified=cfg.stratified)
    model = _refit_best(model_name, result.best.label, cfg, ds,
                        ds.n_features)
    if isinstance(model, SvmModel):
        svm_mod.save_model(model, out_path)
    else:
        logreg_mod.save_model(model, out_path)
    return {"model": model_name, "resolution": resolution,
            "best_params": result.best.label,
            "cv_mean_accuracy": result.best_mean,
            "model_file": str(out_path)}


def load_any_model(path):
    """Load an SVMM or LOGR model file, dispatching on the magic bytes."""
    p = str(path)
    try:
        with open(path, "rb") as f:
            magic = f.read(4)
    except FileNotFoundError:
        raise DataError(f"{p}: file not found") from None
    if magic == svm_mod.SVMM_MAGIC:
        return svm_mod.load_model(path)
    if magic == logreg_mod.LOGR_MAGIC:
        return logreg_mod.load_model(path)
    raise DataError(f"{p}: bad magic {magic!r}, expected "
                    f"{svm_mod.SVMM_MAGIC!r} or {logreg_mod.LOGR_MAGIC!r}")


def cmd_eval(model_path, data_path) -> dict:
    """Score a serialized model on an FFDS dataset; returns the CSV row."""
    model = load_any_model(model_path)
    ds = load_dataset(data_path)
    scores = _decide(model, ds.features)
    preds = _predict(model, ds.features)
    model_name = "svm" if isinstance(model, SvmModel) else "logreg"
    if isinstance(model, SvmModel):
        model_name = f"svm-{model.kernel.tag}"
    row = metrics_row(model_name, Path(str(data_path)).stem,
                      ds.resolution, ds.labels, preds, scores)
    return row


def format_eval_row(row: dict) -> str:
    """Render an eval result as the CSV header plus one row."""
    line = ",".join([
        row["model"], row["test_set"], str(row["resolution"]),
        _csv_cell(row["accuracy"]),
        str(row["tp"]), str(row["fp"]), str(row["fn"]), str(row["tn"]),
        _csv_cell(row["tpr"]), _csv_cell(row["fpr"]),
        _csv_cell(row["f1"]), _csv_cell(row["auc"]),
    ])
    return f"{CSV_HEADER}\n{line}"
