"""Experiment configuration: one JSON document, validated and hashable.

The canonical form (defaults filled in, keys sorted) feeds a sha256 that
reports carry as provenance, so any two runs with the same hash saw the
same effective settings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UsageError
from .preprocess import AugmentPlan

MODEL_NAMES = ("logreg", "svm-sigmoid", "svm-poly", "svm-gaussian")

DEFAULT_RESOLUTIONS = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 150, 200, 250)

# "1/d" resolves to 1 / n_features once the feature width is known.
SCALE_BY_DIM = "1/d"


@dataclass(frozen=True)
class GridConfig:
    """Hyperparameter candidates per kernel family, plus shared C values."""

    C: tuple = (0.1, 1.0, 10.0, 100.0)
    polynomial_degree: tuple = (2, 3, 4)
    polynomial_offset: tuple = (0.0, 1.0)
    gaussian_gamma: tuple = (SCALE_BY_DIM, 0.01, 0.1, 1.0)
    sigmoid_slope: tuple = (SCALE_BY_DIM, 0.01)
    sigmoid_offset: tuple = (0.0, -1.0)

    def __post_init__(self):
        for name in ("C", "polynomial_degree", "polynomial_offset",
                     "gaussian_gamma", "sigmoid_slope", "sigmoid_offset"):
            if not getattr(self, name):
                raise UsageError(f"grid list {name!r} must not be empty")
        if any(c <= 0 for c in self.C):
            raise UsageError(f"C candidates must be > 0, got {self.C}")


@dataclass(frozen=True)
class SolverOverrides:
    """Optional knobs forwarded to the SVM trainer."""

    kkt_tol: float = 1e-3
    eps: float = 1e-12
    max_passes: int = 5
    max_iter: object = None


@dataclass(frozen=True)
class LogRegOverrides:
    """Optional knobs forwarded to the logistic-regression trainer."""

    learning_rate: float = 0.1
    iterations: int = 2000
    l2_strength: float = 1e-4


@dataclass(frozen=True)
class ExperimentConfig:
    train_root: str
    test_roots: tuple          # ((name, path), ...) in declared order
    output_dir: str
    positive_dir: str = "fire"
    negative_dir: str = "nofire"
    resolutions: tuple = DEFAULT_RESOLUTIONS
    models: tuple = MODEL_NAMES
    grid: GridConfig = field(default_factory=GridConfig)
    folds: int = 4
    seed: int = 1
    stratified: bool = False
    augmentation: AugmentPlan = field(default_factory=AugmentPlan)
    gram_cache_budget_bytes: int = 2 << 30
    workers: int = 1
    svm: SolverOverrides = field(default_factory=SolverOverrides)
    logreg: LogRegOverrides = field(default_factory=LogRegOverrides)

    def __post_init__(self):
        if not self.resolutions:
            raise UsageError("resolutions must not be empty")
        if any(r < 1 for r in self.resolutions):
            raise UsageError(f"resolutions must be >= 1, "
                             f"got {self.resolutions}")
        if len(set(self.resolutions)) != len(self.resolutions):
            raise UsageError(f"resolutions contain duplicates: "
                             f"{self.resolutions}")
        if self.folds < 2:
            raise UsageError(f"folds must be >= 2, got {self.folds}")
        if not self.models:
            raise UsageError("models must not be empty")
        for m in self.models:
            if m not in MODEL_NAMES:
                raise UsageError(f"unknown model {m!r}; valid models: "
                                 f"{', '.join(MODEL_NAMES)}")
        if not self.test_roots:
            raise UsageError("at least one test set is required")
        names = [name for name, _ in self.test_roots]
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate test set names: {names}")
        for name in names:
            # names appear in CSV rows and dataset/chart filenames
            if not name or not all(c.isalnum() or c in "_-" for c in name):
                raise UsageError(f"test set name {name!r} must be non-empty "
                                 f"and use only letters, digits, '_' or '-'")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")
        if self.gram_cache_budget_bytes < 0:
            raise UsageError("gram_cache_budget_bytes must be >= 0")

    def dataset_dir(self) -> Path:
        return Path(self.output_dir) / "datasets"

    def train_file(self, resolution: int) -> Path:
        return self.dataset_dir() / f"train_{resolution}.ffds"

    def test_file(self, name: str, resolution: int) -> Path:
        return self.dataset_dir() / f"test_{name}_{resolution}.ffds"


def _take(d: dict, key: str, default):
    return d[key] if key in d else default


def _build(cls, data: dict, context: str, converters: dict):
    unknown = set(data) - set(converters)
    if unknown:
        raise UsageError(f"unknown {context} keys: {sorted(unknown)}; "
                         f"valid keys: {sorted(converters)}")
    kwargs = {}
    for key, convert in converters.items():
        if key in data:
            try:
                kwargs[key] = convert(data[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for {context} key "
                                 f"{key!r}: {exc}") from None
    return cls(**kwargs)


def _gamma_list(values) -> tuple:
    out = []
    for v in values:
        if v == SCALE_BY_DIM:
            out.append(SCALE_BY_DIM)
        else:
            out.append(float(v))
    return tuple(out)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a parsed JSON document into an ExperimentConfig."""
    if not isinstance(data, dict):
        raise UsageError(f"config root must be a JSON object, "
                         f"got {type(data).__name__}")
    for required in ("train_root", "test_roots", "output_dir"):
        if required not in data:
            raise UsageError(f"config is missing required key {required!r}")
    if not isinstance(data["test_roots"], dict):
        raise UsageError("test_roots must map set names to paths")

    def tuple_of(convert):
        return lambda xs: tuple(convert(x) for x in xs)

    grid = _build(GridConfig, data.get("grid", {}), "grid", {
        "C": tuple_of(float),
        "polynomial_degree": tuple_of(int),
        "polynomial_offset": tuple_of(float),
        "gaussian_gamma": _gamma_list,
        "sigmoid_slope": _gamma_list,
        "sigmoid_offset": tuple_of(float),
    })
    augmentation = _build(AugmentPlan, data.get("augmentation", {}),
                          "augmentation", {
        "enable_flip": bool,
        "enable_median_blur": bool,
        "blur_window": int,
    })
    svm_over = _build(SolverOverrides, data.get("svm", {}), "svm", {
        "kkt_tol": float,
        "eps": float,
        "max_passes": int,
        "max_iter": lambda v: None if v is None else int(v),
    })
    logreg_over = _build(LogRegOverrides, data.get("logreg", {}), "logreg", {
        "learning_rate": float,
        "iterations": int,
        "l2_strength": float,
    })

    known = {"train_root", "test_roots", "output_dir", "positive_dir",
             "negative_dir", "resolutions", "models", "grid", "folds",
             "seed", "stratified", "augmentation",
             "gram_cache_budget_bytes", "workers", "svm", "logreg"}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}; "
                         f"valid keys: {sorted(known)}")

    return ExperimentConfig(
        train_root=str(data["train_root"]),
        test_roots=tuple((str(k), str(v))
                         for k, v in data["test_roots"].items()),
        output_dir=str(data["output_dir"]),
        positive_dir=str(_take(data, "positive_dir", "fire")),
        negative_dir=str(_take(data, "negative_dir", "nofire")),
        resolutions=tuple(int(r) for r in
                          _take(data, "resolutions", DEFAULT_RESOLUTIONS)),
        models=tuple(str(m) for m in _take(data, "models", MODEL_NAMES)),
        grid=grid,
        folds=int(_take(data, "folds", 4)),
        seed=int(_take(data, "seed", 1)),
        stratified=bool(_take(data, "stratified", False)),
        augmentation=augmentation,
        gram_cache_budget_bytes=int(_take(data, "gram_cache_budget_bytes",
                                          2 << 30)),
        workers=int(_take(data, "workers", 1)),
        svm=svm_over,
        logreg=logreg_over,
    )


def config_from_file(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise UsageError(f"config file not found: {p}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def canonical_dict(cfg: ExperimentConfig) -> dict:
    """The effective configuration with every default filled in."""
    return {
        "train_root": cfg.train_root,
        "test_roots": {name: path for name, path in cfg.test_roots},
        "output_dir": cfg.output_dir,
        "positive_dir": cfg.positive_dir,
        "negative_dir": cfg.negative_dir,
        "resolutions": list(cfg.resolutions),
        "models": list(cfg.models),
        "grid": {
            "C": list(cfg.grid.C),
            "polynomial_degree": list(cfg.grid.polynomial_degree),
            "polynomial_offset": list(cfg.grid.polynomial_offset),
            "gaussian_gamma": list(cfg.grid.gaussian_gamma),
            "sigmoid_slope": list(cfg.grid.sigmoid_slope),
            "sigmoid_offset": list(cfg.grid.sigmoid_offset),
        },
        "folds": cfg.folds,
        "seed": cfg.seed,
        "stratified": cfg.stratified,
        "augmentation": {
            "enable_flip": cfg.augmentation.enable_flip,
            "enable_median_blur": cfg.augmentation.enable_median_blur,
            "blur_window": cfg.augmentation.blur_window,
        },
        "gram_cache_budget_bytes": cfg.gram_cache_budget_bytes,
        "workers": cfg.workers,
        "svm": {
            "kkt_tol": cfg.svm.kkt_tol,
            "eps": cfg.svm.eps,
            "max_passes": cfg.svm.max_passes,
            "max_iter": cfg.svm.max_iter,
        },
        "logreg": {
            "learning_rate": cfg.logreg.learning_rate,
            "iterations": cfg.logreg.iterations,
            "l2_strength": cfg.logreg.l2_strength,
        },
    }


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form."""
    blob = json.dumps(canonical_dict(cfg), sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
