"""Deterministic k-fold cross-validation and grid search.

Folds come from a seeded Fisher-Yates shuffle (xoshiro256**) assigned
round-robin, so a (n, k, seed) triple always produces the same split on
every platform. All cells of one grid search share a single fold plan,
making cell comparisons paired.

A trainer here is any callable taking a LabeledDataset and returning a
predict function (feature matrix -> labels in {+1, -1}).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dataset import LabeledDataset
from .errors import PyroclassError, UsageError
from .metrics import accuracy, confusion
from .rng import Xoshiro256StarStar

Predictor = Callable[[np.ndarray], np.ndarray]
Trainer = Callable[[LabeledDataset], Predictor]


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index in [0, k) for every row."""

    k: int
    assignment: np.ndarray

    def __post_init__(self):
        if self.k < 2:
            raise UsageError(f"fold count must be >= 2, got {self.k}")
        a = self.assignment
        if a.ndim != 1 or (len(a) and (a.min() < 0 or a.max() >= self.k)):
            raise UsageError("fold assignment entries must lie in [0, k)")

    def __eq__(self, other):
        return (isinstance(other, FoldPlan) and self.k == other.k
                and np.array_equal(self.assignment, other.assignment))


def kfold_split(n: int, k: int, seed: int, stratified: bool = False,
                labels=None) -> FoldPlan:
    """Shuffle indices 0..n-1 and deal them round-robin into k folds.

    Fold sizes differ by at most one. With stratified=True the shuffle
    happens within each class (ascending label order) and the concatenated
    stream is dealt with a continuous counter, so per-class fold sizes are
    balanced too; labels are required in that mode.
    """
    if k < 2:
        raise UsageError(f"fold count must be >= 2, got {k}")
    if n < k:
        raise UsageError(f"cannot split {n} samples into {k} folds")
    rng = Xoshiro256StarStar(seed)
    if stratified:
        if labels is None:
            raise UsageError("stratified splitting requires labels")
        y = np.asarray(labels)
        if len(y) != n:
            raise UsageError(f"labels length {len(y)} does not match n={n}")
        stream = []
        for value in np.unique(y):
            group = list(np.nonzero(y == value)[0])
            rng.shuffle(group)
            stream.extend(group)
    else:
        stream = list(range(n))
        rng.shuffle(stream)
    assignment = np.empty(n, dtype=np.int64)
    for position, idx in enumerate(stream):
        assignment[idx] = position % k
    return FoldPlan(k=k, assignment=assignment)


@dataclass(frozen=True, eq=False)
class CrossValResult:
    """Per-fold accuracies with failed folds excluded from the mean.

    fold_accuracies holds None at failed folds; failures lists (fold index,
    reason). mean is NaN when every fold failed.
    """

    fold_accuracies: tuple
    mean: float
    failures: tuple
    plan: FoldPlan


def cross_validate(ds: LabeledDataset, trainer: Trainer, k: int, seed: int,
                   stratified: bool = False,
                   plan: Optional[FoldPlan] = None) -> CrossValResult:
    """Accuracy of trainer over k train/validate splits.

    Each fold trains on the other k-1 folds and scores accuracy on its own
    rows. A fold whose training raises a data/training error is recorded as
    failed and excluded from the mean rather than aborting the run.
    """
    if plan is None:
        plan = kfold_split(ds.n_samples, k, seed, stratified, ds.labels)
    elif len(plan.assignment) != ds.n_samples:
        raise UsageError(f"fold plan covers {len(plan.assignment)} rows, "
                         f"dataset has {ds.n_samples}")
    accuracies: list = []
    failures = []
    for fold in range(plan.k):
        val_mask = plan.assignment == fold
        train_mask = ~val_mask
        sub = LabeledDataset(
            features=ds.features[train_mask],
            labels=ds.labels[train_mask],
            resolution=ds.resolution,
        )
        try:
            predictor = trainer(sub)
            preds = np.asarray(predictor(ds.features[val_mask]))
        except PyroclassError as exc:
            accuracies.append(None)
            failures.append((fold, str(exc)))
            continue
        cm = confusion(ds.labels[val_mask], preds)
        accuracies.append(accuracy(cm))
    scored = [a for a in accuracies if a is not None]
    mean = float(np.mean(scored)) if scored else float("nan")
    return CrossValResult(fold_accuracies=tuple(accuracies), mean=mean,
                          failures=tuple(failures), plan=plan)


@dataclass(frozen=True)
class GridCell:
    """One grid-search candidate.

    Cells are enumerated in the documented tie-break order (ascending C,
    then ascending kernel parameters in each kernel's declared field
    order), so the first cell attaining the best mean wins ties.
    """

    label: str
    sort_key: tuple
    make_trainer: Trainer


@dataclass(frozen=True, eq=False)
class GridSearchResult:
    cells: tuple          # GridCell per row
    results: tuple        # CrossValResult or None (cell failed outright)
    cell_errors: tuple    # (cell index, reason) for failed cells
    best_index: int
    plan: FoldPlan

    @property
    def best(self) -> GridCell:
        return self.cells[self.best_index]

    @property
    def best_mean(self) -> float:
        return self.results[self.best_index].mean


def grid_search(ds: LabeledDataset, cells: Sequence[GridCell], k: int,
                seed: int, stratified: bool = False) -> GridSearchResult:
    """Cross-validate every cell on one shared fold plan and pick the best.

    The best cell has the maximal mean accuracy; ties resolve to the
    earliest cell in the enumeration order. Raises only if every cell
    fails.
    """
    cells = tuple(sorted(cells, key=lambda c: c.sort_key))
    if not cells:
        raise UsageError("grid search requires at least one cell")
    plan = kfold_split(ds.n_samples, k, seed, stratified, ds.labels)
    results: list = []
    cell_errors = []
    for index, cell in enumerate(cells):
        try:
            res = cross_validate(ds, cell.make_trainer, k, seed, plan=plan)
        except PyroclassError as exc:
            results.append(None)
            cell_errors.append((index, str(exc)))
            continue
        if np.isnan(res.mean):
            results.append(None)
            reasons = "; ".join(msg for _, msg in res.failures)
            cell_errors.append((index, f"all folds failed: {reasons}"))
            continue
        results.append(res)
    best_index = -1
    best_mean = -np.inf
    for index, res in enumerate(results):
        if res is not None and res.mean > best_mean:
            best_index = index
            best_mean = res.mean
    if best_index < 0:
        raise PyroclassError(
            "every grid cell failed: "
            + "; ".join(f"{cells[i].label}: {msg}" for i, msg in cell_errors))
    return GridSearchResult(cells=cells, results=tuple(results),
                            cell_errors=tuple(cell_errors),
                            best_index=best_index, plan=plan)
