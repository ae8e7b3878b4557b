"""Speaker-independent cross-validation, grid search, and metric reporting."""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from rhythmformants.features import FeatureTable
from rhythmformants.svm import SVMError, fit_scaler, svm_predict_batch, svm_train

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)
DEFAULT_GAMMA_GRID = (0.001, 0.01, 0.1, 1.0)

# Speaker-level k-fold gives ~(k-1)/k / 1/k train/test splits; speaker
# independence is the binding constraint, so no 80/20 utterance split exists.
SPLIT_NOTE = (
    "speaker-independent k-fold: partitions are by speaker, so per-fold "
    "train/test proportions follow the speaker split (about 67/33 for k=3)"
)


class EvaluationError(ValueError):
    """Raised for invalid evaluation setups (bad pair, missing groups, ...)."""


def speaker_kfold(speaker_per_row, k: int = 3, seed: int = 0):
    """Partition rows by speaker into k folds.

    Unique speakers are sorted, shuffled with a seeded RNG, and split into k
    near-equal groups; fold i tests on group i's rows. No speaker appears on
    both sides of a fold, and row order never affects the partition.
    """
    speakers = sorted(set(speaker_per_row))
    if len(speakers) < k:
        raise EvaluationError(f"need at least {k} speakers, got {len(speakers)}")
    rng = np.random.default_rng(seed)
    shuffled = [speakers[i] for i in rng.permutation(len(speakers))]
    groups = np.array_split(np.array(shuffled, dtype=object), k)
    speaker_arr = np.asarray(speaker_per_row, dtype=object)
    folds = []
    for grp in groups:
        test_mask = np.isin(speaker_arr, grp)
        folds.append((np.flatnonzero(~test_mask), np.flatnonzero(test_mask)))
    return folds


def grid_search(
    X,
    y,
    speakers,
    c_grid=DEFAULT_C_GRID,
    gamma_grid=DEFAULT_GAMMA_GRID,
    k: int = 3,
    seed: int = 0,
):
    """Pick (C, gamma) by inner speaker-independent k-fold accuracy.

    Ties prefer smaller C, then smaller gamma.
    """
    if not c_grid or not gamma_grid:
        raise EvaluationError("empty hyperparameter grid")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    folds = speaker_kfold(speakers, k=k, seed=seed)
    best = None
    for c_val in sorted(c_grid):
        for gamma in sorted(gamma_grid):
            accs = []
            for train_idx, test_idx in folds:
                if len(test_idx) == 0 or len(set(y[train_idx])) < 2:
                    raise EvaluationError("degenerate inner fold (empty or single-class)")
                scaler = fit_scaler(X[train_idx])
                train_s = (X[train_idx] - scaler[0]) / scaler[1]
                model = svm_train(train_s, y[train_idx], c_val, gamma, scaler=scaler)
                pred = svm_predict_batch(model, X[test_idx])
                accs.append(float(np.mean(pred == y[test_idx])))
            mean_acc = float(np.mean(accs))
            if best is None or mean_acc > best[0] + 1e-12:
                best = (mean_acc, c_val, gamma)
    return best[1], best[2]


def f1_score(y_true, y_pred, positive) -> float:
    """Harmonic mean of precision and recall; 0 when the denominator is empty."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    tp = np.sum((y_pred == positive) & (y_true == positive))
    fp = np.sum((y_pred == positive) & (y_true != positive))
    fn = np.sum((y_pred != positive) & (y_true == positive))
    denom = 2 * tp + fp + fn
    return float(2 * tp / denom) if denom > 0 else 0.0


@dataclass
class FoldResult:
    accuracy: float
    f1_per_class: dict
    chosen_c: float
    chosen_gamma: float
    n_train: int
    n_test: int


@dataclass
class CVReport:
    """Per-fold and aggregate accuracy / per-class F1 (mean and population std)."""

    pair: tuple
    feature_set: str
    k: int
    seed: int
    folds: list = field(default_factory=list)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean([f.accuracy for f in self.folds]))

    @property
    def std_accuracy(self) -> float:
        return float(np.std([f.accuracy for f in self.folds]))

    def mean_f1(self, group) -> float:
        return float(np.mean([f.f1_per_class[group] for f in self.folds]))

    def std_f1(self, group) -> float:
        return float(np.std([f.f1_per_class[group] for f in self.folds]))

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "feature_set": self.feature_set,
            "k": self.k,
            "seed": self.seed,
            "split_note": SPLIT_NOTE,
            "folds": [
                {
                    "accuracy": f.accuracy,
                    "f1_per_class": f.f1_per_class,
                    "C": f.chosen_c,
                    "gamma": f.chosen_gamma,
                    "n_train": f.n_train,
                    "n_test": f.n_test,
                }
                for f in self.folds
            ],
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "f1": {
                g: {"mean": self.mean_f1(g), "std": self.std_f1(g)} for g in self.pair
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        a, b = self.pair
        lines = [
            f"{self.k}-fold speaker-independent cross-validation: {a} vs. {b}",
            f"feature set: {self.feature_set} | seed: {self.seed}",
            f"note: {SPLIT_NOTE}",
            "",
            f"{'fold':>4}  {'accuracy':>9}  {'F1-' + a:>9}  {'F1-' + b:>9}  {'C':>6}  {'gamma':>7}",
        ]
        for i, f in enumerate(self.folds):
            lines.append(
                f"{i:>4}  {f.accuracy:>9.4f}  {f.f1_per_class[a]:>9.4f}  "
                f"{f.f1_per_class[b]:>9.4f}  {f.chosen_c:>6g}  {f.chosen_gamma:>7g}"
            )
        lines += [
            "",
            f"accuracy: {100 * self.mean_accuracy:.2f} +/- {100 * self.std_accuracy:.2f} %",
            f"F1-{a}:     {100 * self.mean_f1(a):.2f} +/- {100 * self.std_f1(a):.2f} %",
            f"F1-{b}:     {100 * self.mean_f1(b):.2f} +/- {100 * self.std_f1(b):.2f} %",
        ]
        return "\n".join(lines) + "\n"


def evaluate(
    table: FeatureTable,
    pair,
    feature_names=None,
    k: int = 3,
    seed: int = 0,
    c_grid=DEFAULT_C_GRID,
    gamma_grid=DEFAULT_GAMMA_GRID,
    feature_set_name: str = "",
) -> CVReport:
    """Full speaker-independent CV of an SVM on a binary group pair.

    Per fold: standardize on train, grid-search (C, gamma) with inner CV on
    the training speakers, train, and score the held-out speakers' rows.
    Rows with non-finite values in the selected features are dropped with a
    warning.
    """
    pair = tuple(pair)
    if len(pair) != 2 or pair[0] == pair[1]:
        raise EvaluationError(f"need two distinct groups, got {pair!r}")
    present = set(table.groups)
    absent = [g for g in pair if g not in present]
    if absent:
        raise EvaluationError(f"group(s) not in data: {', '.join(absent)}")

    if feature_names is not None:
        table = table.select(feature_names)
    rows = [i for i, g in enumerate(table.groups) if g in pair]
    X = table.values[rows]
    y = np.where(np.asarray(table.groups, dtype=object)[rows] == pair[0], 1.0, -1.0)
    speakers = [table.speaker_ids[i] for i in rows]
    uids = [table.utterance_ids[i] for i in rows]

    finite = np.all(np.isfinite(X), axis=1)
    if not finite.all():
        dropped = [uids[i] for i in np.flatnonzero(~finite)]
        logger.warning("dropping %d row(s) with missing features: %s",
                       len(dropped), ", ".join(dropped))
        X = X[finite]
        y = y[finite]
        speakers = [s for s, ok in zip(speakers, finite) if ok]

    report = CVReport(pair=pair, feature_set=feature_set_name or ",".join(table.names),
                      k=k, seed=seed)
    for fold_i, (train_idx, test_idx) in enumerate(speaker_kfold(speakers, k=k, seed=seed)):
        if len(test_idx) == 0:
            raise EvaluationError(f"fold {fold_i} has an empty test side")
        train_speakers = [speakers[i] for i in train_idx]
        inner_seed = seed * 1000003 + fold_i + 1
        c_val, gamma = grid_search(
            X[train_idx], y[train_idx], train_speakers,
            c_grid=c_grid, gamma_grid=gamma_grid, k=k, seed=inner_seed,
        )
        scaler = fit_scaler(X[train_idx])
        train_s = (X[train_idx] - scaler[0]) / scaler[1]
        try:
            model = svm_train(train_s, y[train_idx], c_val, gamma, scaler=scaler)
        except SVMError as exc:
            raise EvaluationError(f"fold {fold_i}: {exc}") from exc
        pred = svm_predict_batch(model, X[test_idx])
        truth = y[test_idx]
        f1 = {
            pair[0]: f1_score(truth, pred, positive=1),
            pair[1]: f1_score(truth, pred, positive=-1),
        }
        report.folds.append(
            FoldResult(
                accuracy=float(np.mean(pred == truth)),
                f1_per_class=f1,
                chosen_c=c_val,
                chosen_gamma=gamma,
                n_train=len(train_idx),
                n_test=len(test_idx),
            )
        )
    return report
