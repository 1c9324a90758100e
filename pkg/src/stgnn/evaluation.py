"""Cross-validation protocol: subject-grouped stratified folds, inner
validation grid search, rank-statistic metrics, ROC emission and a
flattened-correlation logistic baseline.

Subjects are the unit of assignment everywhere, so no sample of a subject
can appear on both sides of any split.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, HarnessError, MetricError
from .models import ModelSpec, bce_loss, build_model
from .nn import Adam, Linear
from .prep import (GraphSample, SubjectRecord, balance_by_subject, load_manifest,
                   stack_samples, threshold_edges, window_adjacency,
                   window_correlation, window_split)


def derived_rng(*parts: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(parts)))


def derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


# fold planning -----------------------------------------------------------------


@dataclass
class FoldPlan:
    """Outer fold per subject plus an inner train/validation split per fold."""

    k: int
    folds: dict[str, int]
    inner: dict[int, dict[str, str]]

    def test_subjects(self, fold: int) -> set[str]:
        return {s for s, f in self.folds.items() if f == fold}

    def inner_subjects(self, fold: int, role: str) -> set[str]:
        return {s for s, r in self.inner[fold].items() if r == role}


def _subject_labels(samples: list[GraphSample]) -> list[tuple[str, int]]:
    seen: dict[str, int] = {}
    order: list[str] = []
    for s in samples:
        if s.subject_id in seen:
            if seen[s.subject_id] != s.label:
                raise ConfigError(f"subject {s.subject_id} has inconsistent labels")
        else:
            seen[s.subject_id] = s.label
            order.append(s.subject_id)
    return [(sid, seen[sid]) for sid in order]


def _greedy_assign(subjects: list[tuple[str, int]], k: int,
                   rng: np.random.Generator) -> dict[str, int]:
    """Shuffle, then place each subject in the fold with the fewest of its class."""
    shuffled = [subjects[i] for i in rng.permutation(len(subjects))]
    class_counts = {label: [0] * k for label in {lab for _, lab in subjects}}
    totals = [0] * k
    assignment: dict[str, int] = {}
    for sid, label in shuffled:
        counts = class_counts[label]
        best = min(range(k), key=lambda f: (counts[f], totals[f], f))
        assignment[sid] = best
        counts[best] += 1
        totals[best] += 1
    return assignment


def plan_folds(samples: list[GraphSample], k: int = 5, seed: int = 0) -> FoldPlan:
    """Stratified assignment of whole subjects to k outer folds, plus an
    inner split that reserves one fifth of each training fold's subjects
    (stratified the same way) for validation."""
    subjects = _subject_labels(samples)
    per_class: dict[int, int] = {}
    for _, label in subjects:
        per_class[label] = per_class.get(label, 0) + 1
    if any(count < k for count in per_class.values()):
        raise ConfigError(f"need at least k={k} subjects per class; have {per_class}")
    folds = _greedy_assign(subjects, k, derived_rng(seed, 0xF01D))
    inner: dict[int, dict[str, str]] = {}
    for fold in range(k):
        train_pool = [(sid, label) for sid, label in subjects if folds[sid] != fold]
        val_rng = derived_rng(seed, 0x1AEA, fold)
        roles: dict[str, str] = {sid: "train" for sid, _ in train_pool}
        for label in sorted({lab for _, lab in train_pool}):
            members = [sid for sid, lab in train_pool if lab == label]
            n_val = max(1, int(round(len(members) / 5)))
            chosen = val_rng.permutation(len(members))[:n_val]
            for idx in chosen:
                roles[members[idx]] = "val"
        inner[fold] = roles
    return FoldPlan(k=k, folds=folds, inner=inner)


def assert_no_leakage(plan: FoldPlan, fold: int) -> None:
    test = plan.test_subjects(fold)
    train = plan.inner_subjects(fold, "train")
    val = plan.inner_subjects(fold, "val")
    if test & train or test & val or train & val:
        raise HarnessError(f"subject leakage detected in fold {fold}")


# metrics -------------------------------------------------------------------------


@dataclass
class MetricReport:
    auc: float
    sensitivity: float
    specificity: float
    roc: list[tuple[float, float, float]]  # (threshold, fpr, tpr)


def _tied_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def compute_metrics(scores, labels, threshold: float = 0.5) -> MetricReport:
    """AUC by the rank statistic (ties count one half), sensitivity and
    specificity at the probability cut, and one ROC point per distinct score."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise MetricError("both classes must be present to compute metrics")
    ranks = _tied_ranks(scores)
    auc = (ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    predicted = scores >= threshold
    tp = int(np.sum(predicted & positive))
    tn = int(np.sum(~predicted & ~positive))
    sensitivity = tp / n_pos
    specificity = tn / n_neg
    order = np.argsort(-scores, kind="mergesort")
    roc: list[tuple[float, float, float]] = [(float(scores.max()) + 1.0, 0.0, 0.0)]
    tp_c = fp_c = 0
    i = 0
    while i < scores.size:
        j = i
        value = scores[order[i]]
        while j < scores.size and scores[order[j]] == value:
            if labels[order[j]] == 1:
                tp_c += 1
            else:
                fp_c += 1
            j += 1
        roc.append((float(value), fp_c / n_neg, tp_c / n_pos))
        i = j
    return MetricReport(auc=float(auc), sensitivity=sensitivity,
                        specificity=specificity, roc=roc)


# hyperparameter grid --------------------------------------------------------------


@dataclass(frozen=True)
class HyperPoint:
    dropout: float
    lr: float
    weight_decay: float

    def to_dict(self) -> dict:
        return {"dropout": self.dropout, "lr": self.lr, "weight_decay": self.weight_decay}


@dataclass(frozen=True)
class HyperGrid:
    """Search space; the default reproduces the full 27-point protocol."""

    dropouts: tuple = (0.0, 0.5, 0.7)
    learning_rates: tuple = (1e-4, 1e-5, 1e-6)
    weight_decays: tuple = (0.005, 0.5, 0.0)
    epochs: int = 30
    batch_size: int | None = None  # None: pick per model variant

    def points(self) -> list[HyperPoint]:
        return [HyperPoint(d, lr, wd) for d, lr, wd in
                itertools.product(self.dropouts, self.learning_rates, self.weight_decays)]

    @property
    def cardinality(self) -> int:
        return len(self.dropouts) * len(self.learning_rates) * len(self.weight_decays)

    @classmethod
    def fast(cls, dropout: float = 0.0, lr: float = 1e-3, weight_decay: float = 0.0,
             epochs: int = 30, batch_size: int | None = 32) -> "HyperGrid":
        """Single sensible point for desk-scale runs; small batches so tiny
        datasets still take enough optimizer steps per epoch."""
        return cls(dropouts=(dropout,), learning_rates=(lr,), weight_decays=(weight_decay,),
                   epochs=epochs, batch_size=batch_size)


def default_batch_size(spec: ModelSpec) -> int:
    if spec.encoder == "tcn":
        return 400
    if spec.windows_per_scan == 16:
        return 1000
    return 500


# training ---------------------------------------------------------------------------


@dataclass
class TrainSettings:
    lr: float
    weight_decay: float
    dropout: float
    epochs: int
    batch_size: int
    link_weight: float = 0.0
    entropy_weight: float = 0.0
    select_final_epoch: bool = False


@dataclass
class TrainOutcome:
    state: dict | None
    best_epoch: int
    best_val_loss: float
    train_curve: list[float]
    val_curve: list[float]
    failed: bool
    link_curve: list[float] = field(default_factory=list)
    entropy_curve: list[float] = field(default_factory=list)


def _batch_loss(model, features, adjacency, labels, settings: TrainSettings,
                train: bool) -> tuple[Tensor, dict[str, float]]:
    probs, aux = model(features, adjacency, train=train)
    loss = bce_loss(probs, labels)
    if settings.link_weight:
        loss = ad.add(loss, ad.mul(settings.link_weight, aux["link_loss"]))
    if settings.entropy_weight:
        loss = ad.add(loss, ad.mul(settings.entropy_weight, aux["entropy_loss"]))
    logged = {"link": aux["link_loss"].item(), "entropy": aux["entropy_loss"].item()}
    return loss, logged


def evaluate_loss(model, features, adjacency, labels, settings: TrainSettings,
                  chunk: int = 256) -> float:
    total = 0.0
    for start in range(0, len(labels), chunk):
        sl = slice(start, start + chunk)
        adj = adjacency[sl] if adjacency is not None else None
        loss, _ = _batch_loss(model, features[sl], adj, labels[sl], settings, train=False)
        total += loss.item() * (min(start + chunk, len(labels)) - start)
    return total / len(labels)


def predict_scores(model, features, adjacency, chunk: int = 256) -> np.ndarray:
    out = []
    for start in range(0, len(features), chunk):
        sl = slice(start, start + chunk)
        adj = adjacency[sl] if adjacency is not None else None
        probs, _ = model(features[sl], adj, train=False)
        out.append(probs.numpy().copy())
    return np.concatenate(out)


def train_classifier(spec: ModelSpec, n_nodes: int, input_length: int,
                     train_data, val_data, settings: TrainSettings,
                     seed: int) -> TrainOutcome:
    """Train one model, tracking validation loss per epoch and keeping the
    best-epoch state (or the final state when ``select_final_epoch``)."""
    tr_x, tr_a, tr_y = train_data
    va_x, va_a, va_y = val_data
    model = build_model(replace(spec, dropout=settings.dropout, seed=seed),
                        n_nodes, input_length)
    optimizer = Adam(model.parameters(), lr=settings.lr,
                     weight_decay=settings.weight_decay)
    shuffle_rng = derived_rng(seed, 0x5EED)
    best_val = np.inf
    best_epoch = -1
    best_state: dict | None = None
    train_curve: list[float] = []
    val_curve: list[float] = []
    link_curve: list[float] = []
    entropy_curve: list[float] = []
    for epoch in range(settings.epochs):
        order = shuffle_rng.permutation(len(tr_y))
        epoch_loss = 0.0
        epoch_aux = {"link": 0.0, "entropy": 0.0}
        for start in range(0, len(order), settings.batch_size):
            idx = order[start:start + settings.batch_size]
            adj = tr_a[idx] if tr_a is not None else None
            loss, aux = _batch_loss(model, tr_x[idx], adj, tr_y[idx], settings, train=True)
            value = loss.item()
            if not np.isfinite(value):
                return TrainOutcome(None, -1, np.inf, train_curve, val_curve, failed=True)
            model.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += value * len(idx)
            for key in epoch_aux:
                epoch_aux[key] += aux[key] * len(idx)
        train_curve.append(epoch_loss / len(tr_y))
        link_curve.append(epoch_aux["link"] / len(tr_y))
        entropy_curve.append(epoch_aux["entropy"] / len(tr_y))
        val_loss = evaluate_loss(model, va_x, va_a, va_y, settings)
        val_curve.append(val_loss)
        if not np.isfinite(val_loss):
            return TrainOutcome(None, -1, np.inf, train_curve, val_curve, failed=True)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            if not settings.select_final_epoch:
                best_state = model.state_dict()
    if settings.select_final_epoch:
        return TrainOutcome(model.state_dict(), settings.epochs - 1,
                            val_curve[-1], train_curve, val_curve, failed=False,
                            link_curve=link_curve, entropy_curve=entropy_curve)
    return TrainOutcome(best_state, best_epoch, best_val, train_curve, val_curve,
                        failed=False, link_curve=link_curve, entropy_curve=entropy_curve)


# grid search -------------------------------------------------------------------------


@dataclass
class GridRecord:
    index: int
    point: HyperPoint
    outcome: TrainOutcome


@dataclass
class GridSearchResult:
    selected_index: int
    selected_point: HyperPoint
    outcome: TrainOutcome
    records: list[GridRecord]


def _train_point(spec: ModelSpec, n_nodes: int, input_length: int, train_data,
                 val_data, grid: HyperGrid, point: HyperPoint, seed: int,
                 fold: int, index: int, link_weight: float, entropy_weight: float,
                 select_final_epoch: bool) -> TrainOutcome:
    settings = TrainSettings(lr=point.lr, weight_decay=point.weight_decay,
                             dropout=point.dropout, epochs=grid.epochs,
                             batch_size=grid.batch_size or default_batch_size(spec),
                             link_weight=link_weight, entropy_weight=entropy_weight,
                             select_final_epoch=select_final_epoch)
    job_seed = derived_seed(seed, fold, index)
    return train_classifier(spec, n_nodes, input_length, train_data, val_data,
                            settings, seed=job_seed)


def select_grid_winner(records: list[GridRecord]) -> GridRecord:
    winner: GridRecord | None = None
    for record in records:
        if record.outcome.failed:
            continue
        if winner is None or record.outcome.best_val_loss < winner.outcome.best_val_loss:
            winner = record
    if winner is None:
        raise HarnessError("every grid point failed with non-finite loss")
    return winner


def grid_search(spec: ModelSpec, n_nodes: int, input_length: int, train_data,
                val_data, grid: HyperGrid, seed: int, fold: int = 0,
                link_weight: float = 0.0, entropy_weight: float = 0.0,
                select_final_epoch: bool = False) -> GridSearchResult:
    """Train every grid point on the inner split and keep the one with the
    lowest (best-epoch) validation loss; ties go to the earlier point."""
    records = []
    for index, point in enumerate(grid.points()):
        outcome = _train_point(spec, n_nodes, input_length, train_data, val_data,
                               grid, point, seed, fold, index,
                               link_weight, entropy_weight, select_final_epoch)
        records.append(GridRecord(index=index, point=point, outcome=outcome))
    winner = select_grid_winner(records)
    return GridSearchResult(selected_index=winner.index, selected_point=winner.point,
                            outcome=winner.outcome, records=records)


# experiment orchestration ---------------------------------------------------------------


@dataclass
class FoldReport:
    fold: int
    hyperparameters: dict
    auc: float
    sensitivity: float
    specificity: float
    roc: list[tuple[float, float, float]]
    train_curve: list[float]
    val_curve: list[float]
    best_epoch: int
    best_val_loss: float
    link_curve: list[float] = field(default_factory=list)
    entropy_curve: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fold": self.fold,
            "hyperparameters": self.hyperparameters,
            "auc": self.auc,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "train_curve": self.train_curve,
            "val_curve": self.val_curve,
            "link_curve": self.link_curve,
            "entropy_curve": self.entropy_curve,
            "roc": [list(point) for point in self.roc],
        }


@dataclass
class ExperimentConfig:
    manifest: str
    model: str = "mean_CNN"
    threshold_percent: int = 5
    windows_per_scan: int = 1
    k_folds: int = 5
    seed: int = 0
    grid: HyperGrid = field(default_factory=HyperGrid)
    permute_labels: bool = False
    select_final_epoch: bool = False
    link_weight: float = 0.0
    entropy_weight: float = 0.0
    jobs: int = 1


BASELINE_MODELS = ("logreg", "logreg_bin")


def _permute_subject_labels(records: list[SubjectRecord], seed: int) -> None:
    labels = [r.label for r in records]
    rng = derived_rng(seed, 0x9E12)
    shuffled = rng.permutation(len(labels))
    new = [labels[i] for i in shuffled]
    for record, label in zip(records, new):
        record.label = label


def _fold_arrays(features, adjacency, labels, subjects, member_set):
    mask = np.array([s in member_set for s in subjects])
    adj = adjacency[mask] if adjacency is not None else None
    return features[mask], adj, labels[mask]


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute the full protocol and return the results document."""
    start_time = time.perf_counter()
    records = load_manifest(config.manifest)
    records = balance_by_subject(records, seed=derived_seed(config.seed, 0xBA1A))
    if config.permute_labels:
        _permute_subject_labels(records, config.seed)

    is_baseline = config.model in BASELINE_MODELS
    spec: ModelSpec | None = None
    if not is_baseline:
        spec = ModelSpec.from_name(config.model, threshold_percent=config.threshold_percent,
                                   seed=config.seed)
        if spec.windows_per_scan == 16:
            # a 64split suffix in the name wins over the flag
            config = replace(config, windows_per_scan=16)
        else:
            spec = replace(spec, windows_per_scan=config.windows_per_scan)

    samples: list[GraphSample] = []
    for record in records:
        for window in window_split(record, config.windows_per_scan):
            samples.append(GraphSample(window=window,
                                       adjacency=window_adjacency(window, config.threshold_percent)))
    plan = plan_folds(samples, k=config.k_folds, seed=config.seed)

    if is_baseline:
        fold_reports = baseline_flat_correlation(samples, plan, binarize=config.model == "logreg_bin",
                                                 seed=config.seed)
        model_name = f"{config.model}_{4 * config.windows_per_scan}split"
    else:
        fold_reports = _run_deep_folds(samples, plan, spec, config)
        model_name = spec.name()

    aggregate = {}
    for metric in ("auc", "sensitivity", "specificity"):
        values = np.array([getattr(r, metric) for r in fold_reports], dtype=np.float64)
        aggregate[metric] = {"mean": float(values.mean()),
                             "sd": float(values.std(ddof=1)) if len(values) > 1 else 0.0}

    wall_clock = time.perf_counter() - start_time
    return {
        "config": {
            "manifest": str(config.manifest),
            "model": model_name,
            "threshold_percent": config.threshold_percent,
            "windows_per_scan": config.windows_per_scan,
            "adjacency_scope": "per_window",
            "k_folds": config.k_folds,
            "grid": {
                "dropouts": list(config.grid.dropouts),
                "learning_rates": list(config.grid.learning_rates),
                "weight_decays": list(config.grid.weight_decays),
                "epochs": config.grid.epochs,
                "batch_size": config.grid.batch_size,
            },
            "permute_labels": config.permute_labels,
            "select_final_epoch": config.select_final_epoch,
            "link_weight": config.link_weight,
            "entropy_weight": config.entropy_weight,
        },
        "seed": config.seed,
        "folds": [r.to_dict() for r in fold_reports],
        "aggregate": aggregate,
        "wall_clock_seconds": wall_clock,
    }


def _run_deep_folds(samples: list[GraphSample], plan: FoldPlan, spec: ModelSpec,
                    config: ExperimentConfig) -> list[FoldReport]:
    features, adjacency, labels, subjects = stack_samples(samples)
    n_nodes = features.shape[1]
    input_length = features.shape[2]
    needs_graph = spec.use_gcn or spec.pooling == "diffpool"
    adj = adjacency if needs_graph else None

    jobs = []
    points = config.grid.points()
    for fold in range(plan.k):
        assert_no_leakage(plan, fold)
        train_data = _fold_arrays(features, adj, labels, subjects,
                                  plan.inner_subjects(fold, "train"))
        val_data = _fold_arrays(features, adj, labels, subjects,
                                plan.inner_subjects(fold, "val"))
        for index, point in enumerate(points):
            jobs.append({"fold": fold, "index": index, "point": point,
                         "train": train_data, "val": val_data})

    payloads = [(spec, n_nodes, input_length, config, job) for job in jobs]
    results: dict[tuple[int, int], TrainOutcome] = {}
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for fold, index, outcome in pool.map(_job_entry, payloads):
                results[(fold, index)] = outcome
    else:
        for payload in payloads:
            fold, index, outcome = _job_entry(payload)
            results[(fold, index)] = outcome

    reports = []
    for fold in range(plan.k):
        records = [GridRecord(index=i, point=points[i], outcome=results[(fold, i)])
                   for i in range(len(points))]
        winner = select_grid_winner(records)
        model = build_model(replace(spec, dropout=winner.point.dropout,
                                    seed=derived_seed(config.seed, fold, winner.index)),
                            n_nodes, input_length)
        model.load_state_dict(winner.outcome.state)
        test_data = _fold_arrays(features, adj, labels, subjects, plan.test_subjects(fold))
        scores = predict_scores(model, test_data[0], test_data[1])
        metrics = compute_metrics(scores, test_data[2])
        reports.append(FoldReport(
            fold=fold,
            hyperparameters=winner.point.to_dict(),
            auc=metrics.auc, sensitivity=metrics.sensitivity,
            specificity=metrics.specificity, roc=metrics.roc,
            train_curve=winner.outcome.train_curve, val_curve=winner.outcome.val_curve,
            best_epoch=winner.outcome.best_epoch,
            best_val_loss=winner.outcome.best_val_loss,
            link_curve=winner.outcome.link_curve,
            entropy_curve=winner.outcome.entropy_curve))
    return reports


def _job_entry(payload):
    spec, n_nodes, input_length, config, job = payload
    outcome = _train_point(spec, n_nodes, input_length, job["train"], job["val"],
                           config.grid, job["point"], config.seed, job["fold"],
                           job["index"], config.link_weight, config.entropy_weight,
                           config.select_final_epoch)
    return job["fold"], job["index"], outcome


# baseline ---------------------------------------------------------------------------------


BASELINE_LR = 0.05
BASELINE_WEIGHT_DECAY = 1e-4
BASELINE_EPOCHS = 300


def flat_correlation_features(samples: list[GraphSample], binarize: bool) -> np.ndarray:
    """Upper-triangle correlation values per sample; optionally the binary
    5-percent-strongest-edge indicator instead."""
    n = samples[0].features.shape[0]
    iu = np.triu_indices(n, k=1)
    rows = []
    for sample in samples:
        if binarize:
            adj = threshold_edges(window_correlation(sample.window), 5.0)
            rows.append(adj.dense[iu])
        else:
            rows.append(window_correlation(sample.window)[iu])
    return np.asarray(rows, dtype=np.float32)


def baseline_flat_correlation(samples: list[GraphSample], plan: FoldPlan,
                              binarize: bool, seed: int = 0) -> list[FoldReport]:
    """L2-regularized logistic regression on flattened correlations, trained
    and scored on exactly the same folds as the deep models."""
    table = flat_correlation_features(samples, binarize=binarize)
    labels = np.array([s.label for s in samples], dtype=np.float32)
    subjects = [s.subject_id for s in samples]
    reports = []
    hyper = {"estimator": "logistic", "lr": BASELINE_LR,
             "weight_decay": BASELINE_WEIGHT_DECAY, "epochs": BASELINE_EPOCHS,
             "binarize": binarize}
    for fold in range(plan.k):
        assert_no_leakage(plan, fold)
        train_subjects = plan.inner_subjects(fold, "train") | plan.inner_subjects(fold, "val")
        train_mask = np.array([s in train_subjects for s in subjects])
        test_mask = np.array([s in plan.test_subjects(fold) for s in subjects])
        rng = derived_rng(seed, 0xBA5E, fold)
        linear = Linear(table.shape[1], 1, rng)
        optimizer = Adam([linear.weight, linear.bias], lr=BASELINE_LR,
                         weight_decay=BASELINE_WEIGHT_DECAY)
        x_train = table[train_mask]
        y_train = labels[train_mask]
        train_curve = []
        for _ in range(BASELINE_EPOCHS):
            probs = ad.reshape(ad.sigmoid(linear(Tensor(x_train))), (len(y_train),))
            loss = bce_loss(probs, y_train)
            train_curve.append(loss.item())
            linear.zero_grad()
            loss.backward()
            optimizer.step()
        probs = ad.reshape(ad.sigmoid(linear(Tensor(table[test_mask]))),
                           (int(test_mask.sum()),))
        metrics = compute_metrics(probs.numpy(), labels[test_mask])
        reports.append(FoldReport(
            fold=fold, hyperparameters=dict(hyper),
            auc=metrics.auc, sensitivity=metrics.sensitivity,
            specificity=metrics.specificity, roc=metrics.roc,
            train_curve=train_curve, val_curve=[], best_epoch=BASELINE_EPOCHS - 1,
            best_val_loss=train_curve[-1]))
    return reports
