"""Cross-validated evaluation, classification metrics and NCC similarity."""

from __future__ import annotations

import hashlib
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .descriptors import DescriptorKind, _as_kind, extract_many
from .iknn import IknnConfig, KnnConfig, fit, fit_predict, predict_many
from .signals import Dataset

ZERO_DIVISION_NOTE = "precision/recall with a zero denominator are reported as 0"


# -- NCC ---------------------------------------------------------------------

def ncc(x, y) -> float:
    """Cosine of the angle between two vectors."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValueError(f"vectors differ in length ({x.size} vs {y.size})")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("NCC is undefined for a zero vector")
    return float(np.clip((x @ y) / (nx * ny), -1.0, 1.0))


def ncc_matrix(vectors) -> np.ndarray:
    """Pairwise NCC; symmetric with an exact unit diagonal."""
    V = [np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]
    if len(V) < 2:
        raise ValueError("ncc_matrix needs at least two vectors")
    n = len(V)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = ncc(V[i], V[j])
    return out


def mean_off_diagonal(mat) -> float:
    mat = np.asarray(mat)
    n = mat.shape[0]
    return float((mat.sum() - np.trace(mat)) / (n * (n - 1)))


# -- confusion matrix and metrics ---------------------------------------------

@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray          # rows = true class, cols = predicted class
    class_names: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(self.counts, other.counts)

    __hash__ = None


def confusion_matrix(y_true, y_pred, class_names) -> ConfusionMatrix:
    class_names = tuple(class_names)
    lookup = {c: i for i, c in enumerate(class_names)}
    counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
    for t, p in zip(y_true, y_pred, strict=True):
        counts[lookup[t], lookup[p]] += 1
    return ConfusionMatrix(counts, class_names)


@dataclass(frozen=True, eq=False)
class Metrics:
    accuracy: float
    macro_f1: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Metrics):
            return NotImplemented
        return (self.accuracy == other.accuracy and self.macro_f1 == other.macro_f1
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("precision", "recall", "f1", "support")))

    __hash__ = None


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def metrics(confusion) -> Metrics:
    """Accuracy plus one-vs-rest precision, recall and F1, macro averaged."""
    counts = confusion.counts if isinstance(confusion, ConfusionMatrix) else np.asarray(confusion)
    if counts.size == 0 or counts.sum() <= 0:
        raise ValueError("cannot compute metrics on an empty confusion matrix")
    tp = np.diag(counts).astype(np.float64)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    precision = _safe_ratio(tp, predicted)
    recall = _safe_ratio(tp, actual)
    f1 = _safe_ratio(2 * precision * recall, precision + recall)
    return Metrics(
        accuracy=float(tp.sum() / counts.sum()),
        macro_f1=float(f1.mean()),
        precision=precision, recall=recall, f1=f1,
        support=actual.astype(np.int64),
    )


# -- folds -------------------------------------------------------------------

def stratified_folds(labels, folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per sample; each class is shuffled and dealt round-robin.

    Dealing continues where the previous class stopped, so fold sizes also
    stay within one of each other.
    """
    y = np.asarray(labels)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    assign = np.empty(y.size, dtype=np.int64)
    offset = 0
    for c in sorted(set(y.tolist()), key=lambda v: np.flatnonzero(y == v)[0]):
        members = np.flatnonzero(y == c)
        members = members[rng.permutation(members.size)]
        assign[members] = (offset + np.arange(members.size)) % folds
        offset = (offset + members.size) % folds
    return assign


def fold_hash(assign) -> str:
    data = np.asarray(assign, dtype="<i8").tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def effective_folds(labels, folds: int) -> int:
    """Folds actually usable: reduced to the smallest class count, with a warning."""
    _, counts = np.unique(np.asarray(labels), return_counts=True)
    smallest = int(counts.min())
    if smallest < 2:
        raise ValueError("every class needs at least 2 signatures for cross-validation")
    if smallest < folds:
        warnings.warn(
            f"smallest class has {smallest} signatures; using {smallest} folds instead of {folds}",
            stacklevel=3,
        )
        return smallest
    return folds


# -- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class FoldTiming:
    train_seconds: float
    test_seconds: float


@dataclass(frozen=True, eq=False)
class EvalReport:
    descriptor: DescriptorKind
    classifier: object
    confusion: ConfusionMatrix
    metrics: Metrics
    folds: int
    seed: int
    fold_assignment: np.ndarray
    predictions: tuple[str, ...]
    extract_seconds: float = 0.0
    timings: tuple[FoldTiming, ...] = field(default=())

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    @property
    def macro_f1(self) -> float:
        return self.metrics.macro_f1

    @property
    def fold_hash(self) -> str:
        return fold_hash(self.fold_assignment)

    @property
    def train_seconds(self) -> float:
        return sum(t.train_seconds for t in self.timings)

    @property
    def test_seconds(self) -> float:
        return sum(t.test_seconds for t in self.timings)

    def same_outcome(self, other: "EvalReport") -> bool:
        """Equal in everything except wall-clock timings."""
        return (
            self.descriptor == other.descriptor
            and self.classifier == other.classifier
            and self.confusion == other.confusion
            and self.metrics == other.metrics
            and self.folds == other.folds
            and self.seed == other.seed
            and np.array_equal(self.fold_assignment, other.fold_assignment)
            and self.predictions == other.predictions
        )


def _run_fold(X, labels, assign, f, cfg, class_names):
    test = np.flatnonzero(assign == f)
    train = np.flatnonzero(assign != f)
    t0 = time.perf_counter()
    if isinstance(cfg, IknnConfig):
        model = fit(X[train], [labels[i] for i in train], cfg, class_names)
        t1 = time.perf_counter()
        preds = [p.label for p in predict_many(model, X[test])]
    else:
        # a plain KNN has no training phase; all of its cost is test time
        t1 = t0
        preds = fit_predict(cfg, X[train], [labels[i] for i in train], X[test], class_names)
    t2 = time.perf_counter()
    return test, preds, FoldTiming(t1 - t0, t2 - t1)


def kfold_eval_features(X, labels, class_names, cfg=None, folds: int = 10, seed: int = 0,
                        threads: int = 1, descriptor=None, assign=None) -> EvalReport:
    """Cross-validate a classifier on precomputed feature rows."""
    cfg = cfg if cfg is not None else IknnConfig()
    labels = list(labels)
    if assign is None:
        folds = effective_folds(labels, folds)
        assign = stratified_folds(labels, folds, seed)
    else:
        folds = int(assign.max()) + 1

    def run(f):
        return _run_fold(X, labels, assign, f, cfg, class_names)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(folds)))
    else:
        results = [run(f) for f in range(folds)]

    predictions = [None] * len(labels)
    for test, preds, _ in results:
        for i, p in zip(test, preds):
            predictions[i] = p
    cm = confusion_matrix(labels, predictions, class_names)
    return EvalReport(
        descriptor=_as_kind(descriptor) if descriptor is not None else DescriptorKind(),
        classifier=cfg, confusion=cm, metrics=metrics(cm), folds=folds, seed=seed,
        fold_assignment=assign, predictions=tuple(predictions),
        timings=tuple(r[2] for r in results),
    )


def kfold_eval(dataset: Dataset, descriptor="LPH", classifier_cfg=None, folds: int = 10,
               seed: int = 0, threads: int = 1) -> EvalReport:
    """Stratified k-fold evaluation of descriptor + classifier on a labeled dataset.

    Features are extracted once per signature (extraction is per-signal, so
    no information crosses folds) and timed separately from fit/predict.
    """
    kind = _as_kind(descriptor)
    labels = dataset.labels
    if any(lab is None for lab in labels):
        raise ValueError("cross-validation needs a fully labeled dataset")
    folds = effective_folds(labels, folds)
    assign = stratified_folds(labels, folds, seed)
    t0 = time.perf_counter()
    X = extract_many(kind, dataset.signals, threads=threads)
    extract_seconds = time.perf_counter() - t0
    report = kfold_eval_features(X, labels, dataset.class_names, classifier_cfg, folds, seed,
                                 threads, kind, assign)
    return replace(report, extract_seconds=extract_seconds)


def compare_descriptors(dataset: Dataset, kinds=None, classifier_cfg=None, folds: int = 10,
                        seed: int = 0, threads: int = 1) -> list[EvalReport]:
    """One report per descriptor, all sharing one fold assignment."""
    kinds = [_as_kind(k) for k in (kinds or ("LDP", "LTEP", "LTRP", "LBP", "BSIF", "LPH"))]
    return [kfold_eval(dataset, k, classifier_cfg, folds, seed, threads) for k in kinds]


# -- serialization -------------------------------------------------------------

def classifier_label(cfg) -> str:
    if isinstance(cfg, KnnConfig):
        return f"knn-{cfg.metric}(k={cfg.k})"
    m = "auto" if cfg.m is None else cfg.m
    return f"iknn(k={cfg.k},m={m},seed={cfg.seed})"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def report_csv(report: EvalReport) -> str:
    """Deterministic CSV rendering (timings are deliberately excluded)."""
    m = report.metrics
    names = report.confusion.class_names
    lines = [
        "key,value",
        f"descriptor,{report.descriptor.name}",
        f"classifier,{classifier_label(report.classifier)}",
        f"folds,{report.folds}",
        f"seed,{report.seed}",
        f"fold_hash,{report.fold_hash}",
        f"n,{report.confusion.total}",
        f"accuracy,{_fmt(m.accuracy)}",
        f"macro_f1,{_fmt(m.macro_f1)}",
        "",
        "class,precision,recall,f1,support",
    ]
    for i, c in enumerate(names):
        lines.append(f"{c},{_fmt(m.precision[i])},{_fmt(m.recall[i])},{_fmt(m.f1[i])},{m.support[i]}")
    lines += ["", "true\\predicted," + ",".join(names)]
    for i, c in enumerate(names):
        lines.append(c + "," + ",".join(str(v) for v in report.confusion.counts[i]))
    lines += ["", f"# {ZERO_DIVISION_NOTE}"]
    return "\n".join(lines) + "\n"


def comparison_csv(reports) -> str:
    lines = ["descriptor,histogram_length,accuracy,f1,fold_hash"]
    for r in reports:
        lines.append(f"{r.descriptor.name},{r.descriptor.length},{_fmt(r.accuracy)},"
                     f"{_fmt(r.macro_f1)},{r.fold_hash}")
    return "\n".join(lines) + "\n"


def timing_csv(reports) -> str:
    lines = ["descriptor,extract_seconds,train_seconds,test_seconds"]
    for r in reports:
        lines.append(f"{r.descriptor.name},{r.extract_seconds:.6f},{r.train_seconds:.6f},"
                     f"{r.test_seconds:.6f}")
    return "\n".join(lines) + "\n"


def text_table(reports) -> str:
    """Human-readable summary including wall-clock timings."""
    header = f"{'descriptor':<10} {'len':>4} {'accuracy':>9} {'macro_f1':>9} " \
             f"{'extract_s':>10} {'train_s':>9} {'test_s':>9}  fold_hash"
    rows = [header, "-" * len(header)]
    for r in reports:
        rows.append(
            f"{r.descriptor.name:<10} {r.descriptor.length:>4} {r.accuracy:>9.4f} "
            f"{r.macro_f1:>9.4f} {r.extract_seconds:>10.4f} {r.train_seconds:>9.4f} "
            f"{r.test_seconds:>9.4f}  {r.fold_hash}"
        )
    rows.append(f"({ZERO_DIVISION_NOTE})")
    return "\n".join(rows)
