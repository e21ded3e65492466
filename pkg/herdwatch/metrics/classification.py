"""Confusion-matrix based classification scores: per-class, macro and weighted"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from sklearn.metrics import precision_recall_fscore_support

from herdwatch.common.errors import EmptyDataError, MalformedInputError


@dataclass
class ConfusionMatrix:
    """
    K x K count matrix, rows are the true class and columns the predicted class

    :param class_names: ordered class labels
    :param counts: non-negative integer counts
    """

    class_names: List[str]
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.class_names = list(self.class_names)
        counts = np.asarray(self.counts)
        k = len(self.class_names)
        if counts.shape != (k, k):
            raise MalformedInputError(
                f"Confusion matrix of shape {counts.shape} does not match {k} class names"
            )
        if len(set(self.class_names)) != k:
            raise MalformedInputError("Class names must be unique")
        if counts.size and (counts < 0).any():
            raise MalformedInputError("Confusion counts must be non-negative")
        if counts.size and not np.array_equal(counts, np.round(counts)):
            raise MalformedInputError("Confusion counts must be integers")
        self.counts = counts.astype(np.int64)

    @property
    def supports(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class ClassScores:
    """
    Scores of one class

    :param zero_division: True if precision or recall had a zero denominator and was set to 0
    """

    label: str
    precision: float
    recall: float
    f1: float
    support: int
    zero_division: bool = False


@dataclass
class ClassReport:
    per_class: List[ClassScores]
    macro: Tuple[float, float, float]
    weighted: Tuple[float, float, float]
    accuracy: float


def average_scores(scores: Sequence[float], supports: Sequence[float]) -> Tuple[float, float]:
    """
    Macro (unweighted) and support-weighted means of per-class scores.

    :param scores: one score per class
    :param supports: one support per class
    :return: (macro mean, weighted mean)
    """
    scores = np.asarray(scores, dtype=np.float64)
    supports = np.asarray(supports, dtype=np.float64)
    if scores.size == 0:
        raise EmptyDataError("No scores to average")
    if scores.shape != supports.shape:
        raise MalformedInputError(
            f"Got {scores.size} scores but {supports.size} supports"
        )
    macro = float(scores.mean())
    weighted = float(np.average(scores, weights=supports)) if supports.sum() > 0 else 0.0
    return macro, weighted


def report(cm: ConfusionMatrix) -> ClassReport:
    """
    Per-class precision, recall and F1 with macro and weighted averages.
    Zero denominators give a score of 0 and set the class's zero_division flag.
    Macro F1 is the mean of per-class F1, not the F1 of macro precision and recall.
    """
    k = len(cm.class_names)
    if k == 0 or cm.total == 0:
        raise EmptyDataError("Confusion matrix is empty")

    # Expand the matrix into weighted (true, predicted) samples
    true_idx, pred_idx = np.nonzero(cm.counts)
    weights = cm.counts[true_idx, pred_idx]
    precision, recall, f1, _ = precision_recall_fscore_support(
        true_idx,
        pred_idx,
        labels=np.arange(k),
        sample_weight=weights,
        average=None,
        zero_division=0,
    )

    supports = cm.supports
    predicted = cm.counts.sum(axis=0)
    per_class = [
        ClassScores(
            label=name,
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
            support=int(supports[i]),
            zero_division=bool(predicted[i] == 0 or supports[i] == 0),
        )
        for i, name in enumerate(cm.class_names)
    ]

    averages = [average_scores(values, supports) for values in (precision, recall, f1)]
    return ClassReport(
        per_class=per_class,
        macro=tuple(a[0] for a in averages),
        weighted=tuple(a[1] for a in averages),
        accuracy=float(np.trace(cm.counts) / cm.total),
    )


def top_confusions(cm: ConfusionMatrix, k: int) -> List[Tuple[str, str, int, float]]:
    """
    The k most frequent off-diagonal cells.

    :param cm: confusion matrix
    :param k: number of pairs to return, at least 1
    :return: (true_class, pred_class, count, count / true-class support), descending by count,
        ties in matrix label order
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    supports = cm.supports
    cells = [
        (int(cm.counts[i, j]), i, j)
        for i in range(len(cm.class_names))
        for j in range(len(cm.class_names))
        if i != j and cm.counts[i, j] > 0
    ]
    cells.sort(key=lambda c: (-c[0], c[1], c[2]))
    return [
        (cm.class_names[i], cm.class_names[j], count, count / int(supports[i]))
        for count, i, j in cells[:k]
    ]
