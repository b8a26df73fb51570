"""Classification objectives: program outputs to minimization vectors.

A program classifies a case as positive when its output is at or above a
fixed threshold. Accuracy on each class is scored separately and both
objectives are expressed in minimization form, (1 - TPR, 1 - TNR), so a
perfect classifier sits at the origin.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .gp_core import Individual, Node, evaluate_semantics

CLASSIFICATION_THRESHOLD = 0.0


@dataclass(frozen=True)
class ConfusionCounts:
    """Confusion-matrix cell counts for one predictor."""

    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.tn, self.fp) < 0:
            raise ValueError("confusion counts must be non-negative")
        if self.tp + self.fn == 0 or self.tn + self.fp == 0:
            raise ValueError("both classes must be present")


def classify(semantics: np.ndarray, threshold: float = CLASSIFICATION_THRESHOLD) -> np.ndarray:
    """Predicted labels: positive wherever the program output >= threshold."""
    return np.asarray(semantics, dtype=np.float64) >= threshold


def confusion(predictions: np.ndarray, labels: np.ndarray) -> ConfusionCounts:
    """Count confusion-matrix cells for boolean predictions against labels."""
    preds = np.asarray(predictions, dtype=bool)
    labs = np.asarray(labels, dtype=bool)
    if preds.shape != labs.shape:
        raise ValueError("predictions and labels must have the same length")
    return ConfusionCounts(
        tp=int(np.sum(preds & labs)),
        fn=int(np.sum(~preds & labs)),
        tn=int(np.sum(~preds & ~labs)),
        fp=int(np.sum(preds & ~labs)),
    )


def objective_vector(counts: ConfusionCounts) -> np.ndarray:
    """Minimization objectives (1 - TPR, 1 - TNR), each in [0, 1]."""
    tpr = counts.tp / (counts.tp + counts.fn)
    tnr = counts.tn / (counts.tn + counts.fp)
    return np.array([1.0 - tpr, 1.0 - tnr])


class ClassificationEvaluator:
    """Maps trees to cached semantics and objectives on one dataset.

    Evaluation is pure, so results are identical whether trees are scored
    sequentially or by the thread pool (n_workers > 1).
    """

    def __init__(self, dataset: Dataset, threshold: float = CLASSIFICATION_THRESHOLD, n_workers: int = 1):
        if n_workers < 1:
            raise ValueError("n_workers must be at least 1")
        self.dataset = dataset
        self.threshold = threshold
        self.n_workers = n_workers

    def evaluate_tree(self, tree: Node) -> Individual:
        semantics = evaluate_semantics(tree, self.dataset.features)
        counts = confusion(classify(semantics, self.threshold), self.dataset.labels)
        return Individual(tree, semantics, objective_vector(counts))

    def evaluate_all(self, trees) -> list[Individual]:
        trees = list(trees)
        if self.n_workers == 1 or len(trees) < 2:
            return [self.evaluate_tree(tree) for tree in trees]
        with ThreadPoolExecutor(max_workers=self.n_workers) as pool:
            return list(pool.map(self.evaluate_tree, trees))
