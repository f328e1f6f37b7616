"""Classification metrics: confusion counts, per-class F1, macro average.

Zero-support conventions: a class with precision + recall = 0 takes
F1 = 0, and the macro average always divides by the number of classes,
not the number of observed classes.
"""

from __future__ import annotations

import numpy as np


def confusion_matrix(y_true, y_pred, num_classes: int = 3) -> np.ndarray:
    """counts[i, j] = rows with true class i predicted as class j."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays must have matching shape")
    if y_true.size == 0:
        raise ValueError("cannot score an empty set of labels")
    for name, arr in (("true", y_true), ("pred", y_pred)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise ValueError(f"{name} labels outside [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=int)
    np.add.at(counts, (y_true, y_pred), 1)
    return counts


def per_class_f1(y_true, y_pred, num_classes: int = 3) -> np.ndarray:
    counts = confusion_matrix(y_true, y_pred, num_classes)
    tp = np.diag(counts).astype(np.float64)
    predicted = counts.sum(axis=0).astype(np.float64)
    actual = counts.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, predicted, out=np.zeros(num_classes), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros(num_classes), where=actual > 0)
    denom = precision + recall
    return np.divide(2.0 * precision * recall, denom,
                     out=np.zeros(num_classes), where=denom > 0)


def macro_f1(y_true, y_pred, num_classes: int = 3) -> float:
    return float(per_class_f1(y_true, y_pred, num_classes).mean())


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("cannot score an empty set of labels")
    return float((y_true == y_pred).mean())
