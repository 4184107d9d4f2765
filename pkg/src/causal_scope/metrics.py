"""Boundary-accuracy scoring for predicted masks against ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class BoundaryScore:
    precision: float
    recall: float
    f1: float
    true_positives: int
    false_positives: int
    false_negatives: int


def score_mask(predicted, truth) -> BoundaryScore:
    """Confusion counts of a predicted binary mask over dimensions.

    Empty-set conventions: precision = 1 when nothing is selected,
    recall = 1 when the truth is empty.
    """
    predicted = np.asarray(predicted).astype(bool)
    truth = np.asarray(truth).astype(bool)
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {truth.shape}")
    tp = int(np.sum(predicted & truth))
    fp = int(np.sum(predicted & ~truth))
    fn = int(np.sum(~predicted & truth))
    precision = tp / (tp + fp) if (tp + fp) > 0 else 1.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 1.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return BoundaryScore(precision, recall, f1, tp, fp, fn)


def aggregate(scores) -> dict:
    """Per-field mean and sample std (n-1 denominator) over scores."""
    scores = list(scores)
    if not scores:
        raise ValueError("aggregate needs a non-empty list")
    out = {}
    for name in ("precision", "recall", "f1"):
        vals = np.array([getattr(s, name) for s in scores], dtype=float)
        out[f"{name}_mean"] = float(vals.mean())
        out[f"{name}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return out
