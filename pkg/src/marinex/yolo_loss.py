"""Numerical reference implementation of the YOLO-style composite detection loss.

Works on tiny explicit grids (S x S cells, B boxes per cell, C classes) so
every term can be inspected, hand-checked, and differentiated both in closed
form and by central finite differences. No network, no training loop.

Component structure:

    total = box + cls + obj

    box  = lambda_coord * sum_{i,j} resp[i,j] * (2 - w*h) *
           [(x-x^)^2 + (y-y^)^2 + (w-w^)^2 + (h-h^)^2]
    cls  = lambda_class * sum_{i,j} resp[i,j] * sum_c -p_i(c) * log(phat_i(c))
    obj  = lambda_noobj * sum_{i,j} (1-resp) * (c-c^)^2
         + lambda_obj   * sum_{i,j} resp     * (c-c^)^2

The (2 - w*h) scale uses the PREDICTED extent. Class probabilities are floored
at EPS before any logarithm. The classification term carries the conventional
cross-entropy minus sign so the loss is non-negative and minimised at the
correct answer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

EPS = 1e-12  # class-probability floor before logarithms


@dataclass(frozen=True)
class LossWeights:
    lambda_coord: float = 5.0
    lambda_class: float = 1.0
    lambda_obj: float = 1.0
    lambda_noobj: float = 0.5

    def validate(self) -> None:
        for name in ("lambda_coord", "lambda_class", "lambda_obj", "lambda_noobj"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"weights.{name}: must be finite and >= 0, got {v}")


class GridPrediction:
    """Predicted boxes and per-cell class probabilities over an S*S grid.

    boxes: float array (S*S, B, 5) holding x, y, w, h, conf per box.
    class_probs: float array (S*S, C).
    """

    def __init__(self, boxes: np.ndarray, class_probs: np.ndarray):
        self.boxes = np.asarray(boxes, dtype=float)
        self.class_probs = np.asarray(class_probs, dtype=float)
        if self.boxes.ndim != 3 or self.boxes.shape[2] != 5:
            raise ValueError(f"prediction boxes must have shape (S^2, B, 5), got {self.boxes.shape}")
        if self.class_probs.ndim != 2 or self.class_probs.shape[0] != self.boxes.shape[0]:
            raise ValueError("prediction class_probs must have shape (S^2, C)")

    @property
    def num_cells(self) -> int:
        return self.boxes.shape[0]

    @property
    def boxes_per_cell(self) -> int:
        return self.boxes.shape[1]

    @property
    def num_classes(self) -> int:
        return self.class_probs.shape[1]

    def validate(self) -> None:
        if not np.all(np.isfinite(self.boxes)) or not np.all(np.isfinite(self.class_probs)):
            raise ValueError("prediction: non-finite entries")
        if np.any(self.boxes[:, :, 2:4] < 0.0):
            raise ValueError("prediction: w and h must be >= 0")
        conf = self.boxes[:, :, 4]
        if np.any(conf < 0.0) or np.any(conf > 1.0):
            raise ValueError("prediction: confidences must lie in [0, 1]")
        if np.any(self.class_probs <= 0.0) or np.any(self.class_probs > 1.0):
            raise ValueError("prediction: class probabilities must lie in (0, 1]")

    def copy(self) -> "GridPrediction":
        return GridPrediction(self.boxes.copy(), self.class_probs.copy())


class GroundTruth:
    """Assignment mask and targets matching a GridPrediction's shape.

    responsibility: (S*S, B) in {0, 1}; boxes: (S*S, B, 4); confidence:
    (S*S, B); class_probs: (S*S, C), summing to 1 on cells that own an object.
    """

    def __init__(self, responsibility: np.ndarray, boxes: np.ndarray,
                 confidence: np.ndarray, class_probs: np.ndarray):
        self.responsibility = np.asarray(responsibility, dtype=float)
        self.boxes = np.asarray(boxes, dtype=float)
        self.confidence = np.asarray(confidence, dtype=float)
        self.class_probs = np.asarray(class_probs, dtype=float)
        if self.responsibility.ndim != 2:
            raise ValueError("ground truth responsibility must have shape (S^2, B)")
        if self.boxes.shape != self.responsibility.shape + (4,):
            raise ValueError(f"ground truth boxes must have shape (S^2, B, 4), got {self.boxes.shape}")
        if self.confidence.shape != self.responsibility.shape:
            raise ValueError("ground truth confidence must have shape (S^2, B)")

    def validate(self) -> None:
        if not np.all((self.responsibility == 0.0) | (self.responsibility == 1.0)):
            raise ValueError("ground truth: responsibility entries must be 0 or 1")
        assigned = self.responsibility.sum(axis=1) > 0
        sums = self.class_probs.sum(axis=1)
        if np.any(np.abs(sums[assigned] - 1.0) > 1e-9):
            raise ValueError("ground truth: class distribution must sum to 1 on assigned cells")


def _check_shapes(pred: GridPrediction, gt: GroundTruth) -> None:
    if gt.responsibility.shape != (pred.num_cells, pred.boxes_per_cell):
        raise ValueError(
            f"shape mismatch: prediction grid {(pred.num_cells, pred.boxes_per_cell)} "
            f"vs ground truth {gt.responsibility.shape}")
    if gt.class_probs.shape != pred.class_probs.shape:
        raise ValueError(
            f"shape mismatch: class probs {pred.class_probs.shape} vs {gt.class_probs.shape}")


def box_loss(pred: GridPrediction, gt: GroundTruth, w: LossWeights) -> float:
    _check_shapes(pred, gt)
    pw = pred.boxes[:, :, 2]
    ph = pred.boxes[:, :, 3]
    scale = 2.0 - pw * ph  # predicted extent, small boxes weigh more
    sq = np.sum((pred.boxes[:, :, :4] - gt.boxes) ** 2, axis=2)
    return float(w.lambda_coord * np.sum(gt.responsibility * scale * sq))


def cls_loss(pred: GridPrediction, gt: GroundTruth, w: LossWeights) -> float:
    _check_shapes(pred, gt)
    log_phat = np.log(np.maximum(pred.class_probs, EPS))
    ce = -np.sum(gt.class_probs * log_phat, axis=1)       # per cell
    per_cell_boxes = gt.responsibility.sum(axis=1)        # responsible boxes per cell
    return float(w.lambda_class * np.sum(per_cell_boxes * ce))


def obj_loss(pred: GridPrediction, gt: GroundTruth, w: LossWeights) -> float:
    _check_shapes(pred, gt)
    sq = (pred.boxes[:, :, 4] - gt.confidence) ** 2
    resp = gt.responsibility
    return float(w.lambda_noobj * np.sum((1.0 - resp) * sq)
                 + w.lambda_obj * np.sum(resp * sq))


def total_loss(pred: GridPrediction, gt: GroundTruth, w: LossWeights) -> float:
    return box_loss(pred, gt, w) + cls_loss(pred, gt, w) + obj_loss(pred, gt, w)


def total_loss_grad(pred: GridPrediction, gt: GroundTruth,
                    w: LossWeights) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form gradient of total_loss w.r.t. every prediction scalar.

    Returns (d_boxes, d_class_probs) with the same shapes as the prediction
    arrays. The log floor makes the cls term locally constant below EPS, so
    its gradient is zero there.
    """
    _check_shapes(pred, gt)
    resp = gt.responsibility
    d_boxes = np.zeros_like(pred.boxes)

    # box term
    pw = pred.boxes[:, :, 2]
    ph = pred.boxes[:, :, 3]
    scale = 2.0 - pw * ph
    diff = pred.boxes[:, :, :4] - gt.boxes
    sq = np.sum(diff ** 2, axis=2)
    coeff = w.lambda_coord * resp
    d_boxes[:, :, :4] += (coeff * scale)[:, :, None] * 2.0 * diff
    d_boxes[:, :, 2] += coeff * (-ph) * sq
    d_boxes[:, :, 3] += coeff * (-pw) * sq

    # obj term
    dconf = 2.0 * (pred.boxes[:, :, 4] - gt.confidence)
    d_boxes[:, :, 4] += (w.lambda_obj * resp + w.lambda_noobj * (1.0 - resp)) * dconf

    # cls term
    floored = np.maximum(pred.class_probs, EPS)
    per_cell_boxes = resp.sum(axis=1)
    d_probs = np.where(pred.class_probs > EPS,
                       -gt.class_probs / floored, 0.0)
    d_probs = w.lambda_class * per_cell_boxes[:, None] * d_probs
    return d_boxes, d_probs


LossFn = Callable[[GridPrediction, GroundTruth, LossWeights], float]


def finite_difference_grad(loss_fn: LossFn, pred: GridPrediction, gt: GroundTruth,
                           w: LossWeights, h: float = 1e-5) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient oracle, (f(x+h) - f(x-h)) / 2h per scalar."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step h must lie in [1e-7, 1e-3], got {h}")
    work = pred.copy()

    def diff(arr: np.ndarray, idx: tuple) -> float:
        orig = arr[idx]
        arr[idx] = orig + h
        f_plus = loss_fn(work, gt, w)
        arr[idx] = orig - h
        f_minus = loss_fn(work, gt, w)
        arr[idx] = orig
        return (f_plus - f_minus) / (2.0 * h)

    d_boxes = np.zeros_like(work.boxes)
    for idx in np.ndindex(work.boxes.shape):
        d_boxes[idx] = diff(work.boxes, idx)
    d_probs = np.zeros_like(work.class_probs)
    for idx in np.ndindex(work.class_probs.shape):
        d_probs[idx] = diff(work.class_probs, idx)
    return d_boxes, d_probs


# --- fixture files -----------------------------------------------------------
#
# A fixture file is a JSON document:
#   {"schema_version": 1, "cases": [{"name", "weights", "prediction",
#    "ground_truth", "expected": {"box_loss", "cls_loss", "obj_loss",
#    "total_loss"}}, ...]}
# Array fields mirror the constructor shapes as nested lists.

COMPONENTS: dict[str, LossFn] = {
    "box_loss": box_loss,
    "cls_loss": cls_loss,
    "obj_loss": obj_loss,
    "total_loss": total_loss,
}


def case_from_dict(d: dict) -> tuple[str, GridPrediction, GroundTruth, LossWeights, dict]:
    name = d.get("name", "<unnamed>")
    try:
        p = d["prediction"]
        g = d["ground_truth"]
        pred = GridPrediction(np.array(p["boxes"]), np.array(p["class_probs"]))
        gt = GroundTruth(np.array(g["responsibility"]), np.array(g["boxes"]),
                         np.array(g["confidence"]), np.array(g["class_probs"]))
        weights = LossWeights(**{k: float(v) for k, v in d.get("weights", {}).items()})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"fixture case {name!r}: {exc}") from exc
    pred.validate()
    gt.validate()
    weights.validate()
    return name, pred, gt, weights, d.get("expected", {})


def load_fixture_file(path: str | Path) -> list[dict]:
    doc = json.loads(Path(path).read_text())
    version = doc.get("schema_version", 1)
    if version != 1:
        raise ValueError(f"unsupported fixture schema_version {version}")
    cases = doc.get("cases")
    if not isinstance(cases, list):
        raise ValueError("fixture file must contain a 'cases' list")
    return cases


def evaluate_case(case: dict) -> dict[str, float]:
    """Compute every loss component for one fixture case."""
    _, pred, gt, weights, _ = case_from_dict(case)
    return {comp: fn(pred, gt, weights) for comp, fn in COMPONENTS.items()}
