"""Binary classification metrics: rank-based AUC, threshold metrics, log-loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_CLIP = 1e-12


@dataclass
class MetricsReport:
    auc: float
    f1: float
    accuracy: float
    precision: float
    recall: float
    log_loss: float
    confusion: dict[str, int] = field(default_factory=dict)
    undefined: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        d = {
            "auc": self.auc,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "log_loss": self.log_loss,
        }
        d.update({f"confusion_{k}": v for k, v in self.confusion.items()})
        return d


def _check_binary(labels: np.ndarray) -> None:
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be binary 0/1")


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: ties between a positive and a negative score
    contribute 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    _check_binary(labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires both classes present")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores))
    # average ranks over tie groups (1-based)
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = ranks[labels == 1].sum()
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def binary_log_loss(probs, labels) -> float:
    probs = np.clip(np.asarray(probs, dtype=float), LOG_CLIP, 1.0 - LOG_CLIP)
    labels = np.asarray(labels, dtype=float)
    return float(-np.mean(labels * np.log(probs) + (1.0 - labels) * np.log(1.0 - probs)))


def classification_metrics(probs, labels, tau: float = 0.5) -> MetricsReport:
    """Full metric set from predicted probabilities.

    Hard labels use the inclusive threshold rule (predict 1 when
    prob >= tau). Zero-denominator precision/recall fall back to 0 and
    are listed in ``undefined``; AUC is NaN when only one class occurs.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    if len(probs) != len(labels):
        raise ValueError("probs and labels must have equal length")
    _check_binary(labels)
    preds = (probs >= tau).astype(int)
    tp = int(np.sum((preds == 1) & (labels == 1)))
    tn = int(np.sum((preds == 0) & (labels == 0)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    undefined = []
    accuracy = (tp + tn) / len(labels)
    if tp + fp == 0:
        precision = 0.0
        undefined.append("precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        undefined.append("recall")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0:
        f1 = 0.0
        undefined.append("f1")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    try:
        auc = roc_auc(probs, labels)
    except ValueError:
        auc = float("nan")
        undefined.append("auc")
    return MetricsReport(
        auc=auc,
        f1=f1,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        log_loss=binary_log_loss(probs, labels),
        confusion={"tp": tp, "tn": tn, "fp": fp, "fn": fn},
        undefined=tuple(undefined),
    )
