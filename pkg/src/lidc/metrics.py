"""Evaluation: precision/recall/F1 reports, confusion matrices, baselines.

Zero denominators follow the usual evaluation-toolkit convention: a
precision, recall, or F1 whose denominator is zero is defined as 0, so a
never-predicted class drags the macro average down instead of being
silently dropped. Macro-F1 (unweighted mean) and weighted-F1
(support-weighted mean) are always reported side by side.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .corpus import Dataset, LabelCatalog
from .features import tokenize


def _as_catalog(catalog_or_size: Union[LabelCatalog, int]) -> LabelCatalog:
    if isinstance(catalog_or_size, LabelCatalog):
        return catalog_or_size
    L = int(catalog_or_size)
    if L < 1:
        raise ValueError("need at least one label")
    width = len(str(L - 1))
    # zero-pad so the generated names sort in id order
    return LabelCatalog(tuple(str(i).zfill(width) for i in range(L)))


@dataclass(eq=False)
class ConfusionMatrix:
    """Gold-by-predicted count table; rows are gold, columns predictions."""

    counts: np.ndarray
    catalog: LabelCatalog

    def __post_init__(self):
        L = len(self.catalog)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (L, L):
            raise ValueError(f"counts must be {L}x{L}, got {counts.shape}")
        if counts.size and counts.min() < 0:
            raise ValueError("counts must be non-negative")
        self.counts = counts

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        """Header row/column of label strings, integer cells."""
        labels = list(self.catalog)
        lines = ["," + ",".join(labels)]
        for i, row in enumerate(self.counts):
            lines.append(labels[i] + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_svg(self, cell: int = 48) -> str:
        """Self-contained heatmap rendering of the matrix."""
        labels = list(self.catalog)
        L = len(labels)
        margin_left = 14 + 8 * max((len(s) for s in labels), default=1)
        margin_top = 28
        width = margin_left + L * cell + 10
        height = margin_top + L * cell + 24
        vmax = max(1, int(self.counts.max()))
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]
        for j, lab in enumerate(labels):
            x = margin_left + j * cell + cell // 2
            parts.append(
                f'<text x="{x}" y="{margin_top - 8}" text-anchor="middle">{_esc(lab)}</text>'
            )
        for i, lab in enumerate(labels):
            y = margin_top + i * cell + cell // 2 + 4
            parts.append(
                f'<text x="{margin_left - 6}" y="{y}" text-anchor="end">{_esc(lab)}</text>'
            )
        for i in range(L):
            for j in range(L):
                v = int(self.counts[i, j])
                frac = v / vmax
                # white -> dark blue ramp
                r = round(255 - 205 * frac)
                g = round(255 - 170 * frac)
                b = round(255 - 80 * frac)
                x = margin_left + j * cell
                y = margin_top + i * cell
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                    f'fill="rgb({r},{g},{b})" stroke="#999"/>'
                )
                tcol = "#000" if frac < 0.55 else "#fff"
                parts.append(
                    f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" '
                    f'text-anchor="middle" fill="{tcol}">{v}</text>'
                )
        parts.append(
            f'<text x="{margin_left + L * cell // 2}" y="{height - 6}" '
            f'text-anchor="middle">predicted</text>'
        )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


@dataclass(frozen=True)
class LabelScores:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(eq=False)
class ScoreReport:
    per_label: list[LabelScores]
    macro_f1: float
    weighted_f1: float
    accuracy: float
    total: int

    def to_jsonable(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "total": self.total,
            "per_label": [
                {
                    "label": s.label,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                }
                for s in self.per_label
            ],
        }


def confusion(
    gold: Sequence[int],
    pred: Sequence[int],
    catalog: Union[LabelCatalog, int],
) -> ConfusionMatrix:
    """Count (gold, predicted) pairs into an LxL matrix."""
    cat = _as_catalog(catalog)
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} entries but pred has {len(pred)}")
    if len(gold) == 0:
        raise ValueError("cannot build a confusion matrix from zero instances")
    L = len(cat)
    counts = np.zeros((L, L), dtype=np.int64)
    for g, p in zip(gold, pred):
        if not (0 <= g < L and 0 <= p < L):
            raise ValueError(f"label pair ({g}, {p}) out of range for {L} labels")
        counts[g, p] += 1
    return ConfusionMatrix(counts=counts, catalog=cat)


def score(cm: ConfusionMatrix) -> ScoreReport:
    """Per-label P/R/F1 with macro and support-weighted means."""
    if cm.total == 0:
        raise ValueError("cannot score an empty confusion matrix")
    counts = cm.counts
    tp = np.diag(counts).astype(np.float64)
    pred_totals = counts.sum(axis=0).astype(np.float64)
    gold_totals = counts.sum(axis=1).astype(np.float64)

    per_label = []
    f1s = []
    for l, label in enumerate(cm.catalog):
        p = tp[l] / pred_totals[l] if pred_totals[l] > 0 else 0.0
        r = tp[l] / gold_totals[l] if gold_totals[l] > 0 else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        per_label.append(
            LabelScores(
                label=label,
                precision=float(p),
                recall=float(r),
                f1=float(f1),
                support=int(gold_totals[l]),
            )
        )
        f1s.append(f1)
    f1s = np.asarray(f1s)
    total = cm.total
    return ScoreReport(
        per_label=per_label,
        macro_f1=float(f1s.mean()),
        weighted_f1=float(np.dot(f1s, gold_totals) / total),
        accuracy=float(tp.sum() / total),
        total=total,
    )


def random_predictions(n: int, n_labels: int, seed: int = 0) -> np.ndarray:
    """Uniform label draws from a seeded generator (shared with the CLI)."""
    return np.random.default_rng(seed).integers(0, n_labels, size=n, dtype=np.int64)


def random_baseline(
    gold: Sequence[int],
    catalog: Union[LabelCatalog, int],
    seed: int = 0,
) -> ScoreReport:
    """Score uniformly random predictions against the gold labels."""
    cat = _as_catalog(catalog)
    preds = random_predictions(len(gold), len(cat), seed)
    return score(confusion(gold, preds, cat))


@dataclass(frozen=True)
class ErrorEntry:
    index: int
    text: str
    gold: str
    predicted: str
    token_count: int
    short: bool


@dataclass(eq=False)
class ErrorReport:
    """Misclassified instances with short-text flags and confusion hotspots."""

    entries: list[ErrorEntry]
    total_scored: int
    short_threshold: int
    top_pairs: list[tuple[str, str, int]]

    @property
    def n_errors(self) -> int:
        return len(self.entries)

    @property
    def n_short(self) -> int:
        return sum(1 for e in self.entries if e.short)

    @property
    def short_fraction(self) -> float:
        return self.n_short / self.n_errors if self.entries else 0.0

    def to_tsv(self) -> str:
        lines = ["index\tgold\tpredicted\ttokens\tshort\ttext"]
        for e in self.entries:
            flag = "yes" if e.short else "no"
            lines.append(
                f"{e.index}\t{e.gold}\t{e.predicted}\t{e.token_count}\t{flag}\t{e.text}"
            )
        return "\n".join(lines) + "\n"


def error_report(
    dataset: Dataset,
    pred: Sequence[int],
    short_threshold: int = 3,
) -> ErrorReport:
    """List every misclassified instance and summarize the failure modes.

    An instance counts as short when it has at most short_threshold
    whitespace tokens; very short texts are a known failure mode worth
    flagging separately. top_pairs lists (gold, predicted, count) sorted
    by count descending, then by label pair ascending.
    """
    gold = dataset.label_ids()
    if len(gold) != len(pred):
        raise ValueError(f"dataset has {len(gold)} instances but pred has {len(pred)}")
    catalog = dataset.catalog
    entries = []
    pair_counts: Counter = Counter()
    for i, (doc, g, p) in enumerate(zip(dataset.documents, gold, pred)):
        if not 0 <= p < len(catalog):
            raise ValueError(f"prediction {p} out of range for {len(catalog)} labels")
        if p == g:
            continue
        n_tokens = len(tokenize(doc.text))
        entries.append(
            ErrorEntry(
                index=i,
                text=doc.text,
                gold=catalog[g],
                predicted=catalog[p],
                token_count=n_tokens,
                short=n_tokens <= short_threshold,
            )
        )
        pair_counts[(catalog[g], catalog[p])] += 1
    top = sorted(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ErrorReport(
        entries=entries,
        total_scored=len(gold),
        short_threshold=short_threshold,
        top_pairs=[(g, p, c) for (g, p), c in top],
    )
