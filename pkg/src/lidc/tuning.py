"""Model selection against a fixed development set.

Three searches: the regularization grid over C (ties to the smallest C),
caller-supplied feature-combination candidates (ties to fewer members,
then the lexicographically smaller spec list), and a per-family ablation
that trains one single-feature classifier per spec. All of them train on
the training split and rank by macro-F1 on the development split.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .corpus import Dataset
from .ensemble import train_ensemble
from .features import FeatureSpec, Preprocessing
from .metrics import confusion, score
from .svm import TrainConfig

DEFAULT_C_GRID = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)


@dataclass(frozen=True)
class GridRow:
    specs: tuple[FeatureSpec, ...]
    c: float
    macro_f1: float
    weighted_f1: float
    wall_time: float

    @property
    def spec_strings(self) -> tuple[str, ...]:
        return tuple(str(s) for s in self.specs)


@dataclass(eq=False)
class GridResult:
    """Per-configuration scores in evaluation order plus the winner's index."""

    rows: list[GridRow]
    best_index: int

    @property
    def best(self) -> GridRow:
        return self.rows[self.best_index]

    def to_tsv(self) -> str:
        lines = ["specs\tc\tmacro_f1\tweighted_f1\twall_time_s"]
        for row in self.rows:
            lines.append(
                "{}\t{!r}\t{!r}\t{!r}\t{:.3f}".format(
                    ",".join(row.spec_strings),
                    row.c,
                    row.macro_f1,
                    row.weighted_f1,
                    row.wall_time,
                )
            )
        return "\n".join(lines) + "\n"

    def to_jsonable(self) -> dict:
        return {
            "rows": [
                {
                    "specs": list(row.spec_strings),
                    "c": row.c,
                    "macro_f1": row.macro_f1,
                    "weighted_f1": row.weighted_f1,
                    "wall_time_s": row.wall_time,
                }
                for row in self.rows
            ],
            "best_index": self.best_index,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True, indent=2) + "\n"


def _evaluate_config(
    train: Dataset,
    dev: Dataset,
    specs: Sequence[FeatureSpec],
    cfg: TrainConfig,
    prep: Preprocessing,
    min_df: int,
    threads: int,
) -> GridRow:
    t0 = time.perf_counter()
    ens = train_ensemble(train, specs, cfg, prep=prep, min_df=min_df, threads=threads)
    preds = ens.predict_all(dev.documents)
    gold = [ens.catalog.id_of(d.label) for d in dev.documents]
    report = score(confusion(gold, preds, ens.catalog))
    return GridRow(
        specs=tuple(specs),
        c=cfg.c,
        macro_f1=report.macro_f1,
        weighted_f1=report.weighted_f1,
        wall_time=time.perf_counter() - t0,
    )


def grid_search_c(
    train: Dataset,
    dev: Dataset,
    specs: Sequence[FeatureSpec],
    c_grid: Sequence[float] = DEFAULT_C_GRID,
    cfg: TrainConfig = TrainConfig(),
    prep: Preprocessing = Preprocessing(),
    min_df: int = 1,
    threads: int = 1,
) -> GridResult:
    """Train one ensemble per C and rank by dev macro-F1.

    One C is shared by every member. Ties go to the smallest C so the
    least aggressive fit wins when the data cannot tell the difference.
    """
    c_grid = list(c_grid)
    if not c_grid:
        raise ValueError("the C grid must not be empty")
    rows = [
        _evaluate_config(train, dev, specs, replace(cfg, c=c), prep, min_df, threads)
        for c in c_grid
    ]
    best = max(range(len(rows)), key=lambda i: (rows[i].macro_f1, -rows[i].c))
    return GridResult(rows=rows, best_index=best)


def search_combinations(
    train: Dataset,
    dev: Dataset,
    candidates: Sequence[Sequence[FeatureSpec]],
    cfg: TrainConfig = TrainConfig(),
    prep: Preprocessing = Preprocessing(),
    min_df: int = 1,
    threads: int = 1,
) -> GridResult:
    """Evaluate candidate spec lists; best by dev macro-F1.

    Ties prefer fewer members, then the lexicographically smaller
    spec-string list, so the winner is stable under candidate reordering.
    """
    candidates = [list(c) for c in candidates]
    if not candidates:
        raise ValueError("need at least one candidate combination")
    for cand in candidates:
        if len(set(cand)) != len(cand):
            raise ValueError(
                f"candidate has duplicate specs: {','.join(str(s) for s in cand)}"
            )
    rows = [
        _evaluate_config(train, dev, cand, cfg, prep, min_df, threads)
        for cand in candidates
    ]
    best = min(
        range(len(rows)),
        key=lambda i: (-rows[i].macro_f1, len(rows[i].specs), rows[i].spec_strings),
    )
    return GridResult(rows=rows, best_index=best)


def ablate_features(
    train: Dataset,
    dev: Dataset,
    all_specs: Sequence[FeatureSpec],
    cfg: TrainConfig = TrainConfig(),
    prep: Preprocessing = Preprocessing(),
    min_df: int = 1,
    threads: int = 1,
) -> GridResult:
    """Score a single-feature classifier per spec, keeping the given order."""
    rows = [
        _evaluate_config(train, dev, [spec], cfg, prep, min_df, threads)
        for spec in all_specs
    ]
    if not rows:
        return GridResult(rows=[], best_index=-1)
    best = max(range(len(rows)), key=lambda i: (rows[i].macro_f1, -i))
    return GridResult(rows=rows, best_index=best)


def full_feature_grid() -> list[FeatureSpec]:
    """All 14 feature families: char 1..8, word 1..3, skip 1..3."""
    return (
        [FeatureSpec.char(n) for n in range(1, 9)]
        + [FeatureSpec.word(n) for n in range(1, 4)]
        + [FeatureSpec.skip(k) for k in range(1, 4)]
    )


def powerset_candidates(
    pool: Sequence[FeatureSpec], max_size: int
) -> list[list[FeatureSpec]]:
    """Every non-empty subset of the pool up to max_size, smaller sizes first."""
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if not pool:
        raise ValueError("spec pool must not be empty")
    out = []
    for size in range(1, min(max_size, len(pool)) + 1):
        out.extend(list(c) for c in itertools.combinations(pool, size))
    return out
