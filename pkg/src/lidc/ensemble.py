"""Hard-majority voting over per-feature-family classifiers.

Each ensemble member owns one feature pipeline (a fitted TfIdfModel) and
one one-vs-rest linear model trained on the same corpus. Members carry
uniform weight by construction: there is no weight field to misconfigure.
Vote ties are broken by the smallest label id, i.e. ascending catalog
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .corpus import Dataset, Document, LabelCatalog
from .features import FeatureSpec, Preprocessing, TfIdfModel
from .svm import LinearModel, TrainConfig, train_multiclass


@dataclass(frozen=True, eq=False)
class Member:
    """One feature pipeline plus the classifier trained on it."""

    tfidf: TfIdfModel
    model: LinearModel

    def __post_init__(self):
        if self.model.n_features != self.tfidf.n_features:
            raise ValueError(
                f"classifier expects {self.model.n_features} features but the "
                f"pipeline produces {self.tfidf.n_features}"
            )

    @property
    def spec(self) -> FeatureSpec:
        return self.tfidf.spec

    def predict(self, text: str) -> int:
        return self.model.predict(self.tfidf.transform(text))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Ordered members sharing one label catalog, combined by hard vote."""

    members: tuple[Member, ...]
    catalog: LabelCatalog

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        for m in self.members:
            if m.model.catalog != self.catalog:
                raise ValueError("all members must share the ensemble's catalog")

    @property
    def specs(self) -> tuple[FeatureSpec, ...]:
        return tuple(m.spec for m in self.members)

    @property
    def prep(self) -> Preprocessing:
        return self.members[0].tfidf.prep

    def predict(self, doc: Union[str, Document]) -> int:
        return predict_document(self, doc)

    def predict_all(self, docs: Sequence[Union[str, Document]]) -> list[int]:
        return [predict_document(self, d) for d in docs]


def vote(predictions: Sequence[int], n_labels: int) -> int:
    """Majority vote; among tied maxima the smallest label id wins."""
    if len(predictions) == 0:
        raise ValueError("cannot vote over zero predictions")
    counts = [0] * n_labels
    for p in predictions:
        if not 0 <= p < n_labels:
            raise ValueError(f"prediction {p} out of range for {n_labels} labels")
        counts[p] += 1
    best = 0
    for label in range(1, n_labels):
        if counts[label] > counts[best]:
            best = label
    return best


def predict_document(ens: Ensemble, doc: Union[str, Document]) -> int:
    """Run every member on the raw text and combine by majority vote."""
    text = doc.text if isinstance(doc, Document) else doc
    return vote([m.predict(text) for m in ens.members], len(ens.catalog))


def train_ensemble(
    train: Dataset,
    specs: Sequence[FeatureSpec],
    cfg: TrainConfig = TrainConfig(),
    prep: Preprocessing = Preprocessing(),
    min_df: int = 1,
    threads: int = 1,
) -> Ensemble:
    """Fit one TF-IDF pipeline and one classifier per spec on the same data.

    Member order follows the given spec order (it never affects
    predictions: the vote is permutation-invariant). Duplicate specs are
    rejected since identical members only amplify one vote.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one feature spec")
    if len(set(specs)) != len(specs):
        dupes = sorted({str(s) for s in specs if specs.count(s) > 1})
        raise ValueError(f"duplicate feature specs: {', '.join(dupes)}")
    if len(train) == 0:
        raise ValueError("cannot train on an empty dataset")
    y = train.label_ids()

    members = []
    for spec in specs:
        tfidf = TfIdfModel.fit(train, spec, prep=prep, min_df=min_df)
        X = [tfidf.transform(d.text) for d in train.documents]
        model = train_multiclass(
            X, y, train.catalog, cfg, n_features=tfidf.n_features, threads=threads
        )
        members.append(Member(tfidf=tfidf, model=model))
    return Ensemble(members=tuple(members), catalog=train.catalog)
