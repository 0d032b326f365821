"""N-gram and skip-bigram TF-IDF feature pipelines producing sparse vectors.

Fourteen feature families are supported: character n-grams for n in 1..8
(computed over the raw text, whitespace included, no boundary padding),
word n-grams for n in 1..3, and word k-skip bigrams for k in 1..3. Term
weights are raw counts scaled by a smoothed inverse document frequency,
``ln((1 + N) / (1 + df)) + 1``, and every transformed vector is scaled to
unit Euclidean norm (the zero vector stays zero).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import corpus as _corpus
from .corpus import Dataset, Document

CHAR_ORDER_MAX = 8
WORD_ORDER_MAX = 3
SKIP_DISTANCE_MAX = 3

SKIP_MODES = ("upto", "exact")


def tokenize(text: str) -> list[str]:
    """Split on runs of Unicode whitespace; never yields empty tokens."""
    return text.split()


def char_ngrams(text: str, n: int) -> Counter:
    """Multiset of all contiguous length-n character sequences of the raw text.

    Whitespace characters participate like any other code point and there
    is no padding, so a text shorter than n yields nothing.
    """
    if not 1 <= n <= CHAR_ORDER_MAX:
        raise ValueError(f"char n-gram order must be in 1..{CHAR_ORDER_MAX}, got {n}")
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def word_ngrams(tokens: list[str], n: int) -> Counter:
    """Multiset of contiguous n-token windows, tokens joined by one space."""
    if not 1 <= n <= WORD_ORDER_MAX:
        raise ValueError(f"word n-gram order must be in 1..{WORD_ORDER_MAX}, got {n}")
    return Counter(
        " ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


def skip_bigrams(tokens: list[str], k: int, mode: str = "upto") -> Counter:
    """Multiset of ordered token pairs with a bounded gap, joined by one space.

    In "upto" mode (the default convention) a pair may skip 0..k
    intervening tokens, so ordinary bigrams are included and the result is
    a superset of word_ngrams(tokens, 2). In "exact" mode exactly k tokens
    are skipped.
    """
    if not 1 <= k <= SKIP_DISTANCE_MAX:
        raise ValueError(f"skip distance must be in 1..{SKIP_DISTANCE_MAX}, got {k}")
    if mode not in SKIP_MODES:
        raise ValueError(f"skip mode must be one of {SKIP_MODES}, got {mode!r}")
    out: Counter = Counter()
    T = len(tokens)
    for i in range(T):
        if mode == "upto":
            spans = range(1, k + 2)
        else:
            spans = (k + 1,)
        for span in spans:
            j = i + span
            if j < T:
                out[tokens[i] + " " + tokens[j]] += 1
    return out


@dataclass(frozen=True)
class Preprocessing:
    """Text preparation applied before feature extraction.

    All three switches default to the plainest behavior: no case folding
    (the primary target script has no case), punctuation kept, and the
    inclusive skip-gram convention.
    """

    lowercase: bool = False
    strip_punctuation: bool = False
    skip_mode: str = "upto"

    def __post_init__(self):
        if self.skip_mode not in SKIP_MODES:
            raise ValueError(
                f"skip mode must be one of {SKIP_MODES}, got {self.skip_mode!r}"
            )

    def apply(self, text: str) -> str:
        if self.strip_punctuation:
            text = _corpus.strip_punctuation(text)
        if self.lowercase:
            text = text.lower()
        return text


@dataclass(frozen=True)
class FeatureSpec:
    """One feature family: kind in {"char", "word", "skip"} plus its order.

    For char and word kinds the order is the n-gram length; for skip it is
    the maximum number of skipped tokens k.
    """

    kind: str
    order: int

    def __post_init__(self):
        limits = {"char": CHAR_ORDER_MAX, "word": WORD_ORDER_MAX, "skip": SKIP_DISTANCE_MAX}
        if self.kind not in limits:
            raise ValueError(
                f"feature kind must be one of {sorted(limits)}, got {self.kind!r}"
            )
        if not 1 <= self.order <= limits[self.kind]:
            raise ValueError(
                f"{self.kind} order must be in 1..{limits[self.kind]}, got {self.order}"
            )

    @classmethod
    def char(cls, n: int) -> "FeatureSpec":
        return cls("char", n)

    @classmethod
    def word(cls, n: int) -> "FeatureSpec":
        return cls("word", n)

    @classmethod
    def skip(cls, k: int) -> "FeatureSpec":
        return cls("skip", k)

    @classmethod
    def parse(cls, s: str) -> "FeatureSpec":
        """Parse the CLI/config syntax ``char:N``, ``word:N``, or ``skip:K``."""
        kind, sep, num = s.strip().partition(":")
        if not sep or not num:
            raise ValueError(f"feature spec must look like 'char:4', got {s!r}")
        try:
            order = int(num)
        except ValueError:
            raise ValueError(f"feature spec order must be an integer, got {s!r}") from None
        return cls(kind, order)

    def __str__(self) -> str:
        return f"{self.kind}:{self.order}"

    def extract(self, text: str, prep: Preprocessing = Preprocessing()) -> Counter:
        """Term multiset of this family for one text."""
        text = prep.apply(text)
        if self.kind == "char":
            return char_ngrams(text, self.order)
        tokens = tokenize(text)
        if self.kind == "word":
            return word_ngrams(tokens, self.order)
        return skip_bigrams(tokens, self.order, mode=prep.skip_mode)


def parse_spec_list(s: str) -> list[FeatureSpec]:
    """Parse a comma-separated spec list such as ``char:2,char:3,char:4``."""
    specs = [FeatureSpec.parse(part) for part in s.split(",") if part.strip()]
    if not specs:
        raise ValueError(f"no feature specs in {s!r}")
    return specs


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted sparse vector: strictly ascending indices, no stored zeros."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D and the same length")
        if idx.size and np.any(idx[1:] <= idx[:-1]):
            raise ValueError("indices must be strictly ascending")
        if np.any(val == 0.0) or not np.all(np.isfinite(val)):
            raise ValueError("values must be finite and nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size, dtype=np.float64)
        dense[self.indices] = self.values
        return dense


class Vocabulary:
    """Term-to-index map with per-term document frequencies.

    Indices run 0..V-1 with no gaps, and ascending index order equals
    ascending code-point order of the terms, so any two fits of identical
    corpora agree exactly.
    """

    __slots__ = ("index", "df", "n_docs", "_terms")

    def __init__(self, terms: list[str], df: np.ndarray, n_docs: int):
        for a, b in zip(terms, terms[1:]):
            if not a < b:
                raise ValueError(f"vocabulary terms must be strictly ascending: {a!r} !< {b!r}")
        df = np.asarray(df, dtype=np.int64)
        if df.shape != (len(terms),):
            raise ValueError("df must have one entry per term")
        if n_docs < 1:
            raise ValueError("n_docs must be positive")
        if df.size and (df.min() < 1 or df.max() > n_docs):
            raise ValueError("document frequencies must lie in 1..n_docs")
        self._terms = tuple(terms)
        self.index = {t: i for i, t in enumerate(terms)}
        self.df = df
        self.n_docs = int(n_docs)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def terms(self) -> tuple[str, ...]:
        return self._terms


def smooth_idf(df: np.ndarray, n_docs: int) -> np.ndarray:
    """idf(t) = ln((1 + N) / (1 + df(t))) + 1, always positive."""
    return np.log((1.0 + n_docs) / (1.0 + np.asarray(df, dtype=np.float64))) + 1.0


@dataclass(frozen=True, eq=False)
class TfIdfModel:
    """A fitted feature family: vocabulary, idf weights, and preprocessing."""

    spec: FeatureSpec
    prep: Preprocessing
    vocab: Vocabulary
    idf: np.ndarray
    l2_normalize: bool = True

    @property
    def n_features(self) -> int:
        return len(self.vocab)

    @classmethod
    def fit(
        cls,
        corpus: Dataset,
        spec: FeatureSpec,
        prep: Preprocessing = Preprocessing(),
        min_df: int = 1,
    ) -> "TfIdfModel":
        """Fit vocabulary and idf weights on a corpus.

        df counts documents containing a term, not occurrences. Terms with
        df below min_df are dropped (min_df=1 keeps everything, the
        default; the option exists for memory control on large corpora).
        """
        if len(corpus) == 0:
            raise ValueError("cannot fit on an empty corpus")
        if min_df < 1:
            raise ValueError("min_df must be >= 1")
        df_counts: Counter = Counter()
        for doc in corpus:
            df_counts.update(set(spec.extract(doc.text, prep)))
        terms = sorted(t for t, c in df_counts.items() if c >= min_df)
        df = np.array([df_counts[t] for t in terms], dtype=np.int64)
        vocab = Vocabulary(terms, df, n_docs=len(corpus))
        return cls(spec=spec, prep=prep, vocab=vocab, idf=smooth_idf(df, len(corpus)))

    def transform(self, doc: Union[str, Document]) -> SparseVector:
        """TF-IDF vector of one document, unit norm unless no known term occurs."""
        text = doc.text if isinstance(doc, Document) else doc
        counts = self.spec.extract(text, self.prep)
        index = self.vocab.index
        hits = sorted(
            (index[t], c) for t, c in counts.items() if t in index
        )
        if not hits:
            return SparseVector.empty()
        idx = np.fromiter((i for i, _ in hits), dtype=np.int64, count=len(hits))
        tf = np.fromiter((c for _, c in hits), dtype=np.float64, count=len(hits))
        values = tf * self.idf[idx]
        if self.l2_normalize:
            values = values / np.sqrt(np.dot(values, values))
        return SparseVector(idx, values)
