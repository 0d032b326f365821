"""Labeled text corpora in the one-instance-per-line TSV shape.

A corpus file holds one instance per line, ``text<TAB>label`` when labeled
or bare text when not, UTF-8 encoded with LF line endings. The label
catalog built from a corpus is sorted ascending by code point; that order
doubles as the tie-break order used by classifiers and the voting rule.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union


@dataclass(frozen=True)
class Document:
    """One text instance, optionally labeled.

    A missing label (None) is distinct from an empty-string label.
    """

    text: str
    label: Optional[str] = None


class LabelCatalog(Sequence[str]):
    """Immutable list of unique label strings, strictly ascending by code point.

    A label's id is its index in this list. Every tie-break in the package
    ("smallest label wins") is defined in terms of these ids.
    """

    __slots__ = ("_labels", "_ids")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        for a, b in zip(labels, labels[1:]):
            if not a < b:
                raise ValueError(
                    f"labels must be strictly ascending: {a!r} !< {b!r}"
                )
        self._labels = labels
        self._ids = {s: i for i, s in enumerate(labels)}

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "LabelCatalog":
        """Build a catalog from observed labels (deduplicated, sorted)."""
        return cls(sorted(set(labels)))

    def id_of(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise KeyError(f"unknown label {label!r}") from None

    def __getitem__(self, i):
        return self._labels[i]

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self._labels)

    def __contains__(self, label) -> bool:
        return label in self._ids

    def __eq__(self, other) -> bool:
        if isinstance(other, LabelCatalog):
            return self._labels == other._labels
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._labels)

    def __repr__(self) -> str:
        return f"LabelCatalog({list(self._labels)!r})"


class Dataset:
    """An ordered collection of documents plus the catalog of their labels."""

    __slots__ = ("documents", "catalog")

    def __init__(self, documents: Iterable[Document],
                 catalog: Optional[LabelCatalog] = None):
        documents = tuple(documents)
        if catalog is None:
            catalog = LabelCatalog.from_labels(
                d.label for d in documents if d.label is not None
            )
        for d in documents:
            if d.label is not None and d.label not in catalog:
                raise ValueError(f"document label {d.label!r} not in catalog")
        self.documents = documents
        self.catalog = catalog

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @property
    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    def label_ids(self) -> list[int]:
        """Per-document label ids; requires every document to be labeled."""
        ids = []
        for i, d in enumerate(self.documents):
            if d.label is None:
                raise ValueError(f"document {i} has no label")
            ids.append(self.catalog.id_of(d.label))
        return ids

    def __repr__(self) -> str:
        return f"Dataset({len(self.documents)} documents, {len(self.catalog)} labels)"


def load_tsv(path: Union[str, Path], labeled: bool = True) -> Dataset:
    """Load a corpus file.

    Labeled mode splits each non-empty line on its first tab into text and
    label and errors (with the 1-based line number) on lines without a tab;
    blank lines are skipped. Unlabeled mode keeps every line, including
    empty ones, as a bare text so downstream output stays line-aligned with
    the input file. An empty file yields an empty Dataset.
    """
    raw = Path(path).read_bytes()
    try:
        content = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ValueError(f"{path}: not valid UTF-8 ({e})") from None

    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # file-terminating newline, not an extra instance

    documents = []
    if labeled:
        seen = set()
        for lineno, line in enumerate(lines, start=1):
            if line == "":
                continue
            cut = line.find("\t")
            if cut < 0:
                raise ValueError(
                    f"{path}: line {lineno}: expected 'text<TAB>label', found no tab"
                )
            text, label = line[:cut], line[cut + 1 :]
            seen.add(label)
            documents.append(Document(text=text, label=label))
        catalog = LabelCatalog(sorted(seen))
    else:
        documents = [Document(text=line) for line in lines]
        catalog = LabelCatalog(())
    return Dataset(documents, catalog)


def strip_punctuation(text: str) -> str:
    """Replace punctuation (Unicode category P*) with spaces and tidy whitespace.

    Runs of whitespace collapse to a single space and the result is
    trimmed, so the function is idempotent. Off by default in the
    pipeline; exposed as an opt-in preprocessing flag.
    """
    spaced = "".join(
        " " if unicodedata.category(ch).startswith("P") else ch for ch in text
    )
    return " ".join(spaced.split())
