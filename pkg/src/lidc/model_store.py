"""Versioned, canonical JSON serialization of trained ensembles.

The on-disk form is deterministic: keys sorted, floats as their shortest
round-trip decimals, UTF-8, one trailing newline. Two saves of the same
ensemble differ only in the provenance timestamp, which is blanked before
the content digest is computed, so equal digests mean behaviorally
identical models. A ``.gz`` path gzips the same bytes (mtime pinned to 0).

Weight arrays that are at least half zeros are stored as (index, value)
pairs; dense arrays are stored as plain lists. Loading validates every
structural invariant (contiguous ascending vocabulary indices, df bounds,
idf consistency, weight shapes, finite values) and refuses unknown format
versions.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .corpus import LabelCatalog
from .ensemble import Ensemble, Member
from .features import FeatureSpec, Preprocessing, TfIdfModel, Vocabulary, smooth_idf
from .svm import LOSSES, LinearModel

FORMAT_VERSION = 1

_DIGEST_PLACEHOLDER = ""


class ModelFormatError(ValueError):
    """A model file failed parsing or invariant validation."""


def _canonical_bytes(obj: dict) -> bytes:
    return (
        json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False,
                   separators=(",", ":"))
        + "\n"
    ).encode("utf-8")


def _content_digest(obj: dict) -> str:
    stripped = dict(obj)
    stripped.pop("content_digest", None)
    prov = dict(stripped.get("provenance", {}))
    prov["created_at"] = _DIGEST_PLACEHOLDER
    stripped["provenance"] = prov
    return "sha256:" + hashlib.sha256(_canonical_bytes(stripped)).hexdigest()


def _encode_weights(w: np.ndarray) -> dict:
    values = w.tolist()
    n_zero = sum(1 for v in values if v == 0.0)
    if len(values) and n_zero * 2 >= len(values):
        return {
            "encoding": "sparse",
            "size": len(values),
            "entries": [[i, v] for i, v in enumerate(values) if v != 0.0],
        }
    return {"encoding": "dense", "values": values}


def _decode_weights(obj, size_expected: int, where: str) -> np.ndarray:
    if not isinstance(obj, dict) or "encoding" not in obj:
        raise ModelFormatError(f"{where}: weight array must be an encoding object")
    if obj["encoding"] == "dense":
        values = obj.get("values")
        if not isinstance(values, list) or len(values) != size_expected:
            raise ModelFormatError(
                f"{where}: dense weights must hold {size_expected} values"
            )
        arr = np.asarray(values, dtype=np.float64)
    elif obj["encoding"] == "sparse":
        if obj.get("size") != size_expected:
            raise ModelFormatError(
                f"{where}: sparse weights sized {obj.get('size')} but expected {size_expected}"
            )
        arr = np.zeros(size_expected, dtype=np.float64)
        last = -1
        for entry in obj.get("entries", []):
            if not (isinstance(entry, list) and len(entry) == 2):
                raise ModelFormatError(f"{where}: malformed sparse entry {entry!r}")
            i, v = entry
            if not isinstance(i, int) or not 0 <= i < size_expected:
                raise ModelFormatError(f"{where}: sparse index {i!r} out of range")
            if i <= last:
                raise ModelFormatError(f"{where}: sparse indices must be strictly ascending")
            last = i
            arr[i] = float(v)
    else:
        raise ModelFormatError(f"{where}: unknown weight encoding {obj['encoding']!r}")
    if not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"{where}: weights must be finite")
    return arr


def _member_to_obj(member: Member) -> dict:
    tfidf, model = member.tfidf, member.model
    vocab = tfidf.vocab
    return {
        "spec": str(tfidf.spec),
        "n_docs": vocab.n_docs,
        "vocabulary": [
            [term, i, int(vocab.df[i])] for i, term in enumerate(vocab.terms)
        ],
        "idf": tfidf.idf.tolist(),
        "labels": [
            {"weights": _encode_weights(model.weights[l]), "bias": float(model.biases[l])}
            for l in range(len(model.catalog))
        ],
        "c": model.c,
        "loss": model.loss,
        "fit_bias": model.fit_bias,
        "bias_scale": model.bias_scale,
    }


def save(
    ens: Ensemble,
    path: Union[str, Path],
    seed: Optional[int] = None,
    train_digest: Optional[str] = None,
) -> None:
    """Write the ensemble to ``path`` (gzipped when the name ends in .gz)."""
    prep = ens.prep
    obj = {
        "format_version": FORMAT_VERSION,
        "catalog": list(ens.catalog),
        "prep": {
            "lowercase": prep.lowercase,
            "strip_punctuation": prep.strip_punctuation,
            "skip_mode": prep.skip_mode,
        },
        "members": [_member_to_obj(m) for m in ens.members],
        "provenance": {
            "created_at": datetime.now(timezone.utc).isoformat(),
            "seed": seed,
            "train_digest": train_digest,
        },
    }
    obj["content_digest"] = _content_digest(obj)
    payload = _canonical_bytes(obj)
    path = Path(path)
    if path.suffix == ".gz":
        buf = io.BytesIO()
        with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0) as gz:
            gz.write(payload)
        path.write_bytes(buf.getvalue())
    else:
        path.write_bytes(payload)


def file_digest(path: Union[str, Path]) -> str:
    """sha256 digest of a file's raw bytes, for provenance records."""
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ModelFormatError(message)


def _load_member(obj: dict, catalog: LabelCatalog, prep: Preprocessing, where: str) -> Member:
    _require(isinstance(obj, dict), f"{where}: member must be an object")
    for key in ("spec", "n_docs", "vocabulary", "idf", "labels", "c", "loss",
                "fit_bias", "bias_scale"):
        _require(key in obj, f"{where}: missing field {key!r}")
    try:
        spec = FeatureSpec.parse(obj["spec"])
    except ValueError as e:
        raise ModelFormatError(f"{where}: {e}") from None
    n_docs = obj["n_docs"]
    _require(isinstance(n_docs, int) and n_docs >= 1, f"{where}: n_docs must be a positive integer")

    triples = obj["vocabulary"]
    _require(isinstance(triples, list), f"{where}: vocabulary must be a list")
    terms: list[str] = []
    df = np.empty(len(triples), dtype=np.int64)
    for pos, triple in enumerate(triples):
        _require(
            isinstance(triple, list) and len(triple) == 3,
            f"{where}: vocabulary entry {pos} must be [term, index, df]",
        )
        term, index, d = triple
        _require(isinstance(term, str), f"{where}: vocabulary term {pos} must be a string")
        _require(
            isinstance(index, int) and index == pos,
            f"{where}: vocabulary indices must be 0..V-1 in order (entry {pos} has index {index!r})",
        )
        _require(
            isinstance(d, int) and 1 <= d <= n_docs,
            f"{where}: df for {term!r} must lie in 1..{n_docs}",
        )
        if terms and not terms[-1] < term:
            raise ModelFormatError(
                f"{where}: vocabulary terms must be strictly ascending at entry {pos}"
            )
        terms.append(term)
        df[pos] = d
    vocab = Vocabulary(terms, df, n_docs)

    idf = obj["idf"]
    _require(
        isinstance(idf, list) and len(idf) == len(terms),
        f"{where}: idf must hold one weight per term",
    )
    idf_arr = np.asarray(idf, dtype=np.float64)
    _require(
        bool(np.all(np.isfinite(idf_arr)) and np.all(idf_arr > 0)),
        f"{where}: idf weights must be finite and positive",
    )
    expected_idf = smooth_idf(df, n_docs)
    if idf_arr.size and float(np.max(np.abs(idf_arr - expected_idf))) > 1e-9:
        raise ModelFormatError(f"{where}: idf weights inconsistent with df and n_docs")

    tfidf = TfIdfModel(spec=spec, prep=prep, vocab=vocab, idf=idf_arr)

    labels = obj["labels"]
    _require(
        isinstance(labels, list) and len(labels) == len(catalog),
        f"{where}: need one weight record per catalog label",
    )
    V = len(terms)
    weights = np.empty((len(catalog), V), dtype=np.float64)
    biases = np.empty(len(catalog), dtype=np.float64)
    for l, rec in enumerate(labels):
        _require(
            isinstance(rec, dict) and "weights" in rec and "bias" in rec,
            f"{where}: label record {l} must hold weights and bias",
        )
        weights[l] = _decode_weights(rec["weights"], V, f"{where}: label {l}")
        bias = rec["bias"]
        _require(
            isinstance(bias, (int, float)) and np.isfinite(bias),
            f"{where}: label {l} bias must be a finite number",
        )
        biases[l] = float(bias)

    c = obj["c"]
    _require(isinstance(c, (int, float)) and c > 0, f"{where}: C must be positive")
    _require(obj["loss"] in LOSSES, f"{where}: loss must be one of {LOSSES}")
    _require(isinstance(obj["fit_bias"], bool), f"{where}: fit_bias must be a boolean")
    bias_scale = obj["bias_scale"]
    _require(
        isinstance(bias_scale, (int, float)) and np.isfinite(bias_scale),
        f"{where}: bias_scale must be a finite number",
    )

    model = LinearModel(
        catalog=catalog,
        weights=weights,
        biases=biases,
        c=float(c),
        loss=obj["loss"],
        fit_bias=obj["fit_bias"],
        bias_scale=float(bias_scale),
    )
    return Member(tfidf=tfidf, model=model)


def load(path: Union[str, Path]) -> Ensemble:
    """Read, validate, and reconstruct an ensemble saved by :func:`save`."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".gz":
        try:
            raw = gzip.decompress(raw)
        except OSError as e:
            raise ModelFormatError(f"{path}: not a valid gzip file ({e})") from None
    try:
        obj = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ModelFormatError(f"{path}: not valid UTF-8 ({e})") from None
    except json.JSONDecodeError as e:
        raise ModelFormatError(
            f"{path}: JSON parse error at offset {e.pos}: {e.msg}"
        ) from None

    _require(isinstance(obj, dict), f"{path}: model file must hold a JSON object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format_version {version!r} (this build reads {FORMAT_VERSION})"
        )
    digest = obj.get("content_digest")
    _require(isinstance(digest, str), f"{path}: missing content_digest")
    if digest != _content_digest(obj):
        raise ModelFormatError(f"{path}: content digest mismatch (file corrupted or edited)")

    cat_list = obj.get("catalog")
    _require(
        isinstance(cat_list, list) and all(isinstance(s, str) for s in cat_list),
        f"{path}: catalog must be a list of strings",
    )
    try:
        catalog = LabelCatalog(cat_list)
    except ValueError as e:
        raise ModelFormatError(f"{path}: {e}") from None

    prep_obj = obj.get("prep")
    _require(isinstance(prep_obj, dict), f"{path}: missing prep object")
    try:
        prep = Preprocessing(
            lowercase=bool(prep_obj.get("lowercase", False)),
            strip_punctuation=bool(prep_obj.get("strip_punctuation", False)),
            skip_mode=prep_obj.get("skip_mode", "upto"),
        )
    except ValueError as e:
        raise ModelFormatError(f"{path}: {e}") from None

    members_obj = obj.get("members")
    _require(
        isinstance(members_obj, list) and len(members_obj) >= 1,
        f"{path}: members must be a non-empty list",
    )
    members = tuple(
        _load_member(m, catalog, prep, f"{path}: member {i}")
        for i, m in enumerate(members_obj)
    )
    try:
        return Ensemble(members=members, catalog=catalog)
    except ValueError as e:
        raise ModelFormatError(f"{path}: {e}") from None
