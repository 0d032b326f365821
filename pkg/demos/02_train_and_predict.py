"""Train a small voting ensemble, inspect it, and round-trip it through disk.

Run: python3 demos/02_train_and_predict.py
"""

import tempfile
from pathlib import Path

import numpy as np

from lidc import Dataset, Document, FeatureSpec, TrainConfig, train_ensemble
from lidc.model_store import load, save

# Three toy "languages" with distinctive characters. Real corpora come from
# load_tsv(); building documents by hand keeps the demo self-contained.
rng = np.random.default_rng(0)
LEXICONS = {
    "latin": ["amor", "vita", "lux", "terra", "mare"],
    "greek": ["αγάπη", "ζωή", "φως", "γη", "θάλασσα"],
    "digits": ["101", "2048", "777", "3141", "9000"],
}

def make_docs(per_label):
    docs = []
    for label, words in LEXICONS.items():
        for _ in range(per_label):
            n = int(rng.integers(2, 6))
            docs.append(Document(" ".join(rng.choice(words, n)), label))
    return docs

train = Dataset(make_docs(30))
print(f"training set: {len(train)} documents, labels {list(train.catalog)}")

specs = [FeatureSpec.char(2), FeatureSpec.char(3), FeatureSpec.word(1)]
ens = train_ensemble(train, specs, TrainConfig(c=1.0, shuffle_seed=0))

print("\n== ensemble members ==")
for member in ens.members:
    info = member.model.fit_info
    epochs = max(i.epochs for i in info)
    print(f"{str(member.spec):7s} vocabulary={member.tfidf.n_features:4d}"
          f" max-epochs={epochs}")

print("\n== predictions (members vote, ties go to the first label) ==")
probes = ["lux mare", "φως γη", "777 101", "lux φως"]
for text in probes:
    member_votes = [ens.catalog[m.predict(text)] for m in ens.members]
    final = ens.catalog[ens.predict(text)]
    print(f"{text!r:14s} votes={member_votes} -> {final}")

print("\n== persistence ==")
with tempfile.TemporaryDirectory() as td:
    path = Path(td) / "demo-model.json.gz"
    save(ens, path, seed=0)
    size = path.stat().st_size
    loaded = load(path)
    docs = [Document(t) for t in probes]
    same = loaded.predict_all(docs) == ens.predict_all(docs)
    print(f"saved {path.name} ({size} bytes, gzip), reload predicts identically: {same}")
