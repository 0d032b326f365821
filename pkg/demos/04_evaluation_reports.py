"""Evaluation artifacts: score report, confusion matrix, error analysis.

Run: python3 demos/04_evaluation_reports.py
Writes demo-confusion.csv / demo-confusion.svg / demo-errors.tsv to the
current directory.
"""

import json
from pathlib import Path

import numpy as np

from lidc import (
    Dataset,
    Document,
    FeatureSpec,
    confusion,
    error_report,
    random_baseline,
    score,
    train_ensemble,
)

rng = np.random.default_rng(3)
LEXICONS = {
    "awa": ["bina", "hamar", "raja", "pani", "ghar"],
    "bho": ["bina", "hamar", "rauwa", "pani", "gaon"],
    "mag": ["tora", "hamni", "raja", "khet", "gaon"],
}

def make(per_label, max_words=6):
    docs = []
    for label, words in LEXICONS.items():
        for _ in range(per_label):
            n = int(rng.integers(1, max_words))
            docs.append(Document(" ".join(rng.choice(words, n)), label))
    return Dataset(docs)

train, test = make(80), make(30)
ens = train_ensemble(train, [FeatureSpec.char(2), FeatureSpec.char(3),
                             FeatureSpec.char(4)])
gold = [ens.catalog.id_of(d.label) for d in test.documents]
preds = ens.predict_all(test.documents)

print("== score report ==")
cm = confusion(gold, preds, ens.catalog)
report = score(cm)
print(json.dumps(report.to_jsonable(), indent=2, sort_keys=True))

print("\n== chance level for comparison ==")
baseline = random_baseline(gold, ens.catalog, seed=7)
print(f"model macro-F1    {report.macro_f1:.4f}")
print(f"random macro-F1   {baseline.macro_f1:.4f}"
      f" (about 1/{len(ens.catalog)} per class)")

print("\n== confusion matrix ==")
print(cm.to_csv(), end="")
Path("demo-confusion.csv").write_text(cm.to_csv(), encoding="utf-8")
Path("demo-confusion.svg").write_text(cm.to_svg(), encoding="utf-8")
print("wrote demo-confusion.csv and demo-confusion.svg")

print("\n== error analysis ==")
errors = error_report(Dataset(test.documents, ens.catalog), preds, short_threshold=3)
print(f"{errors.n_errors} of {errors.total_scored} misclassified;"
      f" {errors.short_fraction:.0%} of the errors are short texts"
      f" (<= {errors.short_threshold} tokens)")
for gold_label, pred_label, count in errors.top_pairs[:3]:
    print(f"  {gold_label} -> {pred_label}: {count}")
Path("demo-errors.tsv").write_text(errors.to_tsv(), encoding="utf-8")
print("wrote demo-errors.tsv")
