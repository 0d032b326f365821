"""Model selection: C grid search, single-feature ablation, combinations.

Run: python3 demos/03_model_selection.py
"""

import numpy as np

from lidc import (
    Dataset,
    Document,
    FeatureSpec,
    TrainConfig,
    ablate_features,
    grid_search_c,
    powerset_candidates,
    search_combinations,
)

# two languages that differ mostly in character inventory, with a little
# shared vocabulary so the split is not perfectly separable
rng = np.random.default_rng(7)
A = ["kala", "koti", "kivi", "meri", "talo", "dom"]
B = ["zora", "zima", "grad", "meri", "talo", "dom"]

def make(per_label, words, label):
    return [Document(" ".join(rng.choice(words, int(rng.integers(2, 7)))), label)
            for _ in range(per_label)]

train = Dataset(make(60, A, "fin") + make(60, B, "slv"))
dev = Dataset(make(25, A, "fin") + make(25, B, "slv"))
cfg = TrainConfig(shuffle_seed=1)

print("== C grid (ties go to the smallest C) ==")
result = grid_search_c(train, dev, [FeatureSpec.char(2)],
                       c_grid=[0.01, 0.1, 1.0, 10.0], cfg=cfg)
print(result.to_tsv(), end="")
print(f"best: C={result.best.c}\n")

print("== single-feature ablation ==")
specs = [FeatureSpec.char(n) for n in (1, 2, 3)] + [FeatureSpec.word(1), FeatureSpec.skip(1)]
result = ablate_features(train, dev, specs, cfg)
print(result.to_tsv(), end="")
print(f"best single feature: {result.best.spec_strings[0]}\n")

print("== combinations (ties prefer fewer members) ==")
pool = [FeatureSpec.char(2), FeatureSpec.char(3), FeatureSpec.word(1)]
candidates = powerset_candidates(pool, max_size=3)
result = search_combinations(train, dev, candidates, cfg)
print(result.to_tsv(), end="")
print(f"best combination: {','.join(result.best.spec_strings)}"
      f" (macro-F1 {result.best.macro_f1:.4f})")
