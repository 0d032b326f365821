"""Reproduce the reference results on the ILI shared-task corpus.

The Indo-Aryan Language Identification (VarDial 2018) data is distributed
by the task organizers and cannot ship with this repository. Point this
script at a directory containing train/dev (and optionally test) files in
``text<TAB>label`` format:

    python3 demos/reproduce_ili.py --data-dir /path/to/ili

Reference numbers for the submitted configuration (char:2+char:3+char:4,
C=1, no preprocessing):

    char:4 alone    dev macro-F1 0.951 +- 0.010
    ensemble        dev macro-F1 0.953 +- 0.010
    ensemble        test macro-F1 0.889 +- 0.015
    ensemble        dev misclassifications ~484 +- 5%

The script exits non-zero if a computed score falls outside its band.
"""

import argparse
import os
import sys
import time
from pathlib import Path

from lidc import FeatureSpec, TrainConfig, confusion, load_tsv, score, train_ensemble


def find_split(base: Path, stem: str) -> Path | None:
    for suffix in (".tsv", ".txt"):
        p = base / f"{stem}{suffix}"
        if p.exists():
            return p
    return None


def check(name: str, got: float, want: float, tol: float) -> bool:
    ok = abs(got - want) <= tol
    mark = "ok" if ok else "OUT OF BAND"
    print(f"{name:28s} {got:.4f}  (expected {want} +- {tol})  {mark}")
    return ok


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data-dir", required=True,
                    help="directory with train/dev[/test] TSV files")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    base = Path(args.data_dir)
    train_path, dev_path = find_split(base, "train"), find_split(base, "dev")
    if train_path is None or dev_path is None:
        print(f"error: need {base}/train.tsv and {base}/dev.tsv (or .txt)",
              file=sys.stderr)
        return 1

    print(f"loading {train_path} and {dev_path}")
    train = load_tsv(train_path)
    dev = load_tsv(dev_path)
    print(f"{len(train)} train / {len(dev)} dev instances,"
          f" labels {list(train.catalog)}")

    ok = True
    cfg = TrainConfig(c=1.0, shuffle_seed=0)

    t0 = time.perf_counter()
    single = train_ensemble(train, [FeatureSpec.char(4)], cfg, threads=args.threads)
    gold = [single.catalog.id_of(d.label) for d in dev.documents]
    preds = single.predict_all(dev.documents)
    rep = score(confusion(gold, preds, single.catalog))
    print(f"\nchar:4 trained in {time.perf_counter() - t0:.0f}s")
    ok &= check("char:4 dev macro-F1", rep.macro_f1, 0.951, 0.010)

    t0 = time.perf_counter()
    specs = [FeatureSpec.char(2), FeatureSpec.char(3), FeatureSpec.char(4)]
    ens = train_ensemble(train, specs, cfg, threads=args.threads)
    preds = ens.predict_all(dev.documents)
    rep = score(confusion(gold, preds, ens.catalog))
    errors = sum(1 for g, p in zip(gold, preds) if g != p)
    print(f"\nensemble trained in {time.perf_counter() - t0:.0f}s")
    ok &= check("ensemble dev macro-F1", rep.macro_f1, 0.953, 0.010)
    ok &= check("ensemble dev errors", float(errors), 484.0, 484.0 * 0.05)

    test_path = find_split(base, "test")
    if test_path is None:
        print("\nno test split found; skipping the test-set check")
    else:
        test = load_tsv(test_path)
        tgold = [ens.catalog.id_of(d.label) for d in test.documents]
        trep = score(confusion(tgold, ens.predict_all(test.documents), ens.catalog))
        ok &= check("ensemble test macro-F1", trep.macro_f1, 0.889, 0.015)

    print("\nall checks passed" if ok else "\nsome checks failed")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
