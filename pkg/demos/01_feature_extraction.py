"""Walk through the feature extractors and TF-IDF weighting.

Run: python3 demos/01_feature_extraction.py
"""

from lidc import Document, FeatureSpec, Preprocessing, TfIdfModel, parse_spec_list

text = "the cat sat on the mat"

print("== n-gram families ==")
print(f"input: {text!r}\n")
for spec_str in ["char:2", "char:3", "word:1", "word:2", "skip:1", "skip:2"]:
    spec = FeatureSpec.parse(spec_str)
    counts = spec.extract(text, Preprocessing())
    sample = dict(sorted(counts.items())[:6])
    print(f"{spec_str:7s} -> {len(counts):3d} distinct terms, e.g. {sample}")

print("\n== skip-bigram gap conventions ==")
tokens_text = "a b c d"
for mode in ("upto", "exact"):
    prep = Preprocessing(skip_mode=mode)
    got = FeatureSpec.skip(2).extract(tokens_text, prep)
    print(f"skip:2 mode={mode:5s} on {tokens_text!r}: {sorted(got)}")

print("\n== preprocessing switches ==")
noisy = "The CAT, the cat!"
for prep in (Preprocessing(),
             Preprocessing(lowercase=True),
             Preprocessing(lowercase=True, strip_punctuation=True)):
    print(f"lowercase={prep.lowercase!s:5s} strip={prep.strip_punctuation!s:5s}"
          f" -> {prep.apply(noisy)!r}")

print("\n== TF-IDF weighting ==")
corpus = [Document("a b"), Document("a c")]
model = TfIdfModel.fit(corpus, FeatureSpec.word(1))
print(f"corpus: {[d.text for d in corpus]}")
print(f"vocabulary: {model.vocab.terms}")
for term in model.vocab.terms:
    print(f"  idf({term}) = {model.idf[model.vocab.index[term]]:.6f}")

vec = model.transform(Document("a b"))
print(f"transform('a b') -> indices {vec.indices.tolist()},"
      f" values {[round(float(v), 6) for v in vec.values]}")
print(f"L2 norm: {vec.norm():.12f} (documents with no known term keep norm 0)")
print(f"transform('zzz') nnz = {model.transform(Document('zzz')).nnz}")

print("\n== spec lists as used by the CLI ==")
specs = parse_spec_list("char:2,char:3,char:4")
print(f"'char:2,char:3,char:4' -> {[str(s) for s in specs]}")
