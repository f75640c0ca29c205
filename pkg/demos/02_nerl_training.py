"""Train the full NER+L stack from scratch on a toy two-sense corpus:
word embeddings, self-supervised concept vectors, disambiguation of an
ambiguous name, a supervised correction, and a negation meta-classifier.

Run with: python3 demos/02_nerl_training.py
"""

import random

from clintext.index.analysis import tokenize
from clintext.nerl import (ModelBundle, SupervisedExample, annotate_text,
                           build_cdb, train_meta, train_self_supervised,
                           train_supervised, train_word_embeddings)

RESP = ["sneezing", "runny", "nose", "sore", "throat", "congestion"]
TEMP = ["freezing", "winter", "snow", "frost", "icy", "wind"]


def sentence(rng, words, mention):
    return " ".join(rng.sample(words, 3) + [mention] + rng.sample(words, 3))


def main():
    rng = random.Random(0)

    # 1. corpus with unambiguous synonyms in separable contexts
    corpus = []
    for _ in range(100):
        corpus.append(sentence(rng, RESP, "common cold"))
        corpus.append(sentence(rng, TEMP, "cold temperature"))

    vocab = train_word_embeddings(corpus, dim=20, epochs=5, seed=0)
    print(f"embeddings: {len(vocab)} words, dim {vocab.dim}")

    # 2. concept database: "cold" is shared by both concepts (ambiguous)
    cdb = build_cdb([
        ("C_RESP", "common cold", True), ("C_RESP", "cold", False),
        ("C_TEMP", "cold temperature", True), ("C_TEMP", "cold", False),
    ])

    # 3. self-supervision trains concept vectors only from the unambiguous
    # exact matches, no labels needed
    train_self_supervised(corpus, cdb, vocab)
    for cui in ("C_RESP", "C_TEMP"):
        print(f"{cui}: train_count={cdb.concepts[cui].train_count}")

    # 4. the ambiguous surface form now disambiguates by context
    bundle = ModelBundle(cdb, vocab)
    for text in [sentence(rng, RESP, "cold"), sentence(rng, TEMP, "cold")]:
        mention = annotate_text(text, bundle)[0]
        print(f"'{text}' -> {mention.cui} (confidence {mention.confidence:.3f})")

    # 5. a supervised correction nudges a concept vector
    wrong = sentence(rng, TEMP, "cold")
    idx = wrong.index("cold")
    before = annotate_text(wrong, bundle)[0]
    train_supervised([SupervisedExample(wrong, idx, idx + 4, "C_TEMP", True)],
                     cdb, vocab)
    after = annotate_text(wrong, bundle)[0]
    print(f"supervised positive: confidence {before.confidence:.3f} "
          f"-> {after.confidence:.3f}")

    # 6. meta-annotation: a negation classifier from templated examples
    examples = []
    for _ in range(60):
        for label, template in (("negated", "patient denies {} today"),
                                ("affirmed", "patient reports {} today")):
            concept = rng.choice(["cough", "nausea", "rash"])
            text = template.format(concept)
            tokens = tokenize(text)
            pos = next(i for i, t in enumerate(tokens) if t.text == concept)
            examples.append((tokens, (pos, pos + 1), label))
    meta_vocab = train_word_embeddings(
        [" ".join(t.text for t in toks) for toks, _, _ in examples],
        dim=16, epochs=3, seed=0)
    model = train_meta("negation", examples, meta_vocab, seed=0)
    from clintext.nerl.meta import predict_meta
    probe = tokenize("patient denies cough today")
    label, prob = predict_meta(model, probe, (2, 3), meta_vocab)
    print(f"negation('patient denies cough today') = {label} ({prob:.3f})")


if __name__ == "__main__":
    main()
