"""Smoke test for the embedval_py extension.

Build and run from the repository root:

    cargo build --release -p embedval-py --features extension-module
    cp target/release/libembedval_py.so python/embedval_py.so
    python3 python/smoke_test.py
"""

import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import embedval_py as ev


def main():
    assert ev.tokenize("How happy would you say you are?") == [
        "how", "happy", "would", "you", "say", "you", "are",
    ]
    assert ev.jaccard("Are you happy?", "Are you sad?") == 0.5
    assert abs(ev.cosine([1.0, 0.0], [1.0, 1.0]) - 2 ** -0.5) < 1e-12
    try:
        ev.cosine([1.0], [1.0, 2.0])
    except ev.EmbedvalError as e:
        print("dimension mismatch rejected:", e)
    else:
        raise AssertionError("mismatched dims accepted")

    corpus = ev.generate_corpus(seed=3)
    assert len(corpus) == 2223, len(corpus)
    assert len({q["basic"] for q in corpus}) == 13
    assert {q["role"] for q in corpus} == {"reference", "similar", "dissimilar"}
    print("corpus:", len(corpus), "questions, e.g.", corpus[0]["text"])

    with tempfile.TemporaryDirectory() as out:
        meta = ev.run("gen-corpus", seed=3, out_dir=out)
        assert meta["command"] == "gen-corpus" and meta["seed"] == 3
        assert sorted(os.listdir(out)) == [
            "corpus.csv", "corpus_summary.json", "diagnostics.json", "metadata.json",
        ]
        print("gen-corpus wrote", sorted(os.listdir(out)))

    try:
        ev.run("bogus")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown command accepted")
    print("ok")


if __name__ == "__main__":
    main()
