#!/usr/bin/env python3
"""Smoke test for the dpparse_py extension module.

Builds the cdylib with cargo (pass --no-build to skip), stages it under a
temporary directory as an importable module, and exercises the main types
and operations end to end.
"""

import argparse
import random
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module(no_build: bool, release: bool) -> Path:
    if not no_build:
        cmd = ["cargo", "build", "-p", "dpparse-py"]
        if release:
            cmd.append("--release")
        subprocess.run(cmd, cwd=REPO, check=True)
    profile = "release" if release else "debug"
    built = REPO / "target" / profile / "libdpparse_py.so"
    if not built.exists():  # macOS
        built = REPO / "target" / profile / "libdpparse_py.dylib"
    if not built.exists():
        sys.exit(f"extension not found under target/{profile}; build it first")
    stage = Path(tempfile.mkdtemp(prefix="dpparse-py-"))
    shutil.copy2(built, stage / "dpparse_py.so")
    return stage


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--no-build", action="store_true", help="use an existing build")
    parser.add_argument("--release", action="store_true", help="use the release profile")
    args = parser.parse_args()

    sys.path.insert(0, str(stage_module(args.no_build, args.release)))
    import dpparse_py as dp

    print(f"dpparse_py {dp.__version__}")

    # --- corpus handling ------------------------------------------------
    rng = random.Random(11)
    words = ["dak", "lupo", "mi", "tesen", "rab", "folu", "nis", "pate"]
    text = "\n".join(
        " ".join(rng.choices(words, k=rng.randint(2, 5))) for _ in range(400)
    ) + "\n"
    gold = dp.Corpus.parse(text, "char")
    assert len(gold) == 400
    assert gold.boundaries_visible
    stripped = gold.strip_boundaries()
    assert not stripped.boundaries_visible
    assert stripped.restore_boundaries().render() == text
    lexicon = gold.word_lexicon(4)
    assert len(lexicon) == 4 and lexicon[0][1] >= lexicon[-1][1]
    print("corpus round trip: ok")

    # --- segmentation ----------------------------------------------------
    seg = dp.segment(gold, seed=7)
    assert seg.corpus.boundaries_visible
    scores = dp.evaluate_segmentation(gold, seg.corpus)
    stats = seg.stats()
    assert stats[0]["iteration"] == 1
    assert 1 <= seg.best_iteration <= len(stats)
    assert scores["boundary"]["f1"] > 0.5, scores
    again = dp.segment(gold, seed=7)
    assert again.corpus.render() == seg.corpus.render()
    print(f"segmentation: boundary F1 {scores['boundary']['f1']:.3f}, "
          f"token F1 {scores['token']['f1']:.3f} (deterministic)")

    # --- n-gram scoring --------------------------------------------------
    bigram = dp.NGramModel.train(gold, order=2, units="char")
    assert bigram.order == 2
    seen, unseen = bigram.score_text("dak"), bigram.score_text("zzz")
    assert seen > unseen
    phone = dp.Corpus.parse("DH AH0 | D AO1 G\nK AE1 T\n", "phone")
    unigram = dp.NGramModel.train(phone, order=1, units="phone")
    assert unigram.score_text("D AO1 G") > unigram.score_text("UH2 UH2 UH2")
    print("n-gram scoring: ok")

    # --- BPE ---------------------------------------------------------------
    bpe = dp.BpeModel.learn(gold, gold.alphabet_size + 6)
    assert bpe.merge_count == 6
    # include a novel word over known symbols
    for w in words + ["odimak"]:
        units = bpe.encode_word(w)
        assert bpe.decode_units(units) == w
    print("bpe round trip: ok")

    # --- benchmark utilities ---------------------------------------------
    rho = dp.spearman([1.0, 2.0, 2.0, 4.0], [1.0, 3.0, 2.0, 4.0])
    assert abs(rho - 0.9486832980505138) < 1e-12
    assert abs(dp.cosine([1.0, 0.0], [0.0, 2.0])) < 1e-12
    assert dp.pool([[1.0, 3.0], [3.0, 1.0]], "mean") == [2.0, 2.0]
    overall, per_cat = dp.pair_accuracy(
        [("1", "c", "dak", "dka"), ("2", "c", "lupo", "ulpo")],
        {("1", "positive"): 2.0, ("1", "negative"): 1.0,
         ("2", "positive"): 1.0, ("2", "negative"): 1.0},
    )
    assert overall == 0.75 and per_cat["c"] == 0.75
    print("benchmark utilities: ok")

    # --- balancing ---------------------------------------------------------
    pool_rows = [
        (w + str(i), f"len{len(w)}", [w[::-1] + s for s in ("a", "b", "c")])
        for i, w in enumerate(words * 3)
    ]
    pairs, objective = dp.balance_wuggy(pool_rows, [bigram], seed=3)
    assert len(pairs) == len(pool_rows)
    assert objective <= 0.5
    print(f"balancing: ok (objective {objective:.3f})")

    print("smoke test passed")


if __name__ == "__main__":
    main()
