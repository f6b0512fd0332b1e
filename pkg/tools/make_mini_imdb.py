"""Regenerate the bundled mini-IMDB fixture.

The reviews are synthetic: sentences are drawn from small positive, negative
and neutral phrase banks with a fixed seed, then written in the standard
``split/{pos,neg}/<id>_<rating>.txt`` layout.

    python tools/make_mini_imdb.py src/qnlp/datasets/mini_imdb
"""

import random
import sys
from pathlib import Path

SUBJECTS = ["This movie", "The film", "The plot", "The acting", "The cast", "The script",
            "The soundtrack", "The director's work", "The ending", "The story"]
POSITIVE = ["was wonderful", "was brilliant and moving", "is a great watch", "felt fresh and clever",
            "was beautifully shot", "made me laugh out loud", "is one of the best I have seen",
            "was superb from start to finish", "kept me hooked", "was charming and warm",
            "deserves every award", "was a delight", "is simply excellent", "was touching"]
NEGATIVE = ["was terrible", "was boring and slow", "is a waste of time", "felt lazy and dull",
            "was poorly shot", "made me fall asleep", "is one of the worst I have seen",
            "was awful from start to finish", "lost me quickly", "was cold and lifeless",
            "deserves no praise", "was a mess", "is simply bad", "was painful to sit through"]
NEUTRAL = ["I watched it on a Sunday afternoon.", "It runs for about two hours.",
           "My friend recommended it to me.", "The cinema was half empty.",
           "It is based on a novel.", "There are several flashbacks.",
           "I saw it with my family.", "It was released last year.",
           "The trailer gives away a lot.", "Some scenes were filmed abroad."]
CLOSERS_POS = ["Highly recommended!", "Go and see it.", "I would watch it again.", "Ten out of ten."]
CLOSERS_NEG = ["Avoid it.", "Not recommended.", "I want my money back.", "Two out of ten, at best."]


def review(rng, positive):
    bank = POSITIVE if positive else NEGATIVE
    other = NEGATIVE if positive else POSITIVE
    sentences = []
    for _ in range(rng.randint(4, 8)):
        r = rng.random()
        if r < 0.6:
            sentences.append(f"{rng.choice(SUBJECTS)} {rng.choice(bank)}.")
        elif r < 0.7:
            sentences.append(f"{rng.choice(SUBJECTS)} {rng.choice(other)}, but overall it did not matter.")
        else:
            sentences.append(rng.choice(NEUTRAL))
    sentences.append(rng.choice(CLOSERS_POS if positive else CLOSERS_NEG))
    return " ".join(sentences)


def main(out):
    rng = random.Random(2021)
    for split, n in (("train", 100), ("test", 20)):
        for label in ("pos", "neg"):
            folder = Path(out) / split / label
            folder.mkdir(parents=True, exist_ok=True)
            for i in range(n):
                rating = rng.randint(7, 10) if label == "pos" else rng.randint(1, 4)
                (folder / f"{i}_{rating}.txt").write_text(review(rng, label == "pos") + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/qnlp/datasets/mini_imdb")
