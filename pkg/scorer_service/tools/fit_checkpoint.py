"""Fit the default checkpoint from synthetic graded sentence pairs.

Each training pair corrupts a fraction of a sentence's tokens and takes
the surviving fraction as the target score, so the fitted combination
of overlap features tracks "how much of the reference survives".  The
solution is non-negative least squares, so every feature can only help a
candidate; weights land in the checkpoint JSON, rounded so the artifact
is stable across platforms.

Usage: python3 fit_checkpoint.py [out.json]
"""

import json
import random
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from scorer_service.model import FEATURE_ORDER, features  # noqa: E402

SENTENCES = [
    "The game is called Tony Hawk's Pro Skater 3 and it came out in 2001.",
    "I heard that actor starred in a really good movie last year.",
    "She released a country album that won several awards.",
    "The team signed a new defensive end before the season opener.",
    "Did you know the show won an award for its sketch comedy writing?",
    "The narrative is set in a quiet suburban town full of secrets.",
    "He composed the soundtrack for an animated film about dragons.",
    "That studio published a multiplayer shooter with a huge map.",
    "The director cast her in the lead role after one audition.",
    "Critics called the sequel a rare improvement on the original.",
    "The band toured Europe to promote their second record.",
    "A famous quarterback announced his retirement this morning.",
    "The documentary follows three chefs through a single dinner service.",
    "Its opening theme became more popular than the series itself.",
    "The novel was adapted into a miniseries with eight episodes.",
    "They remastered the classic platformer for modern consoles.",
    "The singer performed an acoustic set at the small venue.",
    "An indie developer built the entire engine from scratch.",
    "The festival screened forty films from twelve countries.",
    "Her latest single topped the charts for six straight weeks.",
]

JUNK = "qwxzvkjy"


def corrupt(rng: random.Random, sentence: str, fraction: float) -> str:
    tokens = sentence.split()
    n_replace = round(len(tokens) * fraction)
    positions = rng.sample(range(len(tokens)), n_replace)
    for pos in positions:
        tokens[pos] = "".join(rng.choice(JUNK) for _ in range(rng.randint(3, 8)))
    return " ".join(tokens)


def training_set(seed: int = 13):
    rng = random.Random(seed)
    rows, targets = [], []
    for sentence in SENTENCES:
        for fraction in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
            for _ in range(3):
                candidate = corrupt(rng, sentence, fraction)
                values = features(candidate, sentence)
                rows.append([values[name] for name in FEATURE_ORDER])
                targets.append(1.0 - fraction)
    return np.array(rows), np.array(targets)


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parents[1]
        / "src"
        / "scorer_service"
        / "checkpoints"
        / "default.json"
    )
    design, targets = training_set()
    design = np.hstack([np.ones((design.shape[0], 1)), design])
    solution, _ = nnls(design, targets)
    bias, *weights = (round(float(w), 4) for w in solution)
    checkpoint = {
        "model_id": "overlap-ls-v1",
        "bias": bias,
        "weights": dict(zip(FEATURE_ORDER, weights)),
        "fitted_on": "synthetic token-corruption pairs, seed 13",
    }
    out.write_text(json.dumps(checkpoint, indent=2, sort_keys=True) + "\n")
    fitted = design @ solution
    rmse = float(np.sqrt(np.mean((fitted - targets) ** 2)))
    print(f"wrote {out}")
    print(f"rmse {rmse:.4f}; bias {bias}; weights {checkpoint['weights']}")


if __name__ == "__main__":
    main()
