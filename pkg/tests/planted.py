"""Synthetic corpora with known ground truth, for property tests.

Each tablet is generated for one system; its entries count objects from a
sign pool tied to that system, so contextual features genuinely predict the
label.  A configurable fraction of numerals is written unambiguously (the
seeds); the rest are four-way ambiguous, with the generator remembering the
intended system for every numeral.
"""

from __future__ import annotations

import random

from penum import Corpus, parse_corpus

SYSTEM_OBJECTS = {
    "B": ("M352", "M218"),
    "C": ("M288", "M263"),
    "D": ("M346", "M367"),
    "S": ("M376", "M056~f"),
}

LABELS = ("B", "C", "D", "S")


def seed_notation(label: str, rng: random.Random) -> str:
    """A notation valid only in ``label``'s system."""
    if label == "B":
        return f"{rng.randint(1, 9)}(N51)"
    if label == "C":
        return f"{rng.randint(1, 4)}(N01) {rng.randint(1, 4)}(N39B)"
    if label == "D":
        # too many N14 for S/B, too many N01 for C
        return f"{rng.randint(6, 9)}(N14) {rng.randint(6, 9)}(N01)"
    if label == "S":
        return f"{rng.randint(1, 9)}(N01) 1(N8B)"
    raise ValueError(label)


def ambiguous_notation(rng: random.Random) -> str:
    """A four-way ambiguous notation (small N14/N01 counts)."""
    n14 = rng.randint(0, 5)
    n01 = rng.randint(1, 5)
    return f"{n14}(N14) {n01}(N01)" if n14 else f"{n01}(N01)"


def make_planted_corpus(
    n_tablets: int = 120,
    min_entries: int = 4,
    max_entries: int = 10,
    seed_rate: float = 0.1,
    seed: int = 0,
) -> tuple[Corpus, dict[tuple[str, int, int], str]]:
    """Corpus plus the intended system of every numeral (by key)."""
    rng = random.Random(seed)
    lines: list[str] = []
    truth: dict[tuple[str, int, int], str] = {}
    for i in range(n_tablets):
        label = LABELS[i % len(LABELS)]
        tablet_id = f"T{i:05d}"
        lines.append(f"&{tablet_id}")
        lines.append("@obverse")
        for line_no in range(1, rng.randint(min_entries, max_entries) + 1):
            sign = rng.choice(SYSTEM_OBJECTS[label])
            if rng.random() < seed_rate:
                numeral = seed_notation(label, rng)
            else:
                numeral = ambiguous_notation(rng)
            lines.append(f"{line_no}. {sign} , {numeral}")
            truth[(tablet_id, line_no, 0)] = label
    return parse_corpus("\n".join(lines) + "\n"), truth


def random_corpus(seed: int, n_tablets: int = 6) -> Corpus:
    """Arbitrary well-formed corpus for round-trip style tests."""
    rng = random.Random(seed)
    signs = ["M001", "M056~f", "M288", "M341", "M376", "M388"]
    digits = ["N01", "N14", "N34", "N39B", "N45", "N51", "N8B", "N02"]
    lines: list[str] = []
    for i in range(n_tablets):
        tablet_id = f"R{seed:03d}{i:03d}"
        lines.append(f"&{tablet_id}")
        if rng.random() < 0.4:
            lines.append(" ".join(rng.sample(signs, rng.randint(1, 2))))
        line_no = 0
        for surface in ("", "@obverse", "@reverse"):
            if surface:
                if rng.random() < 0.5:
                    continue
                lines.append(surface)
            for _ in range(rng.randint(0, 4)):
                line_no += 1
                if rng.random() < 0.15:
                    lines.append("# summary")
                text = " ".join(
                    rng.sample(signs, rng.randint(0, 2))
                    + (["X"] if rng.random() < 0.1 else [])
                )
                tokens = []
                for _ in range(rng.randint(0, 3)):
                    tokens.append(f"{rng.randint(1, 11)}({rng.choice(digits)})")
                if rng.random() < 0.1:
                    tokens.append("...")
                numeral = " ".join(tokens)
                if not text and not numeral:
                    numeral = "1(N01)"
                lines.append(f"{line_no}. {text} , {numeral}")
    return parse_corpus("\n".join(lines) + "\n")
