"""Colored words over {-,+}: prefix statistics, blocks, and dealternation.

A colored word assigns each letter a color; a block is a maximal run of
one color.  A block-shuffle permutes letters so that (i) within each color
the letter order is unchanged and (ii) every block of the original stays
contiguous.  Prefix maxima/minima include the empty prefix, so pmax >= 0
and pmin <= 0 always.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

PLUS = "+"
MINUS = "-"
_VALUE = {PLUS: 1, MINUS: -1}


@dataclass(frozen=True)
class ColoredWord:
    letters: tuple[str, ...]
    colors: tuple[Hashable, ...]

    def __post_init__(self):
        if len(self.letters) != len(self.colors):
            raise ValueError("letters and colors must have equal length")
        for ch in self.letters:
            if ch not in _VALUE:
                raise ValueError(f"letter {ch!r} not in alphabet {{-,+}}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return " ".join(f"{c}:{l}" for c, l in zip(self.colors, self.letters))

    @staticmethod
    def parse(text: str) -> "ColoredWord":
        letters, colors = [], []
        for token in text.split():
            color, sep, letter = token.rpartition(":")
            if not sep or letter not in _VALUE or not color:
                raise ValueError(f"bad token {token!r}, expected '<color>:<+|->'")
            colors.append(color)
            letters.append(letter)
        return ColoredWord(tuple(letters), tuple(colors))

    @staticmethod
    def make(letters: str | Sequence[str], colors: Sequence[Hashable]) -> "ColoredWord":
        return ColoredWord(tuple(letters), tuple(colors))

    def color_set(self) -> frozenset:
        return frozenset(self.colors)

    def restrict(self, color: Hashable) -> "ColoredWord":
        pairs = [(l, c) for l, c in zip(self.letters, self.colors) if c == color]
        return ColoredWord(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def word_sum(letters: Iterable[str]) -> int:
    return sum(_VALUE[ch] for ch in letters)


def prefix_extremes(letters: Iterable[str]) -> tuple[int, int]:
    """(pmax, pmin) over all prefixes including the empty one."""
    acc = pmax = pmin = 0
    for ch in letters:
        acc += _VALUE[ch]
        pmax = max(pmax, acc)
        pmin = min(pmin, acc)
    return pmax, pmin


def blocks(w: ColoredWord) -> tuple[tuple[int, int], ...]:
    """Half-open index ranges [start, end) of the maximal same-color runs."""
    out = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w.colors[i] != w.colors[i - 1]:
            out.append((start, i))
            start = i
    return tuple(out)


@dataclass(frozen=True)
class WordStats:
    sum: int
    pmax: int
    pmin: int
    block_count: int
    per_color_block_count: dict

    def __post_init__(self):
        object.__setattr__(self, "per_color_block_count", dict(self.per_color_block_count))


def word_stats(w: ColoredWord) -> WordStats:
    pmax, pmin = prefix_extremes(w.letters)
    per_color: dict = {}
    bl = blocks(w)
    for s, _ in bl:
        per_color[w.colors[s]] = per_color.get(w.colors[s], 0) + 1
    return WordStats(word_sum(w.letters), pmax, pmin, len(bl), per_color)


def is_block_shuffle(w: ColoredWord, w2: ColoredWord) -> bool:
    """Decide whether w2 arises from w by a block-shuffle.

    Preserving per-color letter order forces the permutation: the j-th
    letter of each color in w must land on the j-th position of that color
    in w2.  It remains to check the per-color letter sequences agree and
    every block of w maps onto consecutive positions.
    """
    if len(w) != len(w2):
        return False
    positions: dict = {}
    for idx, c in enumerate(w2.colors):
        positions.setdefault(c, []).append(idx)
    taken: dict = {c: 0 for c in positions}
    image = []
    for letter, color in zip(w.letters, w.colors):
        slots = positions.get(color)
        if slots is None or taken[color] >= len(slots):
            return False
        pos = slots[taken[color]]
        taken[color] += 1
        if w2.letters[pos] != letter:
            return False
        image.append(pos)
    if any(taken[c] != len(positions[c]) for c in positions):
        return False
    for s, e in blocks(w):
        span = image[s:e]
        if max(span) - min(span) != e - s - 1:
            return False
    return True


def _dealternate_item_order(colors: Sequence[Hashable], sums: Sequence[int]) -> tuple[int, ...]:
    """Order (0-based item indices) after exhaustively swapping adjacent
    block pairs with sum(left) >= 0 and sum(right) <= 0, leftmost pair
    first, stopping when no pair qualifies or exactly two blocks remain.

    Items are atomic monochromatic segments; blocks are maximal runs of
    same-colored items.  Every swap with three or more blocks present
    merges neighbors, so the block count strictly decreases and the loop
    terminates.
    """
    if len(frozenset(colors)) > 2:
        raise ValueError("dealternation is defined for at most two colors")
    items = list(range(len(colors)))
    while True:
        runs: list[list[int]] = []
        for it in items:
            if runs and colors[runs[-1][-1]] == colors[it]:
                runs[-1].append(it)
            else:
                runs.append([it])
        if len(runs) <= 2:
            break
        swap_at = None
        run_sums = [sum(sums[it] for it in run) for run in runs]
        for i in range(len(runs) - 1):
            if run_sums[i] >= 0 and run_sums[i + 1] <= 0:
                swap_at = i
                break
        if swap_at is None:
            break
        runs[swap_at], runs[swap_at + 1] = runs[swap_at + 1], runs[swap_at]
        items = [it for run in runs for it in run]
    return tuple(items)


def swap_blocks(w: ColoredWord, i: int) -> ColoredWord:
    """Swap blocks i and i+1 (1-based); the callers check the sum conditions."""
    bl = blocks(w)
    if not (1 <= i < len(bl)):
        raise ValueError(f"no adjacent block pair at position {i}")
    (s1, e1), (s2, e2) = bl[i - 1], bl[i]
    order = list(range(s1)) + list(range(s2, e2)) + list(range(s1, e1)) + list(range(e2, len(w)))
    return ColoredWord(tuple(w.letters[j] for j in order), tuple(w.colors[j] for j in order))


def dealternate_word(w: ColoredWord) -> ColoredWord:
    """Reorder a bichromatic word by the exhaustive block-swap procedure.

    The result is a block-shuffle of w with no larger prefix maximum; when
    pmax(w) <= a and every single-color restriction has pmin >= -b, the
    result has at most a/2 + 2b + 1 blocks of each color.
    """
    order = _dealternate_item_order(w.colors, [_VALUE[ch] for ch in w.letters])
    return ColoredWord(tuple(w.letters[i] for i in order), tuple(w.colors[i] for i in order))
