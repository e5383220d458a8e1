"""Reduced words in adjacent transpositions.

Permutations are one-line tuples over 1..n.  ``T_i`` swaps the entries in
positions i and i+1 (1-based).  A word ``(i_1, ..., i_k)`` encodes
``sigma = T_{i_k} ... T_{i_1}``: apply ``T_{i_1}`` to the identity first.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

Perm = tuple[int, ...]


def identity_perm(n: int) -> Perm:
    return tuple(range(1, n + 1))


def swap(p: Sequence[int], i: int) -> Perm:
    """T_i applied to ``p``."""
    q = list(p)
    q[i - 1], q[i] = q[i], q[i - 1]
    return tuple(q)


def apply_word(word: Sequence[int], n: int) -> Perm:
    p = identity_perm(n)
    for i in word:
        p = swap(p, i)
    return p


def inversions(p: Sequence[int]) -> int:
    return sum(1 for a in range(len(p)) for b in range(a + 1, len(p)) if p[a] > p[b])


@dataclass(frozen=True)
class ReducedWord:
    permutation: Perm
    word: tuple[int, ...]

    def __post_init__(self):
        if apply_word(self.word, len(self.permutation)) != tuple(self.permutation):
            raise ValueError(f"word {self.word} does not produce {self.permutation}")
        if len(self.word) != inversions(self.permutation):
            raise ValueError(f"word {self.word} is not reduced")


def canonical_word(p: Sequence[int]) -> tuple[int, ...]:
    # bubble-sort p to the identity; the swaps, reversed, build p from the identity
    q = list(p)
    swaps = []
    n = len(q)
    for end in range(n - 1, 0, -1):
        for i in range(end):
            if q[i] > q[i + 1]:
                q[i], q[i + 1] = q[i + 1], q[i]
                swaps.append(i + 1)
    return tuple(reversed(swaps))


def _moves(word: tuple[int, ...]):
    """Words one commutation or braid move away from ``word``."""
    for k in range(len(word) - 1):
        a, b = word[k], word[k + 1]
        if abs(a - b) >= 2:
            yield word[:k] + (b, a) + word[k + 2:]
    for k in range(len(word) - 2):
        a, b, c = word[k:k + 3]
        if a == c and abs(a - b) == 1:
            yield word[:k] + (b, a, b) + word[k + 3:]


def reduced_words(p: Sequence[int], count: int = 2) -> list[ReducedWord]:
    """The canonical reduced word, plus (if ``count>=2``) one that differs from it.

    A reduced word admitting no commutation or braid move is the only reduced
    word of its permutation, in which case a single word is returned.
    """
    if len(p) > 6:
        raise ValueError("n > 6 is not supported")
    p = tuple(p)
    w = canonical_word(p)
    out = [ReducedWord(p, w)]
    if count >= 2:
        for other in _moves(w):
            if other != w:
                out.append(ReducedWord(p, other))
                break
    return out


def all_perms(n: int) -> list[Perm]:
    return list(permutations(range(1, n + 1)))
