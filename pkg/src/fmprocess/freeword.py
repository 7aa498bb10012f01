"""Words in the free semigroup on the letters ``1..d``.

Words index everything else in the package: time steps of a
Fornasini-Marchesini system, copies of the wandering subspace inside a
dilation, coefficients of a transfer function.  All sums over words are
accumulated in the canonical length-lexicographic order produced by
:func:`enumerate_words`, which keeps floating point results reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, MultiplicityError

__all__ = ["Word", "concat", "enumerate_words", "words_of_length",
           "count_words", "factorizations", "word_product"]


@dataclass(frozen=True, order=False)
class Word:
    """A finite word over ``1..d``; the empty word plays the role of 0."""

    letters: tuple[int, ...]
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise MultiplicityError(f"multiplicity must be positive, got {self.d}")
        letters = tuple(int(k) for k in self.letters)
        for k in letters:
            if not 1 <= k <= self.d:
                raise MultiplicityError(f"letter {k} outside 1..{self.d}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def empty(cls, d):
        return cls((), d)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __add__(self, other):
        return concat(self, other)

    def sort_key(self):
        return (len(self.letters), self.letters)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"Word({list(self.letters)})"

    def to_json(self):
        return list(self.letters)


def concat(alpha: Word, beta: Word) -> Word:
    if alpha.d != beta.d:
        raise MultiplicityError(
            f"cannot concatenate words over {alpha.d} and {beta.d} letters")
    return Word(alpha.letters + beta.letters, alpha.d)


def count_words(d: int, N: int) -> int:
    """Number of words of length at most ``N``."""
    return sum(d ** n for n in range(N + 1))


def words_of_length(d: int, n: int) -> list[Word]:
    return [Word(w, d) for w in itertools.product(range(1, d + 1), repeat=n)]


def enumerate_words(d: int, N: int) -> list[Word]:
    """All words of length ``<= N``, shorter first, lexicographic within a length."""
    if d < 1:
        raise MultiplicityError(f"multiplicity must be positive, got {d}")
    if N < 0:
        return []
    out = []
    for n in range(N + 1):
        out.extend(words_of_length(d, n))
    return out


def factorizations(alpha: Word) -> list[tuple[Word, Word]]:
    """All splittings ``alpha = beta sigma``, by increasing length of ``beta``."""
    n = len(alpha)
    return [(Word(alpha.letters[:i], alpha.d), Word(alpha.letters[i:], alpha.d))
            for i in range(n + 1)]


def word_product(operators, alpha: Word, convention: str = "subscript"):
    """Ordered product of square matrices along a word.

    ``subscript`` gives ``X_{a_1} ... X_{a_n}``; ``superscript`` gives the
    reversed product ``X_{a_n} ... X_{a_1}``.  The empty word gives the
    identity.
    """
    ops = [np.asarray(X) for X in operators]
    if not ops:
        raise DimensionError("empty operator family")
    n = ops[0].shape[0]
    for X in ops:
        if X.ndim != 2 or X.shape != (n, n):
            raise DimensionError("operators must be square and of equal size")
    if len(ops) != alpha.d:
        raise MultiplicityError(
            f"family has {len(ops)} operators but the word is over {alpha.d} letters")
    if convention == "subscript":
        seq = alpha.letters
    elif convention == "superscript":
        seq = alpha.letters[::-1]
    else:
        raise ValueError(f"unknown convention {convention!r}")
    dtype = np.result_type(*ops)
    return reduce(lambda acc, k: acc @ ops[k - 1], seq, np.eye(n, dtype=dtype))
