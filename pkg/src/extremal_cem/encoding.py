"""Construction spaces: words over a finite alphabet and the objects they encode.

A construction is generated one letter at a time. The network sees the
partial word as a *letter block* (one bit per position for binary alphabets,
an ``s``-wide one-hot per position otherwise) followed by a one-hot
*position block* marking the letter about to be chosen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph, edge_pairs, prufer_decode

__all__ = [
    "ConstructionSpace",
    "WordComplete",
    "IncompleteWord",
    "encode_state",
    "encode_states",
    "decode",
    "encode_construction",
    "format_word",
    "parse_word",
]

KINDS = ("graph_edges", "prufer_tree", "binary_matrix", "graph_pair", "binary_word")


class WordComplete(ValueError):
    """The partial word already has full length; there is no next letter."""


class IncompleteWord(ValueError):
    pass


@dataclass(frozen=True)
class ConstructionSpace:
    """A family of constructions indexed by words of fixed length.

    ``kind`` is one of ``graph_edges`` (n-vertex graphs, one bit per pair in
    lexicographic order), ``prufer_tree`` (trees via Pruefer codes),
    ``binary_matrix`` (n x n 0-1 matrices, row-major), ``graph_pair`` (two
    concatenated edge words) or ``binary_word`` (the word itself, length n).
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown construction kind {self.kind!r}")
        lo = 2 if self.kind == "prufer_tree" else 1
        if self.n < lo:
            raise ValueError(f"{self.kind} needs n >= {lo}, got {self.n}")

    @classmethod
    def graph_edges(cls, n: int) -> "ConstructionSpace":
        return cls("graph_edges", n)

    @classmethod
    def prufer_tree(cls, n: int) -> "ConstructionSpace":
        return cls("prufer_tree", n)

    @classmethod
    def binary_matrix(cls, n: int) -> "ConstructionSpace":
        return cls("binary_matrix", n)

    @classmethod
    def graph_pair(cls, n: int) -> "ConstructionSpace":
        return cls("graph_pair", n)

    @classmethod
    def binary_word(cls, length: int) -> "ConstructionSpace":
        return cls("binary_word", length)

    @property
    def word_len(self) -> int:
        n = self.n
        return {
            "graph_edges": n * (n - 1) // 2,
            "prufer_tree": n - 2,
            "binary_matrix": n * n,
            "graph_pair": n * (n - 1),
            "binary_word": n,
        }[self.kind]

    @property
    def alphabet_size(self) -> int:
        return self.n if self.kind == "prufer_tree" else 2

    @property
    def letter_width(self) -> int:
        s = self.alphabet_size
        return 1 if s == 2 else s

    @property
    def state_dim(self) -> int:
        return self.word_len * self.letter_width + self.word_len


def encode_state(space: ConstructionSpace, partial: Sequence[int]) -> np.ndarray:
    """Network input for the state after ``partial`` has been generated."""
    L, s = space.word_len, space.alphabet_size
    k = len(partial)
    if k >= L:
        raise WordComplete(f"word of length {k} is already complete (L={L})")
    w = space.letter_width
    state = np.zeros(space.state_dim)
    for pos, letter in enumerate(partial):
        if not 0 <= letter < s:
            raise ValueError(f"letter {letter} outside alphabet of size {s}")
        if s == 2:
            state[pos] = letter
        else:
            state[pos * w + letter] = 1.0
    state[L * w + k] = 1.0
    return state


def encode_states(space: ConstructionSpace, words: np.ndarray, step: int) -> np.ndarray:
    """Batch version of :func:`encode_state` for ``words[:, :step]``."""
    L, s = space.word_len, space.alphabet_size
    if step >= L:
        raise WordComplete(f"step {step} is past the end of the word (L={L})")
    w = space.letter_width
    b = words.shape[0]
    states = np.zeros((b, space.state_dim))
    if step:
        prefix = words[:, :step]
        if s == 2:
            states[:, :step] = prefix
        else:
            rows = np.repeat(np.arange(b), step)
            cols = (np.arange(step) * w + prefix).ravel()
            states[rows, cols] = 1.0
    states[:, L * w + step] = 1.0
    return states


def _edges_from_bits(n: int, bits: Sequence[int]) -> Graph:
    return Graph(n, (pair for pair, b in zip(edge_pairs(n), bits) if b))


def decode(space: ConstructionSpace, word: Sequence[int]):
    """Construction encoded by a complete word."""
    word = [int(x) for x in word]
    L = space.word_len
    if len(word) != L:
        raise IncompleteWord(f"expected a word of length {L}, got {len(word)}")
    s = space.alphabet_size
    if any(not 0 <= x < s for x in word):
        raise ValueError(f"letters must lie in 0..{s - 1}")
    n = space.n
    if space.kind == "graph_edges":
        return _edges_from_bits(n, word)
    if space.kind == "prufer_tree":
        return prufer_decode(word, n)
    if space.kind == "binary_matrix":
        return [word[i * n:(i + 1) * n] for i in range(n)]
    if space.kind == "graph_pair":
        half = L // 2
        return _edges_from_bits(n, word[:half]), _edges_from_bits(n, word[half:])
    return list(word)


def encode_construction(space: ConstructionSpace, obj) -> list[int]:
    """Inverse of :func:`decode` (word for a given construction)."""
    n = space.n
    if space.kind == "graph_edges":
        return [int(p in obj.edges) for p in edge_pairs(n)]
    if space.kind == "prufer_tree":
        from .graph import prufer_encode

        return prufer_encode(obj)
    if space.kind == "binary_matrix":
        return [int(x) for row in obj for x in row]
    if space.kind == "graph_pair":
        g, h = obj
        return [int(p in g.edges) for p in edge_pairs(n)] + [int(p in h.edges) for p in edge_pairs(n)]
    return [int(x) for x in obj]


def format_word(space: ConstructionSpace, word: Sequence[int]) -> str:
    sep = "" if space.alphabet_size == 2 else " "
    return sep.join(str(int(x)) for x in word)


def parse_word(space: ConstructionSpace, text: str) -> list[int]:
    text = text.strip()
    if space.alphabet_size == 2:
        if any(ch not in "01" for ch in text):
            raise ValueError("binary words contain only 0 and 1")
        return [int(ch) for ch in text]
    return [int(tok) for tok in text.split()]
