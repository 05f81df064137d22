"""Score functions, one per conjecture, plus the 312-pattern matrix helpers.

Every score is "larger is better". Invalid constructions receive a fixed
penalty instead of raising, so the search can always rank its sessions.
When a threshold is given, a score strictly above it marks a counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .encoding import ConstructionSpace
from .graph import (
    Graph,
    diameter,
    distance_laplacian,
    distance_spectrum,
    is_connected,
    is_transmission_regular,
    lambda1,
    matching_number,
    peak_profile,
    prufer_decode,
    proximity,
)
from .linalg import DimensionTooLarge, as_int_matrix, charpoly_exact, permanent

__all__ = [
    "PENALTY",
    "ScoreFn",
    "PROBLEMS",
    "KNOWN_F312",
    "get_score_fn",
    "reward_lambda_mu",
    "reward_proximity_dspec",
    "reward_collins",
    "reward_perm312",
    "reward_cospectral_pair",
    "reward_ones",
    "avoids_312",
    "avoids_312_bruteforce",
    "star_op",
    "circ_op",
    "direct_sum",
    "lambda_mu_threshold",
    "perm312_threshold",
]

PENALTY = -10000.0
MAX_PERM312_DIM = 13

# largest permanents known for 312-avoiding n x n matrices, n = 1..13
KNOWN_F312 = (1, 2, 4, 8, 16, 32, 64, 120, 225, 424, 795, 1484, 2809)


def lambda_mu_threshold(n: int) -> float:
    return -(math.sqrt(n - 1) + 1)


def reward_lambda_mu(g: Graph, *, penalty: float = PENALTY) -> float:
    """``-(lambda_1 + mu)`` for connected graphs on at least 3 vertices."""
    if g.n < 3 or not is_connected(g):
        return penalty
    return -(lambda1(g) + matching_number(g))


def reward_proximity_dspec(g: Graph, *, penalty: float = PENALTY) -> float:
    """``-(pi + d_k)`` with ``k = floor(2D/3)`` counted from the top of the distance spectrum."""
    if g.n < 4 or not is_connected(g):
        return penalty
    diam = diameter(g)
    if diam < 2:
        return penalty
    k = (2 * diam) // 3
    spec = distance_spectrum(g)
    return -(proximity(g) + float(spec[k - 1]))


def reward_collins(code, *, penalty: float = PENALTY) -> float:
    """Peak mismatch ``|p_A/m - (1 - p_D/n)|`` of a tree; accepts a tree or its Pruefer code."""
    try:
        tree = code if isinstance(code, Graph) else prufer_decode(list(code))
        return float(peak_profile(tree).f)
    except ValueError:
        return penalty


def _row_masks(m: Sequence[Sequence[int]]) -> list[int]:
    masks = []
    for row in m:
        mask = 0
        for j, x in enumerate(row):
            if x:
                mask |= 1 << j
        masks.append(mask)
    return masks


def _blocked_by(row: int, seen: int, width: int) -> int:
    """Columns a later row may not use once ``row`` sits below the rows in ``seen``.

    A one at column ``j1`` of ``row`` and a one further right, at ``j3``, in an
    earlier row would complete a 312 with any one strictly between them below.
    """
    out = 0
    for j1 in range(width):
        if row >> j1 & 1:
            right = seen >> (j1 + 1)
            if right:
                j3 = j1 + right.bit_length()
                out |= ((1 << j3) - 1) & ~((1 << (j1 + 1)) - 1)
    return out


def avoids_312(m) -> bool:
    """True iff the 0-1 matrix contains no 312 pattern."""
    rows = as_int_matrix(m)
    width = len(rows[0]) if rows else 0
    seen = forbidden = 0
    for row in _row_masks(rows):
        if row & forbidden:
            return False
        forbidden |= _blocked_by(row, seen, width)
        seen |= row
    return True


def avoids_312_bruteforce(m) -> bool:
    """Reference check by enumeration of all row and column triples."""
    a = as_int_matrix(m)
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    for i1 in range(n_rows):
        for i2 in range(i1 + 1, n_rows):
            for i3 in range(i2 + 1, n_rows):
                for j1 in range(n_cols):
                    if not a[i2][j1]:
                        continue
                    for j2 in range(j1 + 1, n_cols):
                        if not a[i3][j2]:
                            continue
                        for j3 in range(j2 + 1, n_cols):
                            if a[i1][j3]:
                                return False
    return True


def perm312_threshold(n: int) -> float:
    if not 1 <= n <= len(KNOWN_F312):
        raise DimensionTooLarge(f"no record permanent stored for n={n}")
    return KNOWN_F312[n - 1] - 0.5


def reward_perm312(m, *, penalty: float = PENALTY) -> float:
    """Permanent of a 312-avoiding 0-1 matrix, or ``penalty`` if it contains 312."""
    a = as_int_matrix(m)
    if len(a) > MAX_PERM312_DIM:
        raise DimensionTooLarge(f"perm312 reward supports n <= {MAX_PERM312_DIM}, got {len(a)}")
    if any(x not in (0, 1) for row in a for x in row):
        return penalty
    if not avoids_312(a):
        return penalty
    return float(permanent(a))


def direct_sum(a, b) -> list[list[int]]:
    a, b = as_int_matrix(a), as_int_matrix(b)
    na, nb = len(a), len(b)
    out = [row + [0] * nb for row in a]
    out += [[0] * na + row for row in b]
    return out


def _set_ones(m: list[list[int]], cells) -> list[list[int]]:
    n = len(m)
    for i, j in cells:
        if 0 <= i < n and 0 <= j < n:
            m[i][j] = 1
    return m


def star_op(a, b) -> list[list[int]]:
    """``A * B``: direct sum with ones added at the four corner cells of the composition.

    The new ones sit at (last row, first column), at the first column of B's
    first row, and at the first column of B's block in A's last two rows. For
    1 x 1 blocks some of these cells coincide.
    """
    na = len(as_int_matrix(a))
    m = direct_sum(a, b)
    n = len(m)
    return _set_ones(m, [(n - 1, 0), (na, 0), (na - 1, na), (na - 2, na)])


def circ_op(a, b) -> list[list[int]]:
    """``A o B``: direct sum with ones at both ends of the last row of A's block
    (in the bottom row) and at B's first two columns in A's last row."""
    na = len(as_int_matrix(a))
    m = direct_sum(a, b)
    n = len(m)
    return _set_ones(m, [(n - 1, 0), (n - 1, na - 1), (na - 1, na), (na - 1, na + 1)])


def reward_cospectral_pair(pair, *, penalty: float = PENALTY) -> float:
    """Distance to a distance-Laplacian cospectral pair with exactly one transmission-regular graph.

    Exploratory score: ``-sum log(1 + |c_k - c'_k|)`` over characteristic
    polynomial coefficients, with ``penalty`` subtracted when the regularity
    split fails and again when the two labeled graphs coincide.
    """
    g, h = pair
    if not (g.n >= 2 and is_connected(g) and is_connected(h)):
        return penalty
    cg = charpoly_exact(distance_laplacian(g))
    ch = charpoly_exact(distance_laplacian(h))
    score = -sum(math.log1p(abs(x - y)) for x, y in zip(cg, ch))
    if is_transmission_regular(g) == is_transmission_regular(h):
        score += penalty
    if g.edges == h.edges:
        score += penalty
    return score


def reward_ones(word) -> float:
    """Number of ones in a binary word (toy problem for checking the search)."""
    return float(sum(int(x) for x in word))


@dataclass(frozen=True)
class ScoreFn:
    """A reward bound to its construction space."""

    name: str
    space: ConstructionSpace
    evaluate: Callable
    threshold: Optional[float] = None
    penalty: float = PENALTY

    def __call__(self, construction) -> float:
        try:
            value = float(self.evaluate(construction))
        except (ValueError, ArithmeticError):
            return self.penalty
        return value if math.isfinite(value) else self.penalty

    def refutes(self, score: float) -> bool:
        return self.threshold is not None and score > self.threshold


PROBLEMS = ("lambda-mu", "proximity-dspec", "collins", "perm312", "cospectral", "ones")


def get_score_fn(name: str, n: int, *, penalty: float = PENALTY, threshold: Optional[float] = None) -> ScoreFn:
    """Score function registered under ``name`` for size ``n``.

    ``threshold`` overrides the default counterexample bar.
    """
    if name == "lambda-mu":
        space, fn, thr = ConstructionSpace.graph_edges(n), reward_lambda_mu, lambda_mu_threshold(n)
    elif name == "proximity-dspec":
        space, fn, thr = ConstructionSpace.graph_edges(n), reward_proximity_dspec, 0.0
    elif name == "collins":
        space, fn, thr = ConstructionSpace.prufer_tree(n), reward_collins, None
    elif name == "perm312":
        if n > MAX_PERM312_DIM:
            raise DimensionTooLarge(f"perm312 supports n <= {MAX_PERM312_DIM}, got {n}")
        space, fn, thr = ConstructionSpace.binary_matrix(n), reward_perm312, perm312_threshold(n)
    elif name == "cospectral":
        # log1p distances are >= log 2 per mismatched coefficient, so -0.5 means exact agreement
        space, fn, thr = ConstructionSpace.graph_pair(n), reward_cospectral_pair, -0.5
    elif name == "ones":
        space, fn, thr = ConstructionSpace.binary_word(n), reward_ones, n - 0.5
    else:
        raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")

    if fn is reward_ones:
        evaluate = fn
    else:
        def evaluate(obj, _fn=fn):
            return _fn(obj, penalty=penalty)

    return ScoreFn(name, space, evaluate, thr if threshold is None else threshold, penalty)
