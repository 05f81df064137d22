"""Dense floating-point and exact-integer linear algebra kernels.

Integer matrices are handled as nested lists of Python ints so that every
exact routine (determinant, characteristic polynomial, permanent) works with
arbitrary-precision arithmetic. Floating routines accept anything
:func:`numpy.asarray` understands.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "EIGEN_TOL",
    "MAX_PERMANENT_DIM",
    "DimensionTooLarge",
    "sym_eigenvalues",
    "charpoly_exact",
    "det_exact",
    "permanent",
    "permanent_naive",
    "poly_eval",
    "as_int_matrix",
    "format_matrix",
    "parse_matrix",
    "read_matrix",
    "write_matrix",
]

#: Absolute tolerance used by downstream code when comparing eigenvalues.
EIGEN_TOL = 1e-9

MAX_PERMANENT_DIM = 32
_RYSER_MAX_DIM = 24
_ROW_DP_MAX_STATES = 1 << 18

_JACOBI_MAX_SWEEPS = 100
_JACOBI_REL_TOL = 1e-12
# below this size a full rotation matrix product beats sliced row/column updates
_JACOBI_DENSE_MAX = 100


class DimensionTooLarge(ValueError):
    """Raised when a matrix exceeds the size an exact kernel supports."""


def as_int_matrix(m) -> list[list[int]]:
    """Return `m` as a square list-of-lists of Python ints.

    Raises ``ValueError`` for non-square, empty, or non-integral input.
    """
    rows = [list(r) for r in (m.tolist() if isinstance(m, np.ndarray) else m)]
    n = len(rows)
    if n == 0:
        raise ValueError("matrix must have at least one row")
    out = []
    for r in rows:
        if len(r) != n:
            raise ValueError(f"matrix is not square: row of length {len(r)} in {n}x{n}")
        row = []
        for x in r:
            xi = int(x)
            if xi != x:
                raise ValueError(f"non-integer entry {x!r}")
            row.append(xi)
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# symmetric eigenvalues
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: n-1 rounds of disjoint index pairs covering all pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def sym_eigenvalues(m, *, method: str = "jacobi") -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, sorted in descending order.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Symmetric matrix.
    method : {"jacobi", "lapack"}
        ``"jacobi"`` runs cyclic Jacobi rotations (disjoint pairs rotated
        together, round-robin ordering) until the off-diagonal Frobenius norm
        drops below ``1e-12 * ||m||_F``. ``"lapack"`` defers to
        :func:`numpy.linalg.eigvalsh`.

    Returns
    -------
    ndarray of shape (n,)
    """
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    if method == "lapack":
        return np.linalg.eigvalsh(a)[::-1].copy()
    if method != "jacobi":
        raise ValueError(f"unknown method {method!r}")

    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    norm = np.linalg.norm(a)
    threshold = _JACOBI_REL_TOL * norm
    # entries this small cannot affect convergence; rotating them only risks overflow
    negligible = 1e-30 * norm
    rounds = _round_robin(n)
    offdiag = ~np.eye(n, dtype=bool)
    dense = n <= _JACOBI_DENSE_MAX
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.linalg.norm(a[offdiag]))
        if off <= threshold:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > negligible
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            if dense:
                # the pairs of a round are disjoint, so one rotation applies them all
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = -s
                rot[q, p] = s
                a = rot @ a @ rot.T
            else:
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c[:, None] * rp - s[:, None] * rq
                a[q, :] = s[:, None] * rp + c[:, None] * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cp * c - cq * s
                a[:, q] = cp * s + cq * c
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))[::-1].copy()


# ---------------------------------------------------------------------------
# exact integer kernels
# ---------------------------------------------------------------------------


def det_exact(m) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = as_int_matrix(m)
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
            rowi[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def charpoly_exact(m) -> list[int]:
    """Coefficients of ``det(m - x I)``, lowest degree first.

    Uses the Faddeev-LeVerrier recursion over Python integers; the division
    by ``k`` at step ``k`` is always exact for integer input.
    """
    a = np.array(as_int_matrix(m), dtype=object)
    n = a.shape[0]
    # c[k] is the coefficient of x^k in det(xI - m)
    c = [0] * (n + 1)
    c[n] = 1
    mk = np.zeros((n, n), dtype=object)
    ident = np.identity(n, dtype=object) * 1
    for k in range(1, n + 1):
        mk = a.dot(mk) + c[n - k + 1] * ident
        tr = sum(a.dot(mk).diagonal())
        q, r = divmod(-tr, k)
        if r:
            raise ArithmeticError("inexact Faddeev-LeVerrier division")
        c[n - k] = q
    if n % 2:
        c = [-x for x in c]
    return [int(x) for x in c]


def poly_eval(coeffs: Sequence[int], x):
    """Horner evaluation of a lowest-degree-first coefficient list."""
    acc = 0
    for cf in reversed(coeffs):
        acc = acc * x + cf
    return acc


def _ryser_gray(a: list[list[int]]) -> int:
    n = len(a)
    cols = [[a[i][j] for i in range(n)] for j in range(n)]
    sums = [0] * n
    total = 0
    in_set = [False] * n
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        col = cols[j]
        if in_set[j]:
            for i in range(n):
                sums[i] -= col[i]
        else:
            for i in range(n):
                sums[i] += col[i]
        in_set[j] = not in_set[j]
        prod = 1
        for s in sums:
            if s == 0:
                prod = 0
                break
            prod *= s
        if prod:
            size = bin(k ^ (k >> 1)).count("1")
            total += -prod if size % 2 else prod
    return total if n % 2 == 0 else -total


def _ryser_chunked(a: list[list[int]], chunk: int) -> int:
    n = len(a)
    arr = np.array(a, dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64)
    total = 0
    for start in range(1, 1 << n, chunk):
        subsets = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (subsets[:, None] >> shifts) & 1
        row_sums = bits @ arr.T
        prods = np.prod(row_sums, axis=1)
        signs = 1 - 2 * (bits.sum(axis=1) & 1)
        total += int(np.sum(signs * prods))
    return total if n % 2 == 0 else -total


def _row_dp(a: list[list[int]], cap: int) -> int | None:
    """Permanent by expanding rows over sets of used columns; ``None`` past ``cap`` states."""
    counts = {0: 1}
    for row in a:
        cols = [1 << j for j, x in enumerate(row) if x]
        nxt: dict[int, int] = {}
        for used, c in counts.items():
            for b in cols:
                if not used & b:
                    key = used | b
                    nxt[key] = nxt.get(key, 0) + c
        if len(nxt) > cap:
            return None
        counts = nxt
    return sum(counts.values())


def permanent(m) -> int:
    """Exact permanent of a 0-1 matrix.

    Small matrices use Ryser's formula with a Gray-code walk. Larger ones are
    first tried with a row-by-row count over sets of used columns, which is
    fast for sparse structured matrices; if that state space grows too large,
    Ryser's formula is evaluated in vectorised 64-bit chunks (or over Python
    integers when the row-sum products could overflow).
    """
    a = as_int_matrix(m)
    n = len(a)
    if n > MAX_PERMANENT_DIM:
        raise DimensionTooLarge(f"permanent supports n <= {MAX_PERMANENT_DIM}, got {n}")
    if any(x not in (0, 1) for row in a for x in row):
        raise ValueError("permanent expects a 0-1 matrix")
    if n <= 10:
        return _ryser_gray(a)
    value = _row_dp(a, _ROW_DP_MAX_STATES)
    if value is not None:
        return value
    if n > _RYSER_MAX_DIM:
        raise DimensionTooLarge(f"matrix of size {n} is too dense for an exact permanent")
    bound = math.prod(max(1, sum(r)) for r in a)
    chunk = 1 << 14
    if bound * chunk < 2**62:
        return _ryser_chunked(a, chunk)
    return _ryser_gray(a)


def permanent_naive(m) -> int:
    """Permanent as the n!-term sum over permutations (test oracle)."""
    from itertools import permutations

    a = as_int_matrix(m)
    n = len(a)
    return sum(math.prod(a[i][p[i]] for i in range(n)) for p in permutations(range(n)))


# ---------------------------------------------------------------------------
# matrix text format
# ---------------------------------------------------------------------------


def format_matrix(m) -> str:
    a = as_int_matrix(m)
    lines = [str(len(a))] + [" ".join(str(x) for x in row) for row in a]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str | Iterable[str]) -> list[list[int]]:
    """Parse the matrix text format: ``n`` then ``n`` rows of ``n`` integers.

    Errors are raised as ``ValueError`` mentioning the 1-based line number.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    lines = [ln.rstrip("\n") for ln in lines]
    if not lines:
        raise ValueError("line 1: empty input")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValueError(f"line 1: expected dimension, got {lines[0]!r}") from None
    if n < 1:
        raise ValueError("line 1: dimension must be >= 1")
    rows = []
    for i in range(n):
        lineno = i + 2
        if lineno > len(lines):
            raise ValueError(f"line {lineno}: missing matrix row")
        try:
            row = [int(tok) for tok in lines[lineno - 1].split()]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer entry") from None
        if len(row) != n:
            raise ValueError(f"line {lineno}: expected {n} entries, got {len(row)}")
        rows.append(row)
    if any(ln.strip() for ln in lines[n + 1:]):
        raise ValueError(f"line {n + 2}: unexpected trailing content")
    return rows


def read_matrix(path) -> list[list[int]]:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def write_matrix(path, m) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(m))
