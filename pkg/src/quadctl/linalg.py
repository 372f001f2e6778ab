"""Fixed-capacity dense linear algebra.

Matrices are plain ``float64`` numpy arrays. The pivoted decompositions
write into a preallocated :class:`Workspace` so that a control loop can
decompose every tick without growing its memory footprint; the
module-level helpers build a throwaway workspace and return copies.

The pivot loop of every decomposition runs exactly ``n*r - r*(r-1)/2``
candidate evaluations for an ``n x n`` input of rank ``r``, independent
of the values involved. The count is reported on the returned factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, RankDeficient, Singular

MAX_DIM = 18
PIVOT_TOL = 1e-10
SINGULAR_TOL = 1e-10


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has non-finite entries")


def pivot_iterations(n: int, r: int) -> int:
    """Number of candidate evaluations the pivot loop performs."""
    return n * r - r * (r - 1) // 2


# ---------------------------------------------------------------------------
# dense kernel


def skew(a) -> np.ndarray:
    """Matrix ``[a x]`` such that ``skew(a) @ b == cross(a, b)``."""
    x, y, z = float(a[0]), float(a[1]), float(a[2])
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def cross(a, b) -> np.ndarray:
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ],
        dtype=float,
    )


def dot(a, b) -> float:
    return float(np.dot(a, b))


def norm(a) -> float:
    return math.sqrt(float(np.dot(a, a)))


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def det3(m: np.ndarray) -> float:
    return float(
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def inv3(m: np.ndarray, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Adjugate inverse of a 3x3 matrix."""
    det = det3(m)
    if abs(det) < tol:
        raise Singular(f"3x3 determinant {det:.3e} below {tol:g}")
    adj = np.array(
        [
            [m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1], m[0, 2] * m[2, 1] - m[0, 1] * m[2, 2], m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]],
            [m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2], m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0], m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2]],
            [m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0], m[0, 1] * m[2, 0] - m[0, 0] * m[2, 1], m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]],
        ]
    )
    return adj / det


def unit_lower_inverse(L: np.ndarray) -> np.ndarray:
    """Inverse of a unit lower-triangular matrix by forward substitution."""
    n = L.shape[0]
    inv = np.zeros((n, n))
    for c in range(n):
        inv[c, c] = 1.0
        for i in range(c + 1, n):
            s = 0.0
            for k in range(c, i):
                s -= L[i, k] * inv[k, c]
            inv[i, c] = s
    return inv


def unit_upper_inverse(U: np.ndarray) -> np.ndarray:
    """Inverse of a unit upper-triangular matrix."""
    return unit_lower_inverse(U.T).T


def diag_inverse(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if np.any(np.abs(d) < SINGULAR_TOL):
        raise Singular("zero on the diagonal")
    return np.diag(1.0 / d)


def forward_substitute(L: np.ndarray, B: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Solve ``L X = B`` in place into ``out`` for unit lower-triangular ``L``."""
    r = L.shape[0]
    for i in range(r):
        out[i] = B[i]
        for k in range(i):
            out[i] -= L[i, k] * out[k]
    return out


# ---------------------------------------------------------------------------
# pivoted decompositions


class Workspace:
    """Preallocated scratch storage for decompositions up to ``capacity``.

    ``lrow[p, j]`` holds the L entry of original row ``p`` in column ``j``
    and ``ucol[j, p]`` the U entry of original column ``p`` in row ``j``.
    """

    def __init__(self, capacity: int = MAX_DIM):
        self.capacity = capacity
        self.lrow = np.zeros((capacity, capacity))
        self.ucol = np.zeros((capacity, capacity))
        self.d = np.zeros(capacity)
        self.cand = np.zeros(capacity)
        self.perm = np.zeros(capacity, dtype=np.intp)
        self.gram = np.zeros((capacity, capacity))
        self.qbuf = np.zeros((capacity, capacity))

    def buffers(self):
        return (self.lrow, self.ucol, self.d, self.cand, self.perm, self.gram, self.qbuf)

    def _fit(self, n: int) -> None:
        if n > self.capacity:
            raise ValueError(f"dimension {n} exceeds workspace capacity {self.capacity}")


def _pivot_loop(S, n: int, r: int, ws: Workspace, symmetric: bool, tol: float) -> int:
    """Run the pivoted elimination on ``S``; returns the iteration count."""
    lrow, ucol, d, cand, perm = ws.lrow, ws.ucol, ws.d, ws.cand, ws.perm
    for i in range(n):
        perm[i] = i
    iterations = 0
    for k in range(r):
        best = k
        best_abs = -1.0
        q = int(perm[k - 1]) if k > 0 else -1
        for pos in range(k, n):
            iterations += 1
            p = int(perm[pos])
            if k > 0:
                j = k - 1
                s = S[p, q]
                for i in range(j):
                    s -= lrow[p, i] * d[i] * ucol[i, q]
                lrow[p, j] = s / d[j]
                if symmetric:
                    ucol[j, p] = lrow[p, j]
                else:
                    s = S[q, p]
                    for i in range(j):
                        s -= lrow[q, i] * d[i] * ucol[i, p]
                    ucol[j, p] = s / d[j]
            s = S[p, p]
            for i in range(k):
                s -= lrow[p, i] * d[i] * ucol[i, p]
            cand[p] = s
            a = abs(s)
            if a > best_abs or (a == best_abs and p < perm[best]):
                best_abs = a
                best = pos
        if best != k:
            perm[k], perm[best] = perm[best], perm[k]
        p = int(perm[k])
        if best_abs < tol:
            raise RankDeficient(f"pivot {k} has magnitude {best_abs:.3e} (expected rank {r})")
        d[k] = cand[p]
        lrow[p, k] = 1.0
        ucol[k, p] = 1.0
    # extension blocks for the rows/columns never chosen as pivots
    if 0 < r < n:
        q = int(perm[r - 1])
        j = r - 1
        for pos in range(r, n):
            p = int(perm[pos])
            s = S[p, q]
            for i in range(j):
                s -= lrow[p, i] * d[i] * ucol[i, q]
            lrow[p, j] = s / d[j]
            if symmetric:
                ucol[j, p] = lrow[p, j]
            else:
                s = S[q, p]
                for i in range(j):
                    s -= lrow[q, i] * d[i] * ucol[i, p]
                ucol[j, p] = s / d[j]
    return iterations


@dataclass
class LduFactors:
    """``S = P L D U P^T`` with ``P[:, k] = e_{perm[k]}``."""

    perm: np.ndarray
    L: np.ndarray
    D: np.ndarray
    U: np.ndarray
    rank: int
    iterations: int

    def permutation_matrix(self) -> np.ndarray:
        n = len(self.perm)
        P = np.zeros((n, n))
        P[self.perm, np.arange(n)] = 1.0
        return P

    def reconstruct(self) -> np.ndarray:
        P = self.permutation_matrix()
        return P @ self.L @ self.D @ self.U @ P.T


def _gather_lu(n: int, r: int, ws: Workspace, with_u: bool):
    perm = ws.perm[:n].copy()
    L = np.zeros((n, r))
    U = np.zeros((r, n)) if with_u else None
    for a in range(n):
        p = perm[a]
        for j in range(min(a + 1, r)):
            L[a, j] = ws.lrow[p, j] if j < a else 1.0
        if with_u:
            for j in range(min(a + 1, r)):
                U[j, a] = ws.ucol[j, p] if j < a else 1.0
    return perm, L, U


def ldu_decompose(S, r_known: int, tol: float = PIVOT_TOL, ws: Workspace | None = None) -> LduFactors:
    """Pivoted LDU of a square matrix whose rank is known to be ``r_known``.

    The pivot at step ``k`` is the remaining index maximising ``|d_k|``;
    ties go to the lowest original index.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("ldu_decompose needs a square matrix")
    if not 0 <= r_known <= n:
        raise ValueError(f"rank {r_known} outside [0, {n}]")
    _check_finite(S, "S")
    ws = ws or Workspace(max(n, 1))
    ws._fit(n)
    iterations = _pivot_loop(S, n, r_known, ws, symmetric=False, tol=tol)
    perm, L, U = _gather_lu(n, r_known, ws, with_u=True)
    return LduFactors(perm, L, np.diag(ws.d[:r_known].copy()), U, r_known, iterations)


def ldlt_decompose(S, r_known: int, tol: float = PIVOT_TOL, ws: Workspace | None = None) -> LduFactors:
    """Symmetric variant of :func:`ldu_decompose`; ``U`` is ``L^T``."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if not 0 <= r_known <= n:
        raise ValueError(f"rank {r_known} outside [0, {n}]")
    _check_finite(S, "S")
    ws = ws or Workspace(max(n, 1))
    ws._fit(n)
    iterations = _pivot_loop(S, n, r_known, ws, symmetric=True, tol=tol)
    perm, L, _ = _gather_lu(n, r_known, ws, with_u=False)
    return LduFactors(perm, L, np.diag(ws.d[:r_known].copy()), L.T.copy(), r_known, iterations)


def inverse(S) -> np.ndarray:
    """Inverse of a nonsingular matrix as ``P U^-1 D^-1 L^-1 P^T``."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    try:
        f = ldu_decompose(S, n)
    except RankDeficient as exc:
        raise Singular(str(exc)) from exc
    P = f.permutation_matrix()
    inner = unit_upper_inverse(f.U) @ np.diag(1.0 / np.diag(f.D)) @ unit_lower_inverse(f.L)
    return P @ inner @ P.T


@dataclass
class ThinLDQ:
    """``X = P L D Q`` with unit lower-triangular ``L`` (m x r), positive
    diagonal ``D`` (r x r) and row-orthonormal ``Q`` (r x n)."""

    perm: np.ndarray
    L: np.ndarray
    D: np.ndarray
    Q: np.ndarray
    rank: int
    iterations: int

    def permutation_matrix(self) -> np.ndarray:
        m = len(self.perm)
        P = np.zeros((m, m))
        P[self.perm, np.arange(m)] = 1.0
        return P

    def PL(self) -> np.ndarray:
        """``P @ L`` without forming ``P``."""
        out = np.empty_like(self.L)
        out[self.perm] = self.L
        return out

    def reconstruct(self) -> np.ndarray:
        return self.PL() @ self.D @ self.Q


def ldq_decompose(X, r_known: int, tol: float = PIVOT_TOL, ws: Workspace | None = None) -> ThinLDQ:
    """Thin LDQ of an ``m x n`` matrix of known rank.

    Runs the pivoted LDLT on ``X X^T`` then recovers the orthonormal rows as
    ``Q = D^-1 L_r^-1 P_r^T X`` using only the first ``r`` pivot rows.
    """
    X = np.asarray(X, dtype=float)
    m, n = X.shape
    if not 0 <= r_known <= min(m, n):
        raise ValueError(f"rank {r_known} outside [0, {min(m, n)}]")
    _check_finite(X, "X")
    ws = ws or Workspace(max(m, n, 1))
    ws._fit(max(m, n))
    gram = ws.gram[:m, :m]
    gram[...] = X @ X.T
    iterations = _pivot_loop(gram, m, r_known, ws, symmetric=True, tol=tol)
    perm, L, _ = _gather_lu(m, r_known, ws, with_u=False)
    r = r_known
    ds = ws.d[:r]
    if np.any(ds <= 0.0):
        raise RankDeficient("non-positive pivot in the Gram matrix")
    dvals = np.sqrt(ds)
    q = ws.qbuf[:r, :n]
    forward_substitute(L[:r, :r], X[perm[:r]], q)
    Q = q / dvals[:, None]
    return ThinLDQ(perm, L, np.diag(dvals), Q, r, iterations)
