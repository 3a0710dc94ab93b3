"""
Small dense linear algebra on top of numpy.

`solve_linear` is generic over number-likes (it is called inside AD passes);
the eigenvalue and orthonormalization routines work on float arrays.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Any, List, Sequence, Tuple

import numpy as np

from .dual import primal
from ..config import EIGEN_MAX_ITERATIONS, PIVOT_THRESHOLD, RANK_THRESHOLD, SYMMETRY_TOL
from ..errors import NoConvergence, RankDeficient, SingularMatrix

logger = logging.getLogger(__name__)


def _rows(A) -> List[List[Any]]:
    if isinstance(A, np.ndarray):
        return A.tolist()
    return [list(row) for row in A]


def _all_plain(values) -> bool:
    return all(isinstance(v, (int, float)) for v in values)


def norm_inf(A) -> float:
    """Max absolute row sum, computed on primal values."""
    rows = _rows(A)
    if not rows:
        return 0.0
    return max(sum(abs(primal(a)) for a in row) for row in rows)


def lu_factor(A) -> Tuple[List[List[Any]], List[int]]:
    """
    Doolittle LU with partial pivoting (pivots chosen on primal magnitudes).

    Returns:
        (packed LU rows, row permutation)

    Raises:
        SingularMatrix: a pivot below PIVOT_THRESHOLD·‖A‖∞
    """
    lu = _rows(A)
    n = len(lu)
    if any(len(row) != n for row in lu):
        raise ValueError("lu_factor needs a square matrix")
    scale = norm_inf(lu)
    threshold = PIVOT_THRESHOLD * scale
    perm = list(range(n))
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(primal(lu[i][k])))
        if abs(primal(lu[p][k])) <= threshold or scale == 0.0:
            raise SingularMatrix(
                f"Pivot {abs(primal(lu[p][k])):.3e} below {threshold:.3e} in column {k}",
                {"column": k, "norm": scale},
            )
        if p != k:
            lu[k], lu[p] = lu[p], lu[k]
            perm[k], perm[p] = perm[p], perm[k]
        pivot = lu[k][k]
        for i in range(k + 1, n):
            if lu[i][k] == 0.0 and not hasattr(lu[i][k], "tag"):
                continue
            factor = lu[i][k] / pivot
            lu[i][k] = factor
            for j in range(k + 1, n):
                lu[i][j] = lu[i][j] - factor * lu[k][j]
    return lu, perm


def lu_solve(factors: Tuple[List[List[Any]], List[int]], b: Sequence[Any]) -> List[Any]:
    lu, perm = factors
    n = len(lu)
    y = [b[perm[i]] for i in range(n)]
    for i in range(n):
        acc = y[i]
        for j in range(i):
            acc = acc - lu[i][j] * y[j]
        y[i] = acc
    for i in reversed(range(n)):
        acc = y[i]
        for j in range(i + 1, n):
            acc = acc - lu[i][j] * y[j]
        y[i] = acc / lu[i][i]
    return y


def solve_linear(A, b):
    """
    Solve A x = b with partial pivoting.

    Args:
        A: n×n matrix (array or nested lists, entries may be duals)
        b: length-n vector

    Returns:
        x as a float array when all inputs are plain floats, else a list

    Raises:
        SingularMatrix: degenerate pivot
    """
    rows = _rows(A)
    rhs = list(b.tolist() if isinstance(b, np.ndarray) else b)
    if len(rows) != len(rhs):
        raise ValueError(f"Dimension mismatch: {len(rows)}x{len(rows)} matrix, vector of {len(rhs)}")
    x = lu_solve(lu_factor(rows), rhs)
    if _all_plain(rhs) and all(_all_plain(r) for r in rows):
        return np.array(x, dtype=float)
    return x


def inverse(A):
    """Matrix inverse via one LU factorization (generic over number-likes)."""
    rows = _rows(A)
    n = len(rows)
    factors = lu_factor(rows)
    columns = [lu_solve(factors, [1.0 if i == j else 0.0 for i in range(n)]) for j in range(n)]
    inv = [[columns[j][i] for j in range(n)] for i in range(n)]
    if all(_all_plain(r) for r in rows):
        return np.array(inv, dtype=float)
    return inv


def scaled_determinant(A) -> float:
    """det(A) after dividing each row by its max-abs entry (primal values)."""
    M = np.array([[primal(a) for a in row] for row in _rows(A)], dtype=float)
    if M.size == 0:
        return 1.0
    row_scale = np.max(np.abs(M), axis=1)
    if np.any(row_scale == 0.0):
        return 0.0
    return float(np.linalg.det(M / row_scale[:, None]))


# eigenvalues

@dataclass(frozen=True)
class ComplexEigenSet:
    """Eigenvalues with multiplicity, sorted by (real, imag)."""

    values: Tuple[complex, ...]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def real_parts(self) -> List[float]:
        return [v.real for v in self.values]

    @property
    def max_real(self) -> float:
        return max(self.real_parts) if self.values else 0.0

    @property
    def max_modulus(self) -> float:
        return max(abs(v) for v in self.values) if self.values else 0.0

    def has_complex(self, tol: float) -> bool:
        return any(abs(v.imag) > tol for v in self.values)

    def to_dict(self):
        return {"real": [v.real for v in self.values], "imag": [v.imag for v in self.values]}


def eigenvalues(A) -> ComplexEigenSet:
    """
    All eigenvalues of a small dense real matrix.

    Symmetric input goes through cyclic Jacobi rotations; everything else is
    balanced, reduced to Hessenberg form and run through shifted QR.

    Raises:
        NoConvergence: iteration budget exhausted
    """
    M = np.array(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("eigenvalues needs finite entries")
    n = M.shape[0]
    if n == 0:
        return ComplexEigenSet(())
    if np.max(np.abs(M - M.T)) < SYMMETRY_TOL:
        values = [complex(v) for v in _jacobi_symmetric(0.5 * (M + M.T))]
    else:
        H = _hessenberg(_balance(M))
        values = _pair_conjugates(_shifted_qr(H.astype(complex)))
    return ComplexEigenSet(tuple(sorted(values, key=lambda z: (z.real, z.imag))))


def _jacobi_symmetric(S: np.ndarray, max_sweeps: int = 100) -> List[float]:
    A = S.copy()
    n = A.shape[0]
    for sweep in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(A, -1) ** 2)))
        if off <= 1e-15 * max(1.0, float(np.max(np.abs(np.diag(A))))):
            return [float(v) for v in np.diag(A)]
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = c
                J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    raise NoConvergence(f"Jacobi rotations did not converge in {max_sweeps} sweeps")


def _balance(M: np.ndarray) -> np.ndarray:
    """Parlett-Reinsch balancing by powers of two."""
    A = M.copy()
    n = A.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = float(np.sum(np.abs(A[:, i])) - abs(A[i, i]))
            r = float(np.sum(np.abs(A[i, :])) - abs(A[i, i]))
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                A[i, :] /= f
                A[:, i] *= f
    return A


def _hessenberg(M: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form."""
    H = M.copy()
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0]) if x[0] != 0.0 else alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _shifted_qr(H: np.ndarray) -> List[complex]:
    """Single-shift complex QR with Wilkinson shifts and deflation."""
    n = H.shape[0]
    eps = np.finfo(float).eps
    values: List[complex] = []
    hi = n - 1
    iterations = 0
    budget = EIGEN_MAX_ITERATIONS
    while hi >= 0:
        if hi == 0:
            values.append(complex(H[0, 0]))
            break
        lo = hi
        while lo > 0:
            sub = abs(H[lo, lo - 1])
            if sub <= eps * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])) or sub < 1e-300:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            values.append(complex(H[hi, hi]))
            hi -= 1
            iterations = 0
            continue
        iterations += 1
        if iterations > budget:
            raise NoConvergence(f"Shifted QR did not converge after {budget} iterations", {"deflated": len(values)})
        a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
        c, d = H[hi, hi - 1], H[hi, hi]
        if iterations % 11 == 0:
            mu = d + abs(c)  # exceptional shift
        else:
            tr = a + d
            disc = cmath.sqrt(0.25 * tr * tr - (a * d - b * c))
            m1, m2 = 0.5 * tr + disc, 0.5 * tr - disc
            mu = m1 if abs(m1 - d) <= abs(m2 - d) else m2
        block = H[lo:hi + 1, lo:hi + 1]
        m = block.shape[0]
        block -= mu * np.eye(m)
        rotations = []
        for k in range(m - 1):
            x, y = block[k, k], block[k + 1, k]
            r = math.hypot(abs(x), abs(y))
            if r == 0.0:
                cs, sn = 1.0, 0.0
            else:
                cs, sn = x / r, y / r
            G = np.array([[np.conj(cs), np.conj(sn)], [-sn, cs]])
            block[k:k + 2, k:] = G @ block[k:k + 2, k:]
            rotations.append(G)
        for k, G in enumerate(rotations):
            block[:k + 2, k:k + 2] = block[:k + 2, k:k + 2] @ G.conj().T
        block += mu * np.eye(m)
        H[lo:hi + 1, lo:hi + 1] = block
    return values


def _pair_conjugates(values: List[complex], tol: float = 1e-9) -> List[complex]:
    """Snap near-real values to the real axis and symmetrize conjugate pairs."""
    scale = max([1.0] + [abs(v) for v in values])
    out: List[complex] = []
    pending = []
    for v in values:
        if abs(v.imag) <= tol * scale:
            out.append(complex(v.real, 0.0))
        else:
            pending.append(v)
    while pending:
        v = pending.pop(0)
        if not pending:
            out.append(v)
            break
        j = min(range(len(pending)), key=lambda k: abs(pending[k] - v.conjugate()))
        w = pending.pop(j)
        re = 0.5 * (v.real + w.real)
        im = 0.5 * (abs(v.imag) + abs(w.imag))
        out.extend([complex(re, im), complex(re, -im)])
    return out


# orthonormalization

def weighted_gram_schmidt(frame, metric) -> Tuple[np.ndarray, np.ndarray]:
    """
    Metric-orthonormalize a frame (modified Gram-Schmidt with one re-orthogonalization pass).

    Args:
        frame: m×N array, one vector per row
        metric: N×N symmetric matrix, positive definite on the frame's span

    Returns:
        (orthonormal frame, log-norms of the diagonal stretching factors)

    Raises:
        RankDeficient: a residual norm below RANK_THRESHOLD relative to its vector
    """
    F = np.array(frame, dtype=float)
    G = np.array(metric, dtype=float)
    if F.ndim == 1:
        F = F[None, :]
    m = F.shape[0]
    out = np.zeros_like(F)
    logs = np.zeros(m)
    for j in range(m):
        v = F[j].copy()
        original = math.sqrt(max(float(v @ G @ v), 0.0))
        for _ in range(2):
            for k in range(j):
                v -= float(out[k] @ G @ v) * out[k]
        sq = float(v @ G @ v)
        norm = math.sqrt(sq) if sq > 0.0 else 0.0
        if norm <= RANK_THRESHOLD * max(original, 1e-300) or norm == 0.0:
            raise RankDeficient(f"Frame vector {j} is dependent on its predecessors", {"index": j, "residual": norm})
        out[j] = v / norm
        logs[j] = math.log(norm)
    return out, logs
