"""Small dense complex linear algebra with fixed pivoting rules.

Matrices are plain ``numpy`` complex128 arrays of shape (rows, cols) with
both sides at most 25 (the d^2 x d^2 expansion systems for d = 5). Every
public function copies its inputs; nothing is modified in place, so results
can be shared freely between threads.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DimensionError, NotPositiveDefiniteError, SingularMatrixError

MAX_DIM = 25

HERMITIAN_TOL = 1e-9
PIVOT_TOL = 1e-12
JACOBI_TOL = 1e-12
KERNEL_TOL = 1e-8
_JACOBI_MAX_SWEEPS = 100


def as_cmatrix(m, max_dim: int = MAX_DIM, max_rows: int | None = None) -> np.ndarray:
    """Validate and copy ``m`` into a complex128 2-d array."""
    a = np.array(m, dtype=np.complex128, copy=True)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got ndim={a.ndim}")
    rows, cols = a.shape
    row_cap = max_dim if max_rows is None else max_rows
    if not (1 <= rows <= row_cap and 1 <= cols <= max_dim):
        raise DimensionError(f"matrix shape {a.shape} outside bounds")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix has non-finite entries")
    return a


def _square(m) -> np.ndarray:
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got {a.shape}")
    return a


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def matrix_product(x, y) -> np.ndarray:
    a, b = as_cmatrix(x), as_cmatrix(y)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_add(x, y) -> np.ndarray:
    a, b = as_cmatrix(x), as_cmatrix(y)
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def scale(c: complex, m) -> np.ndarray:
    return complex(c) * as_cmatrix(m)


def trace(m) -> complex:
    return complex(np.trace(_square(m)))


def adjoint(m) -> np.ndarray:
    return as_cmatrix(m).conj().T


def fro_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), "fro"))


def mat_power(m, k: int) -> np.ndarray:
    a = _square(m)
    out = identity(a.shape[0])
    for _ in range(k):
        out = out @ a
    return out


def solve(m, rhs) -> np.ndarray:
    """Solve ``m @ x = rhs`` by Gaussian elimination with partial pivoting.

    The pivot is the entry of maximal modulus in the current column; ties go
    to the lowest row index. Raises ``SingularMatrixError`` when the pivot
    modulus drops below ``1e-12 * ||m||_F``.
    """
    a = _square(m)
    b = as_cmatrix(rhs)
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    tol = PIVOT_TOL * fro_norm(a)
    for col in range(n):
        # np.argmax returns the first maximum, i.e. the lowest row on ties
        p = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[p, col]) < tol or a[p, col] == 0:
            raise SingularMatrixError(f"pivot {abs(a[p, col]):.3e} in column {col} below {tol:.3e}")
        if p != col:
            a[[col, p]] = a[[p, col]]
            b[[col, p]] = b[[p, col]]
        factors = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= np.outer(factors, a[col, col:])
        b[col + 1:] -= np.outer(factors, b[col])
    x = np.zeros_like(b)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


def invert(m) -> np.ndarray:
    a = _square(m)
    return solve(a, identity(a.shape[0]))


def symmetrize(h) -> np.ndarray:
    """Return (h + h*)/2 after checking h is Hermitian within tolerance."""
    a = _square(h)
    scale_ = fro_norm(a)
    if fro_norm(a - a.conj().T) > HERMITIAN_TOL * scale_:
        raise ContractError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def _jacobi_real_symmetric(s: np.ndarray, tol: float) -> np.ndarray:
    """Cyclic Jacobi eigenvalues of a real symmetric matrix."""
    a = s.copy()
    n = a.shape[0]
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - sn * aq
                a[q, :] = sn * ap + c * aq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.diag(a).copy()


def hermitian_spectrum(h) -> list[float]:
    """Ascending eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    The complex n x n problem is embedded as the real symmetric 2n x 2n
    matrix [[Re h, -Im h], [Im h, Re h]], whose spectrum is that of ``h``
    with every eigenvalue doubled.
    """
    a = symmetrize(h)
    n = a.shape[0]
    norm = fro_norm(a)
    if norm == 0.0:
        return [0.0] * n
    re, im = a.real, a.imag
    big = np.block([[re, -im], [im, re]])
    ev = np.sort(_jacobi_real_symmetric(big, JACOBI_TOL * norm))
    return [float(x) for x in ev[::2]]


def signature(h, rel_tol: float = 1e-10) -> tuple[int, int]:
    """(n_plus, n_minus) of a Hermitian matrix; near-zero eigenvalues count in neither."""
    ev = np.asarray(hermitian_spectrum(h))
    cut = rel_tol * max(float(np.max(np.abs(ev))), 1e-300)
    return int(np.sum(ev > cut)), int(np.sum(ev < -cut))


def cholesky(h) -> np.ndarray:
    """Lower-triangular L with positive real diagonal and L L* = h."""
    a = symmetrize(h)
    n = a.shape[0]
    tol = PIVOT_TOL * fro_norm(a)
    L = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j].real - float(np.sum(np.abs(L[j, :j]) ** 2))
        if pivot <= tol:
            raise NotPositiveDefiniteError(f"pivot {pivot:.3e} at index {j}")
        L[j, j] = np.sqrt(pivot)
        for i in range(j + 1, n):
            L[i, j] = (a[i, j] - L[i, :j] @ L[j, :j].conj()) / L[j, j]
    return L


def nullspace(k) -> list[np.ndarray]:
    """Orthonormal basis (as column vectors) of the numerical kernel of ``k``.

    Directions with singular value at most ``1e-8`` times the largest one are
    treated as kernel directions. Tall systems (up to 100 rows) are accepted
    since the invariant-form equations stack several d x d blocks.
    """
    a = as_cmatrix(k, max_rows=4 * MAX_DIM)
    n = a.shape[1]
    _, sv, vh = np.linalg.svd(a)
    smax = float(sv[0]) if sv.size else 0.0
    rank = int(np.sum(sv > KERNEL_TOL * smax)) if smax > 0 else 0
    basis = vh[rank:].conj()
    return [basis[i].reshape(n, 1) for i in range(basis.shape[0])]


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)


def offdiagonal_scaling(m, sweeps: int = 20) -> np.ndarray:
    """Vector f with diag(f) m diag(f)^-1 having equal off-diagonal row and column norms."""
    m = np.array(m, dtype=np.complex128)
    n = m.shape[0]
    scale = np.ones(n)
    for _ in range(sweeps):
        done = True
        for i in range(n):
            mask = np.arange(n) != i
            c = np.linalg.norm(m[mask, i])
            r = np.linalg.norm(m[i, mask])
            if c == 0 or r == 0:
                continue
            f = np.sqrt(c / r)
            if abs(f - 1) > 1e-3:
                done = False
            m[i, :] *= f
            m[:, i] /= f
            scale[i] *= f
        if done:
            break
    return scale
