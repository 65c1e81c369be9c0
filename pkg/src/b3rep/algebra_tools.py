"""Projectors, the mu table, the involution and the invariant Hermitian form.

Everything here works on a concrete pair (A, B) (a ``RepPair`` or any object
with ``A`` and ``B`` attributes) and its ``Spectrum``. The invariant form on
the left ideal generated by e_{B,1} is transported to V through
x e_{B,1} -> x w, where w spans the image of e_{B,1}, so it becomes an
ordinary Hermitian matrix H with A* H A = H and B* H B = H.

Tolerances scale with the size of the objects involved: for clustered
eigenvalues the projectors e_{B,i} have norm of order |mu|, and fixed
absolute thresholds would reject perfectly good representations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg_core as la
from .errors import (
    AlgebraInconsistencyError,
    DegenerateProjectorError,
    NotPositiveDefiniteError,
    NotSimpleError,
    OracleDegeneracyError,
    SpectrumMismatchError,
)
from .spectra import Spectrum

IDEMPOTENT_TOL = 1e-8
SANDWICH_TOL = 1e-8
EXPANSION_TOL = 1e-8
INVARIANCE_TOL = 1e-8
UNITARY_TOL = 1e-8
RANK_TOL = 1e-8
T_COND_LIMIT = 1e10
W_MIN_NORM = 1e-6


def _scaled(tol: float, *norms: float) -> float:
    return tol * max([1.0, *norms])


# -- projectors and mu ----------------------------------------------------------

def eigenprojection(m, s: Spectrum, i: int) -> np.ndarray:
    """Lagrange product prod_{j != i} (m - lambda_j) / (lambda_i - lambda_j), 1-based i."""
    m = la.as_cmatrix(m)
    lam = s.lambdas
    i0 = i - 1
    e = np.eye(s.d, dtype=np.complex128)
    for j in range(s.d):
        if j != i0:
            e = e @ (m - lam[j] * np.eye(s.d)) / (lam[i0] - lam[j])
    n = la.fro_norm(e)
    res = la.fro_norm(e @ e - e)
    if res > _scaled(IDEMPOTENT_TOL, n * n):
        raise SpectrumMismatchError(f"e_{i} is not idempotent (residual {res:.3e})")
    return e


@dataclass(frozen=True)
class ProjectorSet:
    e_A: tuple[np.ndarray, ...]
    e_B: tuple[np.ndarray, ...]

    def check(self) -> dict[str, float]:
        """Largest idempotence, orthogonality and completeness residuals per family."""
        out = {}
        for name, fam in (("A", self.e_A), ("B", self.e_B)):
            d = len(fam)
            scale = max(1.0, max(la.fro_norm(e) for e in fam) ** 2)
            idem = max(la.fro_norm(e @ e - e) for e in fam)
            orth = max(
                (la.fro_norm(fam[i] @ fam[j]) for i in range(d) for j in range(d) if i != j),
                default=0.0,
            )
            comp = la.fro_norm(sum(fam) - np.eye(d))
            out[f"{name}_idempotence"] = idem / scale
            out[f"{name}_orthogonality"] = orth / scale
            out[f"{name}_completeness"] = comp / scale
            out[f"{name}_rank_one"] = float(max(_numerical_rank(e) for e in fam))
        return out


def _numerical_rank(m) -> int:
    sv = la.singular_values(m)
    return int(np.sum(sv > RANK_TOL * sv[0])) if sv[0] > 0 else 0


def projector_set(r, s: Spectrum) -> ProjectorSet:
    e_A = tuple(eigenprojection(r.A, s, i) for i in range(1, s.d + 1))
    e_B = tuple(eigenprojection(r.B, s, i) for i in range(1, s.d + 1))
    return ProjectorSet(e_A, e_B)


def _mu_from(e_Bi: np.ndarray, e_Aj: np.ndarray, label: str) -> float:
    mu = complex(np.trace(e_Bi @ e_Aj))
    sandwich = e_Bi @ e_Aj @ e_Bi - mu * e_Bi
    size = la.fro_norm(e_Bi) ** 2 * la.fro_norm(e_Aj)
    res = la.fro_norm(sandwich)
    if res > _scaled(SANDWICH_TOL, size):
        raise AlgebraInconsistencyError(f"{label}: e_B e_A e_B - mu e_B has norm {res:.3e}")
    if abs(mu.imag) > _scaled(SANDWICH_TOL, abs(mu)):
        raise AlgebraInconsistencyError(f"{label}: imaginary part {mu.imag:.3e}")
    return mu.real


def mu_numeric(r, s: Spectrum, i: int, j: int) -> float:
    """mu_ij = trace(e_{B,i} e_{A,j}), checked against the defining sandwich identity."""
    return _mu_from(eigenprojection(r.B, s, i), eigenprojection(r.A, s, j), f"mu_{i}{j}")


def mu_numeric_table(r, s: Spectrum) -> np.ndarray:
    ps = projector_set(r, s)
    d = s.d
    return np.array(
        [[_mu_from(ps.e_B[i], ps.e_A[j], f"mu_{i + 1}{j + 1}") for j in range(d)] for i in range(d)]
    )


def mu_numeric_row(r, s: Spectrum) -> list[float]:
    e_B1 = eigenprojection(r.B, s, 1)
    return [_mu_from(e_B1, eigenprojection(r.A, s, j), f"mu_1{j}") for j in range(2, s.d + 1)]


# -- basis S and the involution -----------------------------------------------------

def _basis_S_elements(A, B, s: Spectrum):
    e_A = [eigenprojection(A, s, i) for i in range(1, s.d + 1)]
    e_B1 = eigenprojection(B, s, 1)
    labels = [(i, i) for i in range(s.d)]
    mats = list(e_A)
    for i in range(s.d):
        for j in range(s.d):
            if i != j:
                labels.append((i, j))
                mats.append(e_A[i] @ e_B1 @ e_A[j])
    return labels, mats


def _stack(mats) -> np.ndarray:
    return np.column_stack([m.reshape(-1) for m in mats])


def eigenframe(A, B, s: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """Change of basis P (and P^-1) to unit eigenvectors of A, diagonally balanced for B.

    Statements about the algebra generated by A and B do not depend on
    coordinates, but their conditioning does: for clustered eigenvalues the
    projectors e_{A,i} of a non-normal A are large and nearly cancel. In this
    frame they are the coordinate projections E_ii, and e_{A,i} e_{B,1} e_{A,j}
    is a multiple of E_ij.
    """
    A, B = np.asarray(A, dtype=np.complex128), np.asarray(B, dtype=np.complex128)
    cols = []
    for i in range(1, s.d + 1):
        e = eigenprojection(A, s, i)
        norms = np.linalg.norm(e, axis=0)
        k = int(np.argmax(norms))
        if norms[k] == 0:
            raise DegenerateProjectorError(f"eigenprojection e_(A,{i}) vanishes")
        cols.append(e[:, k] / norms[k])
    V = np.column_stack(cols)
    Vinv = la.invert(V)
    f = la.offdiagonal_scaling(Vinv @ B @ V)
    return V / f[None, :], f[:, None] * Vinv


def frame_pair(A, B, s: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """(diag(lambda), P^-1 B P) for the eigenframe P.

    P^-1 A P is diag(lambda) up to rounding, which the Lagrange products for
    e_{A,i} would amplify, so the exact diagonal is used.
    """
    P, Pinv = eigenframe(A, B, s)
    return np.diag(s.lambdas), Pinv @ np.asarray(B) @ P


def basis_S_rank(A, B, s: Spectrum) -> tuple[int, float]:
    """Numerical rank of basis S stacked as vectors, and its singular value ratio.

    Measured in the eigenframe, where the stack is diagonal up to ordering
    with entries 1 and |(e_{B,1})_ij|; the ratio is the relative distance
    to a reducible pair.
    """
    _, mats = _basis_S_elements(*frame_pair(A, B, s), s)
    sv = la.singular_values(_stack(mats))
    ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    return int(np.sum(sv > RANK_TOL * sv[0])), ratio


@dataclass(frozen=True)
class BasisS:
    labels: tuple[tuple[int, int], ...]
    elements: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, k):
        return self.elements[k]


def basis_S(r, s: Spectrum) -> BasisS:
    """The d^2 elements e_{A,i} (first) and e_{A,i} e_{B,1} e_{A,j}, i != j, lexicographic."""
    labels, mats = _basis_S_elements(r.A, r.B, s)
    rank, _ = basis_S_rank(r.A, r.B, s)
    if rank != s.d * s.d:
        raise NotSimpleError(f"basis S has rank {rank} < {s.d * s.d}; the pair is not simple")
    return BasisS(tuple(labels), tuple(mats))


def expand_in_S(x, basis: BasisS) -> np.ndarray:
    x = la.as_cmatrix(x)
    M = _stack(basis.elements)
    # equilibrate columns: for clustered spectra the elements differ in size by orders of magnitude
    norms = np.linalg.norm(M, axis=0)
    coeffs = la.solve(M / norms, x.reshape(-1, 1))[:, 0] / norms
    res = float(np.linalg.norm(M @ coeffs - x.reshape(-1)))
    if res > _scaled(EXPANSION_TOL, la.fro_norm(x)):
        raise AlgebraInconsistencyError(f"expansion in basis S leaves residual {res:.3e}")
    return coeffs


def involution_apply(x, basis: BasisS) -> np.ndarray:
    """Antilinear map fixing each e_{A,i} and sending e_{A,i}e_{B,1}e_{A,j} to e_{A,j}e_{B,1}e_{A,i}."""
    coeffs = expand_in_S(x, basis)
    where = {lab: k for k, lab in enumerate(basis.labels)}
    out = np.zeros_like(basis.elements[0])
    for k, (i, j) in enumerate(basis.labels):
        out = out + np.conj(coeffs[k]) * basis.elements[where[(j, i)]]
    return out


# -- basis T and the invariant form --------------------------------------------------

def _generic_vectors(d: int):
    for k in range(d):
        g = np.zeros(d, dtype=np.complex128)
        g[k] = 1.0
        yield g
    yield np.ones(d, dtype=np.complex128)


def eigenvector_w(r, s: Spectrum) -> np.ndarray:
    """Unit eigenvector of B for lambda_1, as e_{B,1} g for the first usable g."""
    e_B1 = eigenprojection(r.B, s, 1)
    for g in _generic_vectors(s.d):
        w = e_B1 @ g
        n = np.linalg.norm(w)
        if n > W_MIN_NORM:
            return w / n
    raise DegenerateProjectorError("e_{B,1} annihilates every candidate vector")


def basis_T_vectors(r, s: Spectrum) -> np.ndarray:
    """Columns ABA w, e_{A,2} w, ..., e_{A,d} w."""
    A, B = np.asarray(r.A), np.asarray(r.B)
    rank, _ = basis_S_rank(A, B, s)
    if rank != s.d * s.d:
        raise NotSimpleError(f"basis S has rank {rank} < {s.d * s.d}; the pair is not simple")
    w = eigenvector_w(r, s)
    cols = [A @ B @ A @ w]
    for i in range(2, s.d + 1):
        cols.append(eigenprojection(A, s, i) @ w)
    V = np.column_stack(cols)
    sv = la.singular_values(V)
    if sv[-1] == 0 or sv[0] / sv[-1] > T_COND_LIMIT:
        raise NotSimpleError("basis T vectors are numerically dependent")
    v1 = cols[0]
    res = np.linalg.norm(A @ v1 - s.lambdas[0] * v1)
    if res > _scaled(IDEMPOTENT_TOL, np.linalg.norm(v1)):
        raise AlgebraInconsistencyError(f"ABA w is not a lambda_1 eigenvector of A ({res:.3e})")
    return V


@dataclass(frozen=True)
class GramForm:
    H: np.ndarray
    T_vectors: np.ndarray
    gram_diagonal: tuple[float, ...]
    signature: tuple[int, int]
    invariance_residual: float

    @property
    def definite(self) -> bool:
        return self.signature == (self.H.shape[0], 0)


def invariance_residual(H, A, B) -> float:
    A, B, H = np.asarray(A), np.asarray(B), np.asarray(H)
    return max(la.fro_norm(A.conj().T @ H @ A - H), la.fro_norm(B.conj().T @ H @ B - H)) / la.fro_norm(H)


def gram_form(r, s: Spectrum) -> GramForm:
    """H = (V*)^-1 diag(1, mu_12, ..., mu_1d) V^-1 for V the basis T columns."""
    V = basis_T_vectors(r, s)
    diag = [1.0] + mu_numeric_row(r, s)
    Vinv = la.invert(V)
    H = Vinv.conj().T @ np.diag(diag) @ Vinv
    H = 0.5 * (H + H.conj().T)
    res = invariance_residual(H, r.A, r.B)
    if res > INVARIANCE_TOL:
        raise AlgebraInconsistencyError(f"form is not invariant (relative residual {res:.3e})")
    return GramForm(H, V, tuple(diag), la.signature(H), res)


def _hermitian_basis(d: int) -> list[np.ndarray]:
    out = []
    for i in range(d):
        m = np.zeros((d, d), dtype=np.complex128)
        m[i, i] = 1.0
        out.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=np.complex128)
            m[i, j] = m[j, i] = 1.0
            out.append(m)
            m = np.zeros((d, d), dtype=np.complex128)
            m[i, j], m[j, i] = 1j, -1j
            out.append(m)
    return out


def _hermitian_coords(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    iu = np.triu_indices(d, 1)
    return np.concatenate([np.diag(h).real, h[iu].real, h[iu].imag])


def invariant_form_oracle(r) -> np.ndarray:
    """Hermitian H with A*HA = H and B*HB = H, found as the kernel of a real linear system.

    Independent of the mu machinery: it only uses the matrices. The kernel
    must be one-dimensional; the representative is scaled so its eigenvalue
    of largest modulus is +1.
    """
    A, B = np.asarray(r.A), np.asarray(r.B)
    d = A.shape[0]
    basis = _hermitian_basis(d)
    cols = []
    for h in basis:
        cols.append(np.concatenate([
            _hermitian_coords(A.conj().T @ h @ A - h),
            _hermitian_coords(B.conj().T @ h @ B - h),
        ]))
    K = np.column_stack(cols)
    kernel = la.nullspace(K)
    if len(kernel) != 1:
        raise OracleDegeneracyError(f"space of invariant Hermitian forms has dimension {len(kernel)}")
    v = kernel[0][:, 0]
    # K is real, so the kernel vector is real up to a global phase
    coeffs = (v / v[np.argmax(np.abs(v))]).real
    H = sum(c * h for c, h in zip(coeffs, basis))
    H = 0.5 * (H + H.conj().T)
    ev = la.hermitian_spectrum(H)
    top = ev[-1] if abs(ev[-1]) >= abs(ev[0]) else ev[0]
    return H / top


def oracle_is_definite(H, rel_tol: float = 1e-10) -> bool:
    return la.signature(H, rel_tol) == (np.asarray(H).shape[0], 0)


def unitarize(r, g: GramForm) -> tuple[np.ndarray, np.ndarray]:
    """Conjugate (A, B) by L* where H = L L*; the results are unitary."""
    try:
        L = la.cholesky(g.H)
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(f"invariant form has signature {g.signature}: {exc}") from None
    Lh = L.conj().T
    Lh_inv = la.invert(Lh)
    U_A = Lh @ np.asarray(r.A) @ Lh_inv
    U_B = Lh @ np.asarray(r.B) @ Lh_inv
    d = U_A.shape[0]
    for name, U in (("U_A", U_A), ("U_B", U_B)):
        res = la.fro_norm(U.conj().T @ U - np.eye(d))
        if res > UNITARY_TOL:
            raise AlgebraInconsistencyError(f"{name} unitarity residual {res:.3e}")
    return U_A, U_B


def random_algebra_element(basis: BasisS, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return sum(ci * e for ci, e in zip(c, basis.elements)) / len(basis)


def involution_residuals(r, s: Spectrum, rng: np.random.Generator = None, samples: int = 3) -> dict[str, float]:
    """Residuals of the involution laws, relative to the size of the elements involved."""
    rng = np.random.default_rng(0) if rng is None else rng
    basis = basis_S(r, s)
    A, B = np.asarray(r.A), np.asarray(r.B)

    def rel(x, y):
        return la.fro_norm(x - y) / max(1.0, la.fro_norm(y))

    out = {
        "iota(A) = A^-1": rel(involution_apply(A, basis), la.invert(A)),
        "iota(B) = B^-1": rel(involution_apply(B, basis), la.invert(B)),
        "iota(e_B1) = e_B1": rel(involution_apply(eigenprojection(B, s, 1), basis), eigenprojection(B, s, 1)),
    }
    anti, square = 0.0, 0.0
    for _ in range(samples):
        X = random_algebra_element(basis, rng)
        Y = random_algebra_element(basis, rng)
        iX, iY = involution_apply(X, basis), involution_apply(Y, basis)
        anti = max(anti, rel(involution_apply(X @ Y, basis), iY @ iX))
        square = max(square, rel(involution_apply(iX, basis), X))
    out["iota(XY) = iota(Y) iota(X)"] = anti
    out["iota^2 = id"] = square
    return out
