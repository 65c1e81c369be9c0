"""Numerical reconstruction of simple B3 representations with a given spectrum.

A representation is a pair (A, B) of invertible d x d matrices with
ABA = BAB. Up to isomorphism it is pinned down by the eigenvalues for
d <= 3, and by the eigenvalues together with the central scalar delta,
(AB)^3 = delta * I, for d = 4, 5.

Solving for B against A = diag(lambda) from a random start is badly
conditioned: B = A is a reducible local minimum of the residual, and the
diagonal-conjugation gauge leaves a continuum of solutions. So every
restart of ``build_newton`` first solves a gauge-fixed triangular normal
form (A upper triangular, B lower triangular with the eigenvalues in
reverse order) for one ordering of the eigenvalues, either directly or by
continuation from a random reference spectrum. It then changes basis so A
is diagonal and polishes B with Newton on the full residual system.

With A diagonal the entries of B grow like the square roots of the mu
values, which costs several digits in the absolute invariants. By default
the pair is therefore moved to the conjugate with least Frobenius norm
and polished once more; ``gauge="diagonal"`` keeps A = diag(lambda).
Finally A and B are refined together with the residual evaluated in
extended precision, so the returned pair is exact up to the final rounding.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from . import linalg_core as la
from .errors import (
    B3RepError,
    BranchAmbiguityError,
    ConstructionFailed,
    ContractError,
    NonCentralError,
    NotSimpleError,
    ReconstructionFailed,
)
from .spectra import Spectrum, is_simple, mu_closed_complex, n_branches, spectrum_from_angles

log = logging.getLogger(__name__)

BRAID_TOL = 1e-9
SPECTRUM_TOL = 1e-8
CENTRAL_TOL = 1e-9
DELTA_TARGET_TOL = 1e-9
NEWTON_TOL = 1e-11
BRANCH_MATCH_TOL = 1e-7
RANK_TOL = 1e-8

FD_STEP = 1e-7
MAX_HALVINGS = 30
MAX_RESTARTS = 50
_TRI_MAXIT = 100
_POLISH_MAXIT = 30
_REFINE_STEPS = 3
_EXTENDED_DPS = 40
_EXTENDED_STEPS = 3
_HOMOTOPY_STEPS = 20
_HOMOTOPY_CORRECTOR_IT = 8
_HOMOTOPY_MIN_STEP = 1e-4
_HOMOTOPY_BUMP = 0.3


@dataclass(frozen=True)
class RepPair:
    A: np.ndarray
    B: np.ndarray
    delta: complex
    braid_residual: float
    spectrum_residual: float
    central_residual: float = 0.0
    seed: Optional[int] = None
    restart: Optional[int] = None

    @property
    def d(self) -> int:
        return self.A.shape[0]


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


def braid_residual(A, B) -> float:
    return la.fro_norm(A @ B @ A - B @ A @ B)


def spectrum_residual(m, lambdas) -> float:
    """Largest distance between an eigenvalue of ``m`` and the nearest target (both ways)."""
    ev = np.linalg.eigvals(np.asarray(m))
    lam = np.asarray(lambdas)
    dist = np.abs(ev[:, None] - lam[None, :])
    return float(max(dist.min(axis=0).max(), dist.min(axis=1).max()))


def _cube(A, B) -> np.ndarray:
    ab = A @ B
    return ab @ ab @ ab


def extract_delta(r: RepPair) -> complex:
    """Central scalar delta with (AB)^3 = delta I."""
    c = _cube(r.A, r.B)
    delta = complex(np.trace(c)) / r.d
    res = la.fro_norm(c - delta * np.eye(r.d))
    if res > CENTRAL_TOL:
        raise NonCentralError(f"(AB)^3 differs from a scalar by {res:.3e}")
    return delta


def make_rep(A, B, s: Spectrum, *, seed=None, restart=None) -> RepPair:
    """Wrap (A, B) after checking the braid relation, spectra and centrality."""
    A, B = la.as_cmatrix(A), la.as_cmatrix(B)
    c = _cube(A, B)
    delta = complex(np.trace(c)) / s.d
    br = braid_residual(A, B)
    sr = max(spectrum_residual(A, s.lambdas), spectrum_residual(B, s.lambdas))
    cr = la.fro_norm(c - delta * np.eye(s.d))
    problems = []
    if br > BRAID_TOL:
        problems.append(f"braid residual {br:.3e}")
    if sr > SPECTRUM_TOL:
        problems.append(f"spectrum residual {sr:.3e}")
    if cr > CENTRAL_TOL:
        problems.append(f"(AB)^3 not scalar: {cr:.3e}")
    if abs(abs(delta) - 1.0) > CENTRAL_TOL:
        problems.append(f"|delta| = {abs(delta):.12f}")
    if problems:
        raise ConstructionFailed("; ".join(problems))
    return RepPair(_frozen(A), _frozen(B), delta, br, sr, cr, seed, restart)


def build_d2(s: Spectrum) -> RepPair:
    if s.d != 2:
        raise ContractError("build_d2 needs d = 2")
    if not is_simple(s):
        raise NotSimpleError("spectrum does not admit a simple representation")
    l1, l2 = s.lambdas
    A = np.array([[l1, l1], [0, l2]])
    B = np.array([[l2, 0], [-l2, l1]])
    return make_rep(A, B, s)


# -- delta candidates -----------------------------------------------------------

def delta_roots(s: Spectrum) -> list[complex]:
    """All delta with delta^d = (lambda_1...lambda_d)^6, indexed by root number k."""
    total = math.fsum(s.angles)
    return [complex(np.exp(2j * np.pi * (6 * total + k) / s.d)) for k in range(s.d)]


def delta_for_branch(s: Spectrum) -> complex:
    """Central scalar of the representation whose mu-row uses ``s.gamma``.

    Observed correspondence (see ``match_branch``): delta = -gamma^3 for
    d = 4 and delta = gamma^6 for d = 5.
    """
    if s.d == 4:
        return -s.gamma ** 3
    if s.d == 5:
        return s.gamma ** 6
    raise ContractError("delta is an input only for d = 4, 5")


def check_delta_target(s: Spectrum, delta: complex) -> None:
    prod6 = complex(np.prod(s.lambdas)) ** 6
    if abs(complex(delta) ** s.d - prod6) > DELTA_TARGET_TOL:
        raise ContractError(f"delta^{s.d} must equal (lambda_1...lambda_d)^6")


# -- residual systems ---------------------------------------------------------------

def charpoly_coeffs(B: np.ndarray) -> np.ndarray:
    """Coefficients c_1..c_d of det(xI - B) = x^d + c_1 x^(d-1) + ... (Faddeev-LeVerrier).

    Works on stacks of matrices (..., d, d).
    """
    d = B.shape[-1]
    eye = np.eye(d)
    M = np.broadcast_to(eye, B.shape).astype(np.complex128)
    coeffs = []
    for k in range(1, d + 1):
        if k > 1:
            M = B @ M + coeffs[-1][..., None, None] * eye
        coeffs.append(-np.trace(B @ M, axis1=-2, axis2=-1) / k)
    return np.stack(coeffs, axis=-1)


def _central_block(A, B, delta):
    d = A.shape[-1]
    c = A @ B
    c = c @ c @ c
    if delta is None:
        target = (np.trace(c, axis1=-2, axis2=-1) / d)[..., None, None]
    else:
        target = delta
    return (c - target * np.eye(d)).reshape(c.shape[:-2] + (-1,))


def full_residual(B, A, charpoly_target, delta) -> np.ndarray:
    """Stacked residual for unknown B: braid relation, characteristic polynomial, centrality.

    For d <= 3 (``delta`` None) the centrality block asks (AB)^3 to be some
    scalar; this rejects the reducible solution B = A.
    """
    braid = (A @ B @ A - B @ A @ B).reshape(B.shape[:-2] + (-1,))
    cp = charpoly_coeffs(B) - charpoly_target
    return np.concatenate([braid, cp, _central_block(A, B, delta)], axis=-1)


def _newton_tol(z: np.ndarray) -> float:
    # rounding in cubic residual terms grows like ||z||^3
    size = max(1.0, float(np.max(np.abs(z))) if z.size else 1.0)
    return NEWTON_TOL * size ** 3


def _damped_newton(F: Callable, z0: np.ndarray, maxit: int,
                   extra: int = 0) -> tuple[np.ndarray, float, bool]:
    """Damped Gauss-Newton on a holomorphic residual F: C^n -> C^m.

    The Jacobian comes from forward differences along each complex coordinate.
    Steps are least-squares (minimum norm) solutions and are halved until the
    residual norm decreases. Convergence means the residual norm is at most
    ``NEWTON_TOL`` times the cube of the largest entry (at least 1). After
    convergence up to ``extra`` further steps are taken while each at least
    halves the residual, which drives it down to rounding level.
    """
    z = z0.astype(np.complex128)
    n = z.size
    f = F(z)
    nf = float(np.linalg.norm(f))
    for _ in range(maxit):
        if nf <= _newton_tol(z):
            break
        jac = ((F(z + FD_STEP * np.eye(n)) - f) / FD_STEP).T
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        a = 1.0
        for _ in range(MAX_HALVINGS):
            fn = F(z + a * step)
            nfn = float(np.linalg.norm(fn))
            if nfn < nf:
                break
            a *= 0.5
        else:
            return z, nf, nf <= _newton_tol(z)
        z, f, nf = z + a * step, fn, nfn
    if nf > _newton_tol(z):
        return z, nf, False
    for _ in range(extra):
        if nf == 0.0:
            break
        jac = ((F(z + FD_STEP * np.eye(n)) - f) / FD_STEP).T
        zn = z + np.linalg.lstsq(jac, -f, rcond=None)[0]
        fn = F(zn)
        nfn = float(np.linalg.norm(fn))
        if not nfn < 0.5 * nf:
            break
        z, f, nf = zn, fn, nfn
    return z, nf, True


class _TriangularForm:
    """A = diag(lam) + strictly upper part (superdiagonal pinned to 1); B = diag(reversed lam) + strictly lower."""

    def __init__(self, lam: np.ndarray):
        d = lam.size
        self.d = d
        self.lam = lam
        self.upper = [(i, j) for i in range(d) for j in range(i + 2, d)]
        self.lower = [(i, j) for i in range(d) for j in range(i)]
        self.n = len(self.upper) + len(self.lower)
        self.A0 = np.diag(lam) + np.diag(np.ones(d - 1), 1)
        self.B0 = np.diag(lam[::-1]).astype(np.complex128)
        self._ui = tuple(np.array(self.upper, dtype=int).T.reshape(2, -1))
        self._li = tuple(np.array(self.lower, dtype=int).T.reshape(2, -1))

    def matrices(self, z: np.ndarray):
        shape = z.shape[:-1] + (self.d, self.d)
        A = np.broadcast_to(self.A0, shape).astype(np.complex128)
        B = np.broadcast_to(self.B0, shape).copy()
        nu = len(self.upper)
        if nu:
            A[..., self._ui[0], self._ui[1]] = z[..., :nu]
        B[..., self._li[0], self._li[1]] = z[..., nu:]
        return A, B

    def residual(self, z, delta):
        A, B = self.matrices(z)
        braid = (A @ B @ A - B @ A @ B).reshape(z.shape[:-1] + (-1,))
        return np.concatenate([braid, _central_block(A, B, delta)], axis=-1)


def _upper_eigvecs(T: np.ndarray) -> np.ndarray:
    """Eigenvectors (columns) of an upper-triangular matrix with distinct diagonal."""
    d = T.shape[0]
    V = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        lk = T[k, k]
        V[k, k] = 1.0
        for i in range(k - 1, -1, -1):
            V[i, k] = (T[i, i + 1:k + 1] @ V[i + 1:k + 1, k]) / (lk - T[i, i])
    return V


def balance_offdiagonal(B: np.ndarray, sweeps: int = 20) -> np.ndarray:
    """Diagonal similarity D B D^-1 equalizing row and column norms (keeps diagonal A fixed)."""
    f = la.offdiagonal_scaling(B, sweeps)
    return np.asarray(B) * f[:, None] / f[None, :]


def _herm_exp(m: np.ndarray) -> np.ndarray:
    w, q = np.linalg.eigh(m)
    return (q * np.exp(w)) @ q.conj().T


def balance_pair(A: np.ndarray, B: np.ndarray, step: float = 0.25,
                 maxit: int = 2000) -> tuple[np.ndarray, np.ndarray]:
    """Similarity G (A, B) G^-1 that (nearly) minimizes ||A||^2 + ||B||^2.

    Gradient flow along positive matrices: the gradient at the current pair is
    the Hermitian matrix sum [M, M*]. It vanishes exactly for unitary pairs, and
    for simple pairs the minimum exists, so the flow settles at a
    well-conditioned representative of the same isomorphism class.
    """
    d = A.shape[0]
    G = np.eye(d, dtype=np.complex128)
    a, b = A, B
    prev = None
    for _ in range(maxit):
        m = a @ a.conj().T - a.conj().T @ a + b @ b.conj().T - b.conj().T @ b
        n = la.fro_norm(a) ** 2 + la.fro_norm(b) ** 2
        nm = la.fro_norm(m)
        if nm <= 1e-14 * n or (prev is not None and prev - n < 1e-8 * n):
            break
        prev = n
        G = _herm_exp(-step * m / nm * min(1.0, 4.0 * nm / n)) @ G
        Gi = la.invert(G)
        a, b = G @ A @ Gi, G @ B @ Gi
    return a, b


def _orderings(d: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    perms = list(itertools.permutations(range(d)))
    rest = perms[1:]
    rng.shuffle(rest)
    return [perms[0]] + rest


def _solve_direct(lam, delta, order, rng, scale) -> Optional[np.ndarray]:
    tri = _TriangularForm(lam[list(order)])
    z0 = (rng.standard_normal(tri.n) + 1j * rng.standard_normal(tri.n)) * scale
    z, _, ok = _damped_newton(lambda z: tri.residual(z, delta), z0, _TRI_MAXIT)
    return z if ok else None


def _solve_homotopy(angles, delta, order, rng) -> Optional[np.ndarray]:
    """Continue the triangular solution from a random reference spectrum.

    The path runs through complex angles, (1 - u) t_ref + u t + i u (1 - u) v,
    so that it generically avoids non-simple spectra, and delta is carried
    along with delta^d = (lambda_1...lambda_d)^6 so it ends at the target.
    """
    t = np.asarray(angles, dtype=float)
    d = t.size
    t_ref = rng.random(d)
    v = _HOMOTOPY_BUMP * rng.standard_normal(d)
    p = list(order)

    def path(u):
        return (1 - u) * t_ref + u * t + 1j * u * (1 - u) * v

    def delta_at(u):
        if delta is None:
            return None
        return delta * np.exp(2j * np.pi * 6 * (np.sum(path(u)) - np.sum(t)) / d)

    def residual_at(u):
        tri = _TriangularForm(np.exp(2j * np.pi * path(u))[p])
        return lambda z: tri.residual(z, delta_at(u))

    z = _solve_direct(np.exp(2j * np.pi * path(0.0)), delta_at(0.0), order, rng, 1.0)
    if z is None:
        return None
    u, h = 0.0, 1.0 / _HOMOTOPY_STEPS
    while u < 1.0:
        h = min(h, 1.0 - u)
        zn, _, ok = _damped_newton(residual_at(u + h), z, _HOMOTOPY_CORRECTOR_IT)
        if ok:
            z, u, h = zn, u + h, 1.5 * h
        else:
            h *= 0.5
            if h < _HOMOTOPY_MIN_STEP:
                return None
    return z


def _polish(A: np.ndarray, B: np.ndarray, target, delta, extra: int = 0) -> Optional[np.ndarray]:
    d = A.shape[0]

    def F(x):
        return full_residual(x.reshape(x.shape[:-1] + (d, d)), A, target, delta)

    x, _, ok = _damped_newton(F, B.ravel(), _POLISH_MAXIT, extra)
    if not ok or not np.all(np.isfinite(x)):
        return None
    return x.reshape(d, d)


def _pair_residual(A, B, coef, delta) -> np.ndarray:
    """Braid, both characteristic polynomials and centrality; works on complex or mpmath object arrays."""
    d = A.shape[0]
    eye = np.eye(d, dtype=A.dtype)

    def cp(X):
        M, out = eye, []
        for k in range(1, d + 1):
            if k > 1:
                M = X @ M + out[-1] * eye
            out.append(-np.trace(X @ M) / k)
        return np.array(out, dtype=A.dtype) - coef

    C = A @ B
    C = C @ C @ C
    target = np.trace(C) / d if delta is None else delta
    return np.concatenate([(A @ B @ A - B @ A @ B).ravel(), cp(A), cp(B), (C - target * eye).ravel()])


def _refine_extended(A: np.ndarray, B: np.ndarray, s: Spectrum, delta) -> tuple[np.ndarray, np.ndarray]:
    """Newton on (A, B) jointly, residual in extended precision, Jacobian in double.

    The involution and the invariant form amplify the residual of the pair
    by several orders of magnitude on ill-conditioned spectra, so the last
    digits matter. Returns the input if refinement does not reduce the
    extended-precision residual.
    """
    d = s.d
    n = d * d
    with mpmath.workdps(_EXTENDED_DPS):
        lam = [mpmath.expjpi(2 * mpmath.mpf(t)) for t in s.angles]
        coef = [mpmath.mpc(1)]
        for x in lam:
            coef = [a - x * b for a, b in zip(coef + [0], [0] + coef)]
        coef = np.array(coef[1:], dtype=object)
        mdelta = None
        if delta is not None:
            root = mpmath.fprod(lam) ** 6
            cands = [mpmath.root(root, d, k) for k in range(d)]
            mdelta = min(cands, key=lambda c: abs(complex(c) - delta))

        def to_mp(x):
            return np.array([mpmath.mpc(v.real, v.imag) for v in x], dtype=object)

        def F_mp(z):
            return _pair_residual(z[:n].reshape(d, d), z[n:].reshape(d, d), coef, mdelta)

        z0 = np.concatenate([A.ravel(), B.ravel()])
        cd = coef.astype(complex)
        dd = None if delta is None else complex(mdelta)

        def F(z):
            return _pair_residual(z[:n].reshape(d, d), z[n:].reshape(d, d), cd, dd)

        f0 = F(z0)
        J = np.column_stack([(F(z0 + FD_STEP * e) - f0) / FD_STEP for e in np.eye(2 * n)])
        zm = to_mp(z0)
        for _ in range(_EXTENDED_STEPS):
            f = F_mp(zm).astype(complex)
            zm = zm + to_mp(np.linalg.lstsq(J, -f, rcond=None)[0])
        z1 = zm.astype(complex)
        before = float(mpmath.norm(list(F_mp(to_mp(z0)))))
        after = float(mpmath.norm(list(F_mp(to_mp(z1)))))
    if not (np.all(np.isfinite(z1)) and after < before):
        return A, B
    return z1[:n].reshape(d, d), z1[n:].reshape(d, d)


def _attempt(s: Spectrum, delta, order, rng, mode: str, gauge: str):
    lam = s.lambdas
    if mode == "homotopy":
        z = _solve_homotopy(s.angles, delta, order, rng)
    else:
        z = _solve_direct(lam, delta, order, rng, 3.0 if mode == "wide" else 1.0)
    if z is None:
        return None
    At, Bt = _TriangularForm(lam[list(order)]).matrices(z)
    try:
        V = _upper_eigvecs(At)
        Vinv = la.invert(V)
    except (ArithmeticError, ZeroDivisionError):
        return None
    # column k of V belongs to lam[order[k]]; reorder so column i belongs to lam[i]
    inv = np.argsort(order)
    V, Vinv = V[:, inv], Vinv[inv, :]
    A = np.diag(lam)
    target = np.poly(lam)[1:]
    B = _polish(A, balance_offdiagonal(Vinv @ Bt @ V), target, delta)
    if B is None:
        return None
    B = balance_offdiagonal(B)
    if gauge == "diagonal":
        return A, B
    A, B = balance_pair(A, B)
    B = _polish(A, B, target, delta, extra=_REFINE_STEPS)
    return None if B is None else _refine_extended(A, B, s, delta)


def restart_mode(r: int) -> str:
    """Odd restarts use the homotopy; even ones a direct solve, every third of them from a wider start."""
    if r % 2:
        return "homotopy"
    return "wide" if r % 6 == 4 else "direct"


GAUGES = ("balanced", "diagonal")


def build_newton(s: Spectrum, delta_target: Optional[complex] = None, seed: int = 0,
                 max_restarts: int = MAX_RESTARTS, gauge: str = "balanced") -> RepPair:
    """Reconstruct (A, B) by damped Newton with seeded restarts.

    B is solved for with A = diag(lambda). With ``gauge="diagonal"`` that pair
    is returned as is. The default moves it by a similarity to the
    norm-minimizing ("balanced") representative and polishes B there: with A
    diagonal, B has entries of size sqrt|mu_1i mu_1j|, which for large |mu|
    puts the invariants out of reach of double precision.

    For d = 4, 5 the central scalar defaults to ``delta_for_branch(s)``.
    Restart ``r`` draws from its own generator seeded with (seed, r), so the
    accepted pair (the lowest converged restart index) does not depend on the
    order in which restarts are evaluated.
    """
    if gauge not in GAUGES:
        raise ContractError(f"gauge must be one of {GAUGES}")
    if not is_simple(s):
        raise NotSimpleError("spectrum does not admit a simple representation")
    if s.d >= 4:
        if delta_target is None:
            delta_target = delta_for_branch(s)
        check_delta_target(s, delta_target)
        delta_target = complex(delta_target)
    else:
        delta_target = None
    orders = _orderings(s.d, np.random.default_rng([seed, 2**31]))
    for r in range(max_restarts):
        rng = np.random.default_rng([seed, r])
        pair = _attempt(s, delta_target, orders[r % len(orders)], rng, restart_mode(r), gauge)
        if pair is None:
            continue
        try:
            rep = make_rep(*pair, s, seed=seed, restart=r)
        except ConstructionFailed as exc:
            log.debug("restart %d rejected: %s", r, exc)
            continue
        if not verify_rep(rep, s).simple:
            log.debug("restart %d converged to a reducible pair", r)
            continue
        return rep
    raise ReconstructionFailed(f"no restart converged for angles {s.angles} (seed {seed})")


# -- branch matching and verification -----------------------------------------

def closed_rows_by_branch(angles: Sequence[float]) -> dict[int, np.ndarray]:
    d = len(angles)
    rows = {}
    for b in range(n_branches(d)):
        s = spectrum_from_angles(d, angles, b)
        rows[b] = np.array([mu_closed_complex(s, 1, j).real for j in range(2, d + 1)])
    return rows


def match_branch(s_base: Sequence[float], r: RepPair) -> int:
    """The gamma branch whose closed-form mu-row equals the numeric one."""
    from .algebra_tools import mu_numeric_row

    angles = tuple(s_base.angles) if isinstance(s_base, Spectrum) else tuple(s_base)
    d = len(angles)
    if d not in (4, 5):
        raise ContractError("gamma branches exist only for d = 4, 5")
    if r.d != d:
        raise ContractError("representation and angles disagree on d")
    s0 = spectrum_from_angles(d, angles, 0)
    make_rep(r.A, r.B, s0)
    numeric = np.asarray(mu_numeric_row(r, s0))
    rows = closed_rows_by_branch(angles)
    tol = BRANCH_MATCH_TOL * max(1.0, float(np.max(np.abs(numeric))))
    hits = [b for b, row in rows.items() if np.max(np.abs(row - numeric)) <= tol]
    if len(hits) != 1:
        table = {b: row.tolist() for b, row in rows.items()}
        raise BranchAmbiguityError(
            f"{len(hits)} branches match numeric mu-row {numeric.tolist()}; closed rows {table}"
        )
    return hits[0]


@dataclass
class RepReport:
    braid_residual: float
    spectrum_residual: float
    central_residual: float
    basis_rank: int
    basis_singular_ratio: float
    d: int
    problems: list[str] = field(default_factory=list)

    @property
    def simple(self) -> bool:
        return self.basis_rank == self.d * self.d

    @property
    def passed(self) -> bool:
        return (
            self.braid_residual <= BRAID_TOL
            and self.spectrum_residual <= SPECTRUM_TOL
            and self.central_residual <= CENTRAL_TOL
            and self.simple
        )

    def as_dict(self) -> dict:
        return {
            "braid_residual": self.braid_residual,
            "spectrum_residual": self.spectrum_residual,
            "central_residual": self.central_residual,
            "basis_S_rank": self.basis_rank,
            "basis_S_singular_ratio": self.basis_singular_ratio,
            "simple": self.simple,
            "passed": self.passed,
            "problems": list(self.problems),
        }


def verify_rep(r: RepPair, s: Spectrum) -> RepReport:
    """Residual report; simplicity is witnessed by basis S having rank d^2.

    The rank is measured in the eigenframe of A (see ``algebra_tools.eigenframe``).
    """
    from .algebra_tools import basis_S_rank

    A, B = np.asarray(r.A), np.asarray(r.B)
    d = s.d
    c = _cube(A, B)
    delta = complex(np.trace(c)) / d
    br = braid_residual(A, B)
    sr = max(spectrum_residual(A, s.lambdas), spectrum_residual(B, s.lambdas))
    cr = la.fro_norm(c - delta * np.eye(d))
    problems = []
    try:
        rank, ratio = basis_S_rank(A, B, s)
    except (ArithmeticError, B3RepError) as exc:
        rank, ratio = 0, 0.0
        problems.append(f"basis S unavailable: {exc}")
    return RepReport(br, sr, cr, rank, ratio, d, problems)
