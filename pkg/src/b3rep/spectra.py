"""Eigenvalue data, the closed-form Q polynomials and the mu sign test.

Angles are measured in turns: lambda_k = exp(2 pi i t_k). Indices in the
public functions are 1-based to match the usual notation mu_{1i}; the array
helpers (``q_array``, ``mu_row_array``) are 0-based and broadcast over any
leading axes so the region scanner can evaluate whole grids at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import BranchRangeError, ContractError, DegenerateSpectrumError, RealnessViolation

DISTINCT_TOL = 1e-9
REALNESS_TOL = 1e-9
SIMPLE_TOL = 1e-9
BOUNDARY_EPS = 1e-6

# Above this magnitude the double-precision quotient can carry an imaginary
# rounding residue comparable to REALNESS_TOL; such points are re-evaluated
# with extended precision.
_DOUBLE_MU_LIMIT = 1e3
_DOUBLE_IM_LIMIT = 1e-11
_EXTENDED_DPS = 40

_ROOT_ORDER = {4: 2, 5: 5}


class Verdict(str, enum.Enum):
    UNITARIZABLE = "unitarizable"
    NOT_UNITARIZABLE = "not_unitarizable"
    BOUNDARY = "boundary"
    NOT_SIMPLE = "not_simple"


def reduce_turn(t: float) -> float:
    r = float(t) % 1.0
    # -tiny % 1.0 rounds up to exactly 1.0
    return 0.0 if r >= 1.0 else r


def n_branches(d: int) -> int:
    """Number of gamma branches for dimension d (1 when gamma is unused)."""
    return _ROOT_ORDER.get(d, 1)


def _principal_shift(angles: Sequence[float]) -> int:
    """Integer m with sum(angles) - m in (-1/2, 1/2]."""
    total = math.fsum(angles)
    m = math.floor(total)
    if total - m > 0.5:
        m += 1
    return m


def gamma_from_angles(angles: Sequence[float], branch: int) -> complex:
    """Root of lambda_1...lambda_d used in Q for d = 4 (square) and d = 5 (fifth).

    The principal root takes the angle sum in (-1/2, 1/2]; branch k multiplies
    it by exp(2 pi i k / n).
    """
    n = _ROOT_ORDER[len(angles)]
    s = math.fsum(angles) - _principal_shift(angles)
    return complex(np.exp(2j * np.pi * (s + branch) / n))


@dataclass(frozen=True)
class Spectrum:
    """Validated unit-circle spectrum. Build through ``spectrum_from_angles``."""

    d: int
    angles: tuple[float, ...]
    gamma_branch: Optional[int] = None
    lambdas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = np.exp(2j * np.pi * np.asarray(self.angles, dtype=float))
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @cached_property
    def gamma(self) -> Optional[complex]:
        if self.gamma_branch is None:
            return None
        return gamma_from_angles(self.angles, self.gamma_branch)

    def with_branch(self, branch: Optional[int]) -> "Spectrum":
        return spectrum_from_angles(self.d, self.angles, branch)

    def min_separation(self) -> float:
        lam = self.lambdas
        return float(min(abs(lam[j] - lam[k]) for j in range(self.d) for k in range(j + 1, self.d)))


def spectrum_from_angles(d: int, t: Sequence[float], branch: Optional[int] = None) -> Spectrum:
    if d not in (2, 3, 4, 5):
        raise ContractError(f"dimension must be 2..5, got {d}")
    if len(t) != d:
        raise ContractError(f"expected {d} angles, got {len(t)}")
    if d in _ROOT_ORDER:
        if branch is None:
            raise BranchRangeError(f"d={d} requires a gamma branch in 0..{_ROOT_ORDER[d] - 1}")
        if not (0 <= int(branch) < _ROOT_ORDER[d]) or int(branch) != branch:
            raise BranchRangeError(f"gamma branch {branch} outside 0..{_ROOT_ORDER[d] - 1}")
        branch = int(branch)
    elif branch is not None:
        raise BranchRangeError(f"d={d} has no gamma branch")
    if not all(math.isfinite(x) for x in t):
        raise ContractError("angles must be finite")
    angles = tuple(reduce_turn(x) for x in t)
    s = Spectrum(d, angles, branch)
    if s.min_separation() <= DISTINCT_TOL:
        raise DegenerateSpectrumError(f"repeated eigenvalue in angles {angles}")
    return s


# -- vectorized closed forms -------------------------------------------------

def q_array(lam: np.ndarray, gamma, r: int, s: int) -> np.ndarray:
    """Q^(d)_{rs} for 0-based r != s; ``lam`` has shape (..., d)."""
    d = lam.shape[-1]
    lr, ls = lam[..., r], lam[..., s]
    rest = [k for k in range(d) if k not in (r, s)]
    if d == 2:
        return -lr * lr + lr * ls - ls * ls
    if d == 3:
        lk = lam[..., rest[0]]
        return (lr * lr + ls * lk) * (ls * ls + lr * lk)
    g = np.asarray(gamma)
    if d == 4:
        lk, ll = lam[..., rest[0]], lam[..., rest[1]]
        return (-1.0 / g) * (lr * lr + g) * (ls * ls + g) * (g + lr * lk + ls * ll) * (g + lr * ll + ls * lk)
    if d == 5:
        g2 = g * g
        out = g ** -8 * (g2 + lr * g + lr * lr) * (g2 + ls * g + ls * ls)
        for k in rest:
            lk = lam[..., k]
            out = out * (g2 + lr * lk) * (g2 + ls * lk)
        return out
    raise ContractError(f"dimension must be 2..5, got {d}")


def _diff_product(lam: np.ndarray, i: int) -> np.ndarray:
    d = lam.shape[-1]
    out = np.ones(lam.shape[:-1], dtype=np.complex128)
    for k in range(d):
        if k != i:
            out = out * (lam[..., i] - lam[..., k])
    return out


def mu_array(lam: np.ndarray, gamma, i: int, j: int) -> np.ndarray:
    """Complex closed-form mu_{ij} (0-based, i != j), before the realness check."""
    return q_array(lam, gamma, i, j) / (_diff_product(lam, i) * _diff_product(lam, j))


def mu_row_array(lam: np.ndarray, gamma=None) -> np.ndarray:
    """Closed-form (mu_12, ..., mu_1d) as a complex array of shape (..., d-1)."""
    d = lam.shape[-1]
    return np.stack([mu_array(lam, gamma, 0, j) for j in range(1, d)], axis=-1)


def lambdas_from_angles(angles: np.ndarray) -> np.ndarray:
    return np.exp(2j * np.pi * np.asarray(angles, dtype=float))


def gammas_from_angles(angles: np.ndarray, branch: int) -> np.ndarray:
    """Vectorized ``gamma_from_angles`` over leading axes of ``angles``."""
    angles = np.asarray(angles, dtype=float)
    n = _ROOT_ORDER[angles.shape[-1]]
    s = np.sum(angles, axis=-1) % 1.0
    s = np.where(s > 0.5, s - 1.0, s)
    return np.exp(2j * np.pi * (s + branch) / n)


# -- scalar API ----------------------------------------------------------------

def _check_index(s: Spectrum, i: int) -> int:
    if not (1 <= i <= s.d):
        raise ContractError(f"index {i} outside 1..{s.d}")
    return i - 1


def q_value(s: Spectrum, r: int, s_idx: int) -> complex:
    r0, s0 = _check_index(s, r), _check_index(s, s_idx)
    if r0 == s0:
        raise ContractError("Q is defined only for r != s")
    return complex(q_array(s.lambdas, s.gamma, r0, s0))


def _mu_extended(s: Spectrum, i0: int, j0: int) -> complex:
    with mpmath.workdps(_EXTENDED_DPS):
        turns = [mpmath.mpf(t) for t in s.angles]
        lam = np.array([mpmath.expjpi(2 * t) for t in turns], dtype=object)
        gamma = None
        if s.gamma_branch is not None:
            n = _ROOT_ORDER[s.d]
            total = mpmath.fsum(turns) - _principal_shift(s.angles)
            gamma = mpmath.expjpi(2 * (total + s.gamma_branch) / n)
        z = mu_array(lam, gamma, i0, j0)
        return complex(z)


def mu_closed_complex(s: Spectrum, i: int, j: int) -> complex:
    """The closed-form quotient for mu_ij before discarding its imaginary part.

    Evaluated in double precision unless the result is large enough for
    rounding to leave a visible imaginary residue, in which case it is
    recomputed at 40 significant digits from the exact input angles.
    """
    i0, j0 = _check_index(s, i), _check_index(s, j)
    if i0 == j0:
        raise ContractError("closed-form mu needs i != j; use mu_diag for the diagonal")
    z = complex(mu_array(s.lambdas, s.gamma, i0, j0))
    if abs(z) > _DOUBLE_MU_LIMIT or abs(z.imag) > _DOUBLE_IM_LIMIT:
        z = _mu_extended(s, i0, j0)
    return z


def mu_closed(s: Spectrum, i: int, j: int) -> float:
    z = mu_closed_complex(s, i, j)
    if abs(z.imag) > REALNESS_TOL:
        raise RealnessViolation(f"mu_{i}{j} = {z!r} has imaginary part above {REALNESS_TOL}")
    return z.real


def mu_diag(s: Spectrum, numeric_row: Sequence[float]) -> float:
    """mu_ii from the off-diagonal entries of row i, using that each row sums to one."""
    return 1.0 - math.fsum(numeric_row)


@dataclass(frozen=True)
class MuRow:
    values: tuple[float, ...]
    boundary_flags: tuple[bool, ...]


def mu_row(s: Spectrum) -> MuRow:
    vals = tuple(mu_closed(s, 1, j) for j in range(2, s.d + 1))
    return MuRow(vals, tuple(abs(v) <= BOUNDARY_EPS for v in vals))


def q_values(s: Spectrum) -> dict[tuple[int, int], complex]:
    return {(r, c): q_value(s, r, c) for r in range(1, s.d + 1) for c in range(1, s.d + 1) if r != c}


def is_simple(s: Spectrum) -> bool:
    lam, g = s.lambdas, s.gamma
    return all(
        abs(complex(q_array(lam, g, r, c))) > SIMPLE_TOL
        for r in range(s.d) for c in range(s.d) if r != c
    )


def unitarizable(s: Spectrum) -> Verdict:
    if not is_simple(s):
        return Verdict.NOT_SIMPLE
    row = mu_row(s)
    if any(row.boundary_flags):
        return Verdict.BOUNDARY
    if all(v > 0 for v in row.values):
        return Verdict.UNITARIZABLE
    return Verdict.NOT_UNITARIZABLE
