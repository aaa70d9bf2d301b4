"""Dense complex linear algebra sized for channel math.

Matrices here are plain numpy ``complex128`` arrays.  The routines serve
the channel decomposition pipeline: inputs stay small (channel
reshuffles are at most 16x16, guarded at 64), full generality is a
non-goal.

The SVD is LAPACK-backed and post-processed to a fixed phase convention
so factorizations are reproducible — an SVD is otherwise unique only up
to a per-pair phase.  Each left singular vector is rotated so that its
largest-magnitude entry is real and non-negative (ties resolved to the
first entry within a relative 1e-9 of the maximum), and the same
rotation is applied to the matching right singular vector, which leaves
every rank-1 term invariant.  Singular values below ``ZERO_CLAMP``
relative to the largest are clamped to exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ValidationError

MAX_SVD_DIM = 64
ZERO_CLAMP = 1e-12
KRON_ENTRY_LIMIT = 2**30


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex128 array (copying only if needed)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got ndim={a.ndim}")
    return a


def require_finite(m: np.ndarray, what: str = "matrix") -> None:
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValidationError(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class SvdResult:
    """Phase-fixed SVD ``m = left @ diag(singular_values) @ right^H``.

    Columns of ``left``/``right`` are the left/right singular vectors;
    singular values are sorted descending and clamped to 0 below the
    relative threshold.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.conj().T


def svd(m) -> SvdResult:
    """Phase-fixed SVD of a small square matrix.

    Deterministic for identical inputs.  Raises on non-square input,
    non-finite entries, or dimension above ``MAX_SVD_DIM``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"svd expects a square matrix, got {a.shape}")
    if a.shape[0] > MAX_SVD_DIM:
        raise ValidationError(
            f"svd supports dimensions up to {MAX_SVD_DIM}, got {a.shape[0]}"
        )
    require_finite(a, "svd input")

    u, s, vh = np.linalg.svd(a)
    v = vh.conj().T
    if s[0] > 0.0:
        s = np.where(s < ZERO_CLAMP * s[0], 0.0, s)

    # Fixed phase convention (see module docstring).  "Largest-magnitude
    # entry" means the first entry within a relative 1e-9 of the maximum,
    # so exact-arithmetic ties are not broken by floating-point jitter.
    u = u.copy()
    v = v.copy()
    for i in range(u.shape[1]):
        col = u[:, i]
        mags = np.abs(col)
        mx = float(mags.max())
        if mx > 0.0:
            k = int(np.argmax(mags >= mx * (1.0 - 1e-9)))
            c = (col[k] / abs(col[k])).conjugate()
            u[:, i] = col * c
            v[:, i] = v[:, i] * c
    return SvdResult(left=u, singular_values=s, right=v)


def spectral_norm(m) -> float:
    """Largest singular value of ``m`` (any rectangular shape)."""
    a = as_matrix(m)
    require_finite(a, "spectral_norm input")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def kron(a, b) -> np.ndarray:
    """Kronecker product with a guard on the result size."""
    ma = as_matrix(a)
    mb = as_matrix(b)
    require_finite(ma, "kron operand")
    require_finite(mb, "kron operand")
    entries = ma.size * mb.size
    if entries > KRON_ENTRY_LIMIT:
        raise ResourceLimitError(
            f"kron result would have {entries} entries (limit {KRON_ENTRY_LIMIT})"
        )
    return np.kron(ma, mb)
