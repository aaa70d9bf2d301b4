"""Quantum channels as Kraus sets, their doubled-space matrices, and the
low-rank factorization that drives the approximation engine.

A channel E = {E_k} acts as rho -> sum_k E_k rho E_k^dag.  Its matrix
representation on the doubled (row-major vectorized) space is

    M_E = sum_k E_k (x) conj(E_k),

a 4^m x 4^m matrix for an m-qubit channel.  Reshuffling swaps the inner
index pairs, M~[(i1,i3),(i2,i4)] = M[(i1,i2),(i3,i4)]; an SVD of the
reshuffled matrix yields M_E = sum_j U_j (x) V_j with the dominant term
near the identity for weak noise.  The left factor absorbs the singular
value, so each V_j has unit Frobenius norm up to the fixed phase
convention of :func:`qnoise.linalg.svd`.

The built-in catalog covers the noise models used by the simulator:
depolarizing, amplitude/phase damping and their decoherence composition
(T1/T2/gate-time parameterized, any consistent time unit), two-qubit
depolarizing, and the coherent ZZ crosstalk rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidChannelError, ValidationError
from .linalg import as_matrix, kron, require_finite, spectral_norm, svd

COMPLETENESS_TOL = 1e-6

I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A noise or gate as a finite list of Kraus matrices.

    ``label`` is the channel's source spelling (e.g. ``depolarizing(0.01)``);
    it is used when emitting circuit files and in reports.
    """

    arity: int
    kraus: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise InvalidChannelError(f"channel arity must be 1 or 2, got {self.arity}")
        dim = 2**self.arity
        # 4^m matrices always suffice, but composed channels are kept
        # unminimized (decoherence carries the damping products), so the
        # count is only sanity-capped
        if not 1 <= len(self.kraus) <= 16 * 4**self.arity:
            raise InvalidChannelError(
                f"unreasonable Kraus count {len(self.kraus)} for arity {self.arity}"
            )
        mats = []
        for e in self.kraus:
            m = as_matrix(e)
            if m.shape != (dim, dim):
                raise InvalidChannelError(
                    f"Kraus matrix shape {m.shape} does not match arity {self.arity}"
                )
            require_finite(m, "Kraus matrix")
            mats.append(_frozen(m))
        object.__setattr__(self, "kraus", tuple(mats))
        acc = sum(e.conj().T @ e for e in self.kraus)
        defect = float(np.linalg.norm(acc - np.eye(dim)))
        if defect > COMPLETENESS_TOL:
            raise InvalidChannelError(
                f"Kraus set violates completeness: |sum E^H E - I|_F = {defect:.3e}"
            )

    @property
    def dim(self) -> int:
        return 2**self.arity


@dataclass(frozen=True, eq=False)
class SuperOpMatrix:
    """The 4^m x 4^m matrix representation of an m-qubit channel."""

    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        d = 4**self.arity
        m = as_matrix(self.matrix)
        if m.shape != (d, d):
            raise ValidationError(f"superoperator matrix must be {d}x{d}, got {m.shape}")
        object.__setattr__(self, "matrix", _frozen(m))


@dataclass(frozen=True, eq=False)
class FactorDecomposition:
    """Terms (U_j, V_j) with sum_j U_j (x) V_j reconstructing the source.

    Sorted by descending singular value; U_j absorbs the singular value;
    zero singular values are dropped.  Ties are ordered by ascending
    lexicographic comparison of the phase-normalized left-factor entries
    (real then imaginary part per entry) — the choice only affects term
    labels, never sums over residuals.
    """

    arity: int
    terms: tuple[tuple[np.ndarray, np.ndarray], ...]
    singular_values: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        d = 4**self.arity
        out = np.zeros((d, d), dtype=np.complex128)
        for u, v in self.terms:
            out += kron(u, v)
        return out

    @property
    def dominant(self) -> tuple[np.ndarray, np.ndarray]:
        return self.terms[0]

    @property
    def residuals(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        return self.terms[1:]


def matrix_rep(ch: KrausChannel) -> SuperOpMatrix:
    """M_E = sum_k E_k (x) conj(E_k)."""
    d = 4**ch.arity
    m = np.zeros((d, d), dtype=np.complex128)
    for e in ch.kraus:
        m += kron(e, e.conj())
    return SuperOpMatrix(arity=ch.arity, matrix=m)


def noise_rate(ch: KrausChannel) -> float:
    """Spectral-norm distance of the channel from the identity channel.

    Measured on the reshuffled arrangement (where the identity channel
    is a rank-1 projector): depolarizing(p) has rate exactly 2p, and
    the approximation error bounds' per-noise constants (4p and 1+4p
    for one qubit, 16p and 1+16p for two) follow rigorously from this
    rate via the norm inequalities relating the two arrangements.
    """
    s = matrix_rep(ch)
    eye = np.eye(s.matrix.shape[0], dtype=np.complex128)
    return spectral_norm(reshuffle(s) - reshuffle(eye))


def reshuffle(s) -> np.ndarray:
    """Swap the inner index pairs of a doubled-space matrix.

    For M indexed M[(i1,i2),(i3,i4)] returns M~[(i1,i3),(i2,i4)]; each
    index runs over 2^m values.  An involution that preserves the
    Frobenius norm.  Accepts a :class:`SuperOpMatrix` or a raw 4x4 /
    16x16 array.
    """
    if isinstance(s, SuperOpMatrix):
        m, d = s.matrix, 2**s.arity
    else:
        m = as_matrix(s)
        if m.shape == (4, 4):
            d = 2
        elif m.shape == (16, 16):
            d = 4
        else:
            raise ValidationError(f"reshuffle expects a 4x4 or 16x16 matrix, got {m.shape}")
    if isinstance(s, SuperOpMatrix) and m.shape != (d * d, d * d):
        raise ValidationError(f"reshuffle dimension mismatch: {m.shape}")
    return (
        m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d).copy()
    )


def _term_sort_key(sigma: float, left_col: np.ndarray):
    parts: list[float] = [-sigma]
    for z in left_col:
        parts.append(float(z.real))
        parts.append(float(z.imag))
    return tuple(parts)


def decompose(s: SuperOpMatrix) -> FactorDecomposition:
    """Factor M_E into sum_j U_j (x) V_j via SVD of the reshuffled matrix."""
    d = 2**s.arity
    r = svd(reshuffle(s))
    order = sorted(
        (i for i in range(len(r.singular_values)) if r.singular_values[i] > 0.0),
        key=lambda i: _term_sort_key(float(r.singular_values[i]), r.left[:, i]),
    )
    terms = []
    sigmas = []
    for i in order:
        sigma = float(r.singular_values[i])
        u = (sigma * r.left[:, i]).reshape(d, d)
        v = r.right[:, i].conj().reshape(d, d)
        terms.append((_frozen(u), _frozen(v)))
        sigmas.append(sigma)
    return FactorDecomposition(
        arity=s.arity, terms=tuple(terms), singular_values=np.array(sigmas)
    )


def dominant(s: SuperOpMatrix) -> tuple[np.ndarray, np.ndarray]:
    """The leading factor pair (U_0, V_0) of :func:`decompose`."""
    return decompose(s).dominant


# --- channel catalog ---


def _fmt(x: float) -> str:
    return repr(float(x))


def depolarizing(p: float) -> KrausChannel:
    """Single-qubit depolarizing channel with total error probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"depolarizing probability must be in [0, 1], got {p}")
    kraus = (
        math.sqrt(1.0 - p) * I2,
        math.sqrt(p / 3.0) * PAULI_X,
        math.sqrt(p / 3.0) * PAULI_Y,
        math.sqrt(p / 3.0) * PAULI_Z,
    )
    return KrausChannel(arity=1, kraus=kraus, label=f"depolarizing({_fmt(p)})")


def _check_times(t1: float, dt: float) -> None:
    if not t1 > 0.0:
        raise ValidationError(f"T1 must be positive, got {t1}")
    if not dt >= 0.0:
        raise ValidationError(f"gate time must be non-negative, got {dt}")


def amplitude_damping(t1: float, dt: float) -> KrausChannel:
    """Energy relaxation over gate time dt with relaxation time T1."""
    _check_times(t1, dt)
    decay = math.exp(-dt / t1)  # survival probability of |1>
    e1 = np.array([[1.0, 0.0], [0.0, math.sqrt(decay)]], dtype=np.complex128)
    e2 = np.array([[0.0, math.sqrt(1.0 - decay)], [0.0, 0.0]], dtype=np.complex128)
    kraus = (e1,) if 1.0 - decay == 0.0 else (e1, e2)
    return KrausChannel(
        arity=1, kraus=kraus, label=f"amplitude_damping({_fmt(t1)},{_fmt(dt)})"
    )


def _pure_dephasing_rate(t1: float, t2: float) -> float:
    # 1/T_phi = 1/T2 - 1/(2 T1); must be >= 0, i.e. T2 <= 2 T1.
    if not t2 > 0.0:
        raise ValidationError(f"T2 must be positive, got {t2}")
    rate = 1.0 / t2 - 1.0 / (2.0 * t1)
    if rate < 0.0:
        raise ValidationError(
            f"invalid decoherence times: T2 = {t2} exceeds 2*T1 = {2 * t1}"
        )
    return rate


def phase_damping(t1: float, t2: float, dt: float) -> KrausChannel:
    """Pure dephasing over gate time dt, T_phi derived from T1 and T2."""
    _check_times(t1, dt)
    rate = _pure_dephasing_rate(t1, t2)
    keep = math.exp(-dt * rate)
    leak = math.sqrt(1.0 - keep)
    e0 = math.sqrt(keep) * I2
    e1 = leak * np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)
    e2 = leak * np.array([[0.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
    kraus = (e0,) if leak == 0.0 else (e0, e1, e2)
    return KrausChannel(
        arity=1,
        kraus=kraus,
        label=f"phase_damping({_fmt(t1)},{_fmt(t2)},{_fmt(dt)})",
    )


def decoherence(t1: float, t2: float, dt: float) -> KrausChannel:
    """Composition: phase damping after amplitude damping.

    Kraus set is the set of products E_p,i . E_a,j with zero-norm
    products dropped; it is not minimized (only M_E enters the
    algorithms).
    """
    amp = amplitude_damping(t1, dt)
    phase = phase_damping(t1, t2, dt)
    kraus = []
    for ep in phase.kraus:
        for ea in amp.kraus:
            prod = ep @ ea
            if np.linalg.norm(prod) ** 2 > 1e-24:
                kraus.append(prod)
    return KrausChannel(
        arity=1,
        kraus=tuple(kraus),
        label=f"decoherence({_fmt(t1)},{_fmt(t2)},{_fmt(dt)})",
    )


def two_qubit_depolarizing(p: float) -> KrausChannel:
    """Two-qubit depolarizing channel over the 15 non-identity Pauli pairs."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"depolarizing probability must be in [0, 1], got {p}")
    kraus = [math.sqrt(1.0 - p) * np.eye(4, dtype=np.complex128)]
    for a in ("I", "X", "Y", "Z"):
        for b in ("I", "X", "Y", "Z"):
            if a == b == "I":
                continue
            kraus.append(math.sqrt(p / 15.0) * np.kron(PAULIS[a], PAULIS[b]))
    return KrausChannel(arity=2, kraus=tuple(kraus), label=f"depolarizing2({_fmt(p)})")


def zz_crosstalk(theta: float) -> KrausChannel:
    """Coherent ZZ rotation exp(-i theta Z(x)Z / 2) as a unitary channel."""
    if not math.isfinite(theta):
        raise ValidationError(f"zz angle must be finite, got {theta}")
    half = theta / 2.0
    u = np.diag(
        [
            np.exp(-1j * half),
            np.exp(1j * half),
            np.exp(1j * half),
            np.exp(-1j * half),
        ]
    ).astype(np.complex128)
    return KrausChannel(arity=2, kraus=(u,), label=f"zz({_fmt(theta)})")


def unitary_channel(u, label: str = "unitary") -> KrausChannel:
    """Wrap a unitary as a single-Kraus channel."""
    m = as_matrix(u)
    arity = 1 if m.shape == (2, 2) else 2
    return KrausChannel(arity=arity, kraus=(m,), label=label)


def identity_channel(arity: int = 1) -> KrausChannel:
    return KrausChannel(
        arity=arity,
        kraus=(np.eye(2**arity, dtype=np.complex128),),
        label="identity" if arity == 1 else "identity2",
    )
