"""Product-state specifications for circuit inputs and measurements.

A state is given per qubit with one character each:

    0 1   computational basis
    + -   (|0> ± |1>)/sqrt(2)
    r l   (|0> ± i|1>)/sqrt(2)

``zeros`` abbreviates the all-|0> input and ``ideal`` (measurements
only) asks for v = U|psi> with U the noiseless part of the circuit.
Qubit 0 is the most significant bit of basis indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_SQ = 1.0 / math.sqrt(2.0)
_TOKENS = {
    "0": np.array([1.0, 0.0], dtype=np.complex128),
    "1": np.array([0.0, 1.0], dtype=np.complex128),
    "+": np.array([_SQ, _SQ], dtype=np.complex128),
    "-": np.array([_SQ, -_SQ], dtype=np.complex128),
    "r": np.array([_SQ, 1j * _SQ], dtype=np.complex128),
    "l": np.array([_SQ, -1j * _SQ], dtype=np.complex128),
}


@dataclass(frozen=True)
class ProductState:
    """An n-qubit product state as per-qubit 2-vectors."""

    factors: tuple[np.ndarray, ...]
    spec: str = ""

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    def dense(self) -> np.ndarray:
        """Full 2^n state vector (oracle/test helper)."""
        if self.n_qubits > 24:
            raise ValidationError("dense state vector capped at 24 qubits")
        out = np.array([1.0], dtype=np.complex128)
        for f in self.factors:
            out = np.kron(out, f)
        return out


class IdealOutput:
    """Marker: the measurement state is the ideal circuit output U|psi>."""

    def __repr__(self):
        return "IdealOutput()"

    def __eq__(self, other):
        return isinstance(other, IdealOutput)

    def __hash__(self):
        return hash("IdealOutput")


IDEAL = IdealOutput()


def product_state(spec: str, n_qubits: int) -> ProductState:
    """Build a product state from a per-qubit token string."""
    if spec == "zeros":
        spec = "0" * n_qubits
    if len(spec) != n_qubits:
        raise ValidationError(
            f"state spec {spec!r} has {len(spec)} tokens for {n_qubits} qubits"
        )
    factors = []
    for t in spec:
        if t not in _TOKENS:
            raise ValidationError(f"unknown state token {t!r} (expected 01+-rl)")
        factors.append(_TOKENS[t])
    return ProductState(factors=tuple(factors), spec=spec)


def basis_state(bits: str) -> ProductState:
    if any(b not in "01" for b in bits):
        raise ValidationError(f"basis state must be 0/1 bits, got {bits!r}")
    return product_state(bits, len(bits))


def parse_state_spec(spec, n_qubits: int):
    """Normalize a psi/v argument: ProductState, IdealOutput, or string."""
    if isinstance(spec, ProductState):
        if spec.n_qubits != n_qubits:
            raise ValidationError(
                f"state has {spec.n_qubits} qubits, circuit has {n_qubits}"
            )
        return spec
    if isinstance(spec, IdealOutput):
        return spec
    if isinstance(spec, str):
        if spec == "ideal":
            return IDEAL
        return product_state(spec, n_qubits)
    raise ValidationError(f"bad state spec {spec!r}")
