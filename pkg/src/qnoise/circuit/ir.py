"""Circuit intermediate representation.

A circuit is an ordered sequence of elements over ``n_qubits`` wires;
each element is a :class:`Gate` or a :class:`NoiseOp` (a Kraus channel
on a declared qubit subset).  Element order is application order.

Conventions fixed here and used everywhere else in the package:

* qubit 0 is the most significant bit of basis-state indices;
* multi-qubit gate matrices are written in the basis ordered by the
  gate's own qubit list (first listed qubit most significant);
* ``cx a b`` has control ``a`` and target ``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channels import KrausChannel, noise_rate
from ..errors import ValidationError

UNITARY_TOL = 1e-8

_SQ = 1.0 / math.sqrt(2.0)
_FIXED_GATES = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "h": np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=np.complex128),
    "s": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=np.complex128),
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(np.complex128),
}

# kind -> (arity, takes_angle)
GATE_KINDS = {
    "x": (1, False),
    "y": (1, False),
    "z": (1, False),
    "h": (1, False),
    "s": (1, False),
    "t": (1, False),
    "rx": (1, True),
    "ry": (1, True),
    "rz": (1, True),
    "cx": (2, False),
    "cz": (2, False),
    "zz": (2, True),
    "u1": (1, False),
    "u2": (2, False),
}


def gate_matrix(kind: str, param: float | None = None, matrix=None) -> np.ndarray:
    """Dense unitary of one gate, in the gate's own qubit order."""
    if kind in _FIXED_GATES:
        return _FIXED_GATES[kind]
    if kind in ("rx", "ry", "rz"):
        c, s = math.cos(param / 2.0), math.sin(param / 2.0)
        if kind == "rx":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
        if kind == "ry":
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        return np.diag([np.exp(-1j * param / 2.0), np.exp(1j * param / 2.0)]).astype(
            np.complex128
        )
    if kind == "zz":
        half = param / 2.0
        return np.diag(
            [
                np.exp(-1j * half),
                np.exp(1j * half),
                np.exp(1j * half),
                np.exp(-1j * half),
            ]
        ).astype(np.complex128)
    if kind in ("u1", "u2"):
        return np.asarray(matrix, dtype=np.complex128)
    raise ValidationError(f"unknown gate kind {kind!r}")


def _is_unitary(m: np.ndarray) -> bool:
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=UNITARY_TOL))


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        arity, takes_angle = GATE_KINDS[self.kind]
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        if len(qs) != arity:
            raise ValidationError(f"gate {self.kind} expects {arity} qubit(s), got {qs}")
        if len(set(qs)) != len(qs):
            raise ValidationError(f"duplicate qubit in gate {self.kind} {qs}")
        if takes_angle:
            if self.param is None or not math.isfinite(self.param):
                raise ValidationError(f"gate {self.kind} needs a finite angle")
        elif self.param is not None:
            raise ValidationError(f"gate {self.kind} takes no angle")
        if self.kind in ("u1", "u2"):
            dim = 2**arity
            m = np.asarray(self.matrix, dtype=np.complex128)
            if m.shape != (dim, dim):
                raise ValidationError(
                    f"{self.kind} matrix must be {dim}x{dim}, got {m.shape}"
                )
            if not _is_unitary(m):
                raise ValidationError(f"{self.kind} matrix is not unitary (tol {UNITARY_TOL})")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValidationError(f"gate {self.kind} takes no custom matrix")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def unitary(self) -> np.ndarray:
        return gate_matrix(self.kind, self.param, self.matrix)


@dataclass(frozen=True, eq=False)
class NoiseOp:
    channel: KrausChannel
    qubits: tuple[int, ...]

    def __post_init__(self):
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        if len(qs) != self.channel.arity:
            raise ValidationError(
                f"noise arity {self.channel.arity} does not match qubits {qs}"
            )
        if len(set(qs)) != len(qs):
            raise ValidationError(f"duplicate qubit in noise op {qs}")

    @property
    def arity(self) -> int:
        return len(self.qubits)


CircuitElement = Gate | NoiseOp


@dataclass(frozen=True, eq=False)
class NoisyCircuit:
    n_qubits: int
    elements: tuple[CircuitElement, ...]
    name: str = ""

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError(f"circuit needs at least 1 qubit, got {self.n_qubits}")
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            if not isinstance(el, (Gate, NoiseOp)):
                raise ValidationError(f"bad circuit element {el!r}")
            for q in el.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValidationError(
                        f"qubit q{q} out of range for {self.n_qubits}-qubit circuit"
                    )

    def gates(self) -> list[Gate]:
        return [el for el in self.elements if isinstance(el, Gate)]

    def noises(self) -> list[NoiseOp]:
        return [el for el in self.elements if isinstance(el, NoiseOp)]

    @property
    def has_noise(self) -> bool:
        return any(isinstance(el, NoiseOp) for el in self.elements)


@dataclass(frozen=True)
class CircuitStats:
    n_qubits: int
    gate_count: int
    single_qubit_noise_count: int
    two_qubit_noise_count: int
    max_noise_rate: float

    @property
    def noise_count(self) -> int:
        return self.single_qubit_noise_count + self.two_qubit_noise_count


def circuit_stats(c: NoisyCircuit) -> CircuitStats:
    """Counts entering the error-bound and contraction-count formulas."""
    n1 = n2 = 0
    p = 0.0
    for el in c.elements:
        if isinstance(el, NoiseOp):
            if el.arity == 1:
                n1 += 1
            else:
                n2 += 1
            p = max(p, noise_rate(el.channel))
    return CircuitStats(
        n_qubits=c.n_qubits,
        gate_count=len(c.gates()),
        single_qubit_noise_count=n1,
        two_qubit_noise_count=n2,
        max_noise_rate=p,
    )


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    n_qubits: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValidationError(f"coupling graph has a self-loop at q{a}")
            for q in (a, b):
                if not 0 <= q < self.n_qubits:
                    raise ValidationError(f"coupling-graph qubit q{q} out of range")
            norm.append((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(norm))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(set(self.edges))


def line_graph(n: int) -> CouplingGraph:
    return CouplingGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def apply_to_axes(arr: np.ndarray, u: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Apply a k-qubit operator to the given axes of a (2,)*r array."""
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, arr, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def circuit_unitary(c: NoisyCircuit, max_qubits: int = 10) -> np.ndarray:
    """Dense unitary of a noiseless circuit (test/verification helper)."""
    if c.has_noise:
        raise ValidationError("circuit_unitary requires a noiseless circuit")
    if c.n_qubits > max_qubits:
        raise ValidationError(
            f"circuit_unitary capped at {max_qubits} qubits, got {c.n_qubits}"
        )
    n = c.n_qubits
    dim = 2**n
    u = np.eye(dim, dtype=np.complex128).reshape((2,) * n + (dim,))
    for g in c.gates():
        u = apply_to_axes(u, g.unitary(), g.qubits)
    return u.reshape(dim, dim)


def circuits_equal(a: NoisyCircuit, b: NoisyCircuit) -> bool:
    """Structural equality: same wires, same elements with identical data.

    Channel labels are ignored; Kraus matrices are compared exactly
    (round-trips through the text format are bit-exact).
    """
    if a.n_qubits != b.n_qubits or len(a.elements) != len(b.elements):
        return False
    for x, y in zip(a.elements, b.elements):
        if isinstance(x, Gate) != isinstance(y, Gate):
            return False
        if isinstance(x, Gate):
            if x.kind != y.kind or x.qubits != y.qubits or x.param != y.param:
                return False
            if (x.matrix is None) != (y.matrix is None):
                return False
            if x.matrix is not None and not np.array_equal(x.matrix, y.matrix):
                return False
        else:
            if x.qubits != y.qubits or x.channel.arity != y.channel.arity:
                return False
            if len(x.channel.kraus) != len(y.channel.kraus):
                return False
            for e, f in zip(x.channel.kraus, y.channel.kraus):
                if not np.array_equal(e, f):
                    return False
    return True
