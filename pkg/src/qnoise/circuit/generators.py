"""Benchmark circuit generators.

All generators return noiseless circuits in the IR; noise is layered on
afterwards with a :class:`~qnoise.circuit.policy.NoisePolicy`.
"""

from __future__ import annotations

import math

from ..errors import ValidationError
from ..rng import STREAM_GENERATOR, index_in, make_rng
from .ir import Gate, NoisyCircuit


def gen_bv(n: int, secret: str) -> NoisyCircuit:
    """Bernstein-Vazirani circuit for an n-bit secret.

    Uses n data qubits plus one ancilla (qubit n) prepared with an X so
    the CX oracle kicks back phases; on input |0...0> the output is the
    basis state ``secret + '1'`` with probability 1.
    """
    if n < 1:
        raise ValidationError("gen_bv needs n >= 1")
    if len(secret) != n or any(b not in "01" for b in secret):
        raise ValidationError(f"secret must be {n} bits of 0/1, got {secret!r}")
    anc = n
    els: list[Gate] = [Gate("x", (anc,))]
    els += [Gate("h", (q,)) for q in range(n + 1)]
    els += [Gate("cx", (q, anc)) for q in range(n) if secret[q] == "1"]
    els += [Gate("h", (q,)) for q in range(n + 1)]
    return NoisyCircuit(n + 1, tuple(els), name=f"bv_{n}")


def _cphase(a: int, b: int, phi: float) -> list[Gate]:
    # controlled-phase diag(1,1,1,e^{i phi}) up to a global phase e^{-i phi/4},
    # realized over {rz, cx} to keep the gate set minimal.
    return [
        Gate("rz", (a,), phi / 2.0),
        Gate("rz", (b,), phi / 2.0),
        Gate("cx", (a, b)),
        Gate("rz", (b,), -phi / 2.0),
        Gate("cx", (a, b)),
    ]


def gen_qft(n: int) -> NoisyCircuit:
    """Quantum Fourier transform with the standard swap network.

    With qubit 0 as the most significant bit, the circuit unitary equals
    the 2^n-dimensional DFT matrix up to the global phase accumulated by
    the controlled-phase decomposition (exp(-i/4 * sum of angles)).
    """
    if n < 1:
        raise ValidationError("gen_qft needs n >= 1")
    els: list[Gate] = []
    for target in range(n):
        els.append(Gate("h", (target,)))
        for k, ctrl in enumerate(range(target + 1, n), start=2):
            els += _cphase(ctrl, target, 2.0 * math.pi / (2**k))
    for i in range(n // 2):
        a, b = i, n - 1 - i
        els += [Gate("cx", (a, b)), Gate("cx", (b, a)), Gate("cx", (a, b))]
    return NoisyCircuit(n, tuple(els), name=f"qft_{n}")


def gen_qaoa(
    n: int,
    edges: list[tuple[int, int]],
    gammas: list[float],
    betas: list[float],
) -> NoisyCircuit:
    """QAOA-style ansatz generalizing the 2-qubit reference layout.

    Preamble RY(-pi/2) then RZ(pi/2) on every qubit; per round, each
    edge contributes a CZ (the fixed ZZ coupling) followed by RZ(gamma)
    on the edge's second qubit, and the mixer applies RX(2*beta) on
    every qubit (beta = pi/2 reproduces the reference RX(pi) layer).
    """
    if n < 1:
        raise ValidationError("gen_qaoa needs n >= 1")
    if len(gammas) != len(betas) or not gammas:
        raise ValidationError("gen_qaoa needs equal, non-empty gammas and betas")
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise ValidationError(f"bad edge ({a},{b}) for {n} qubits")
    els: list[Gate] = []
    els += [Gate("ry", (q,), -math.pi / 2.0) for q in range(n)]
    els += [Gate("rz", (q,), math.pi / 2.0) for q in range(n)]
    for gamma, beta in zip(gammas, betas):
        for a, b in edges:
            els.append(Gate("cz", (a, b)))
            els.append(Gate("rz", (b,), gamma))
        els += [Gate("rx", (q,), 2.0 * beta) for q in range(n)]
    return NoisyCircuit(n, tuple(els), name=f"qaoa_{n}")


_INST_SINGLE = (("rx", math.pi / 2.0), ("ry", math.pi / 2.0), ("t", None))


def gen_random_inst(rows: int, cols: int, depth: int, seed: int) -> NoisyCircuit:
    """Supremacy-style random circuit on a rows x cols grid.

    Each layer applies a seeded choice from {RX(pi/2), RY(pi/2), T} to
    every qubit, then CZ on one of the four alternating grid-edge groups
    (right-even, right-odd, down-even, down-odd, cycling per layer).
    """
    if rows < 1 or cols < 1 or depth < 1:
        raise ValidationError("gen_random_inst needs rows, cols, depth >= 1")
    n = rows * cols
    rng = make_rng(seed, STREAM_GENERATOR)
    groups: list[list[tuple[int, int]]] = [[], [], [], []]
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                groups[c % 2].append((q, q + 1))
            if r + 1 < rows:
                groups[2 + r % 2].append((q, q + cols))
    els: list[Gate] = []
    for layer in range(depth):
        for q in range(n):
            kind, param = _INST_SINGLE[index_in(rng, 3)]
            els.append(Gate(kind, (q,), param))
        for a, b in groups[layer % 4]:
            els.append(Gate("cz", (a, b)))
    return NoisyCircuit(n, tuple(els), name=f"inst_{rows}x{cols}_{depth}")
