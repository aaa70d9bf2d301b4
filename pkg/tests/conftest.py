"""Shared helpers: seeded random circuits and channels for cross-engine checks."""

from __future__ import annotations

import numpy as np

from qnoise.channels import (
    KrausChannel,
    decoherence,
    depolarizing,
    two_qubit_depolarizing,
    zz_crosstalk,
)
from qnoise.circuit import Gate, NoiseOp, NoisyCircuit

US, NS = 1e-6, 1e-9

_SINGLE_FIXED = ["x", "y", "z", "h", "s", "t"]
_SINGLE_PARAM = ["rx", "ry", "rz"]
_DOUBLE = ["cx", "cz"]


def random_gate(rng: np.random.Generator, n: int) -> Gate:
    r = rng.random()
    if r < 0.45 or n == 1:
        if rng.random() < 0.5:
            return Gate(_SINGLE_FIXED[rng.integers(len(_SINGLE_FIXED))], (int(rng.integers(n)),))
        kind = _SINGLE_PARAM[rng.integers(3)]
        return Gate(kind, (int(rng.integers(n)),), float(rng.normal()))
    a, b = rng.choice(n, size=2, replace=False)
    if r < 0.9:
        return Gate(_DOUBLE[rng.integers(2)], (int(a), int(b)))
    return Gate("zz", (int(a), int(b)), float(rng.normal() * 0.5))


def random_noise_channel(rng: np.random.Generator, arity: int) -> KrausChannel:
    if arity == 1:
        if rng.random() < 0.5:
            return depolarizing(float(rng.uniform(1e-4, 0.05)))
        t2 = float(rng.uniform(10, 60)) * US
        return decoherence(200 * US, t2, float(rng.uniform(5, 50)) * NS)
    if rng.random() < 0.5:
        return two_qubit_depolarizing(float(rng.uniform(1e-4, 0.01)))
    return zz_crosstalk(float(rng.uniform(-0.1, 0.1)))


def random_circuit(
    rng: np.random.Generator,
    max_qubits: int = 6,
    max_gates: int = 20,
    max_noises: int = 4,
    min_qubits: int = 1,
) -> NoisyCircuit:
    n = int(rng.integers(min_qubits, max_qubits + 1))
    els: list = [random_gate(rng, n) for _ in range(int(rng.integers(1, max_gates + 1)))]
    for _ in range(int(rng.integers(0, max_noises + 1))):
        arity = 1 if n == 1 or rng.random() < 0.6 else 2
        ch = random_noise_channel(rng, arity)
        if arity == 1:
            qubits = (int(rng.integers(n)),)
        else:
            a, b = rng.choice(n, size=2, replace=False)
            qubits = (int(a), int(b))
        els.insert(int(rng.integers(len(els) + 1)), NoiseOp(ch, qubits))
    return NoisyCircuit(n, tuple(els))


def random_noiseless(rng: np.random.Generator, **kw) -> NoisyCircuit:
    c = random_circuit(rng, max_noises=0, **kw)
    return c


def random_state_spec(rng: np.random.Generator, n: int) -> str:
    return "".join(rng.choice(list("01+-rl")) for _ in range(n))


def noisy_variant(rng: np.random.Generator, ideal: NoisyCircuit, max_noises: int = 3) -> NoisyCircuit:
    """Insert catalog noise into a noiseless circuit."""
    n = ideal.n_qubits
    els = list(ideal.elements)
    for _ in range(int(rng.integers(1, max_noises + 1))):
        arity = 1 if n == 1 or rng.random() < 0.7 else 2
        ch = random_noise_channel(rng, arity)
        if arity == 1:
            qubits = (int(rng.integers(n)),)
        else:
            a, b = rng.choice(n, size=2, replace=False)
            qubits = (int(a), int(b))
        els.insert(int(rng.integers(len(els) + 1)), NoiseOp(ch, qubits))
    return NoisyCircuit(n, tuple(els))
