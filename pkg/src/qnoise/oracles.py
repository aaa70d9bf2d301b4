"""Independent ground-truth engines.

These deliberately avoid the tensor-network code paths so they can
serve as oracles for it: dense density-matrix evolution, exhaustive
Kraus-branch enumeration, a dense Choi-state fidelity, and a quantum
trajectories Monte Carlo baseline with Hoeffding sample budgeting.

Fidelity convention: with one unitary argument the Jamiolkowski
fidelity is the squared overlap <Psi_U| rho_E |Psi_U> (Psi_U pure), the
same convention as the trace closed form used by the engine.  Size
caps (12 qubits dense simulation, 6 qubits dense fidelity, 10^6 Kraus
branches) keep the suite fast; k-local operators are applied by index
arithmetic, never by building 2^n x 2^n embeddings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit.ir import Gate, NoiseOp, NoisyCircuit, apply_to_axes
from .errors import ResourceLimitError, ValidationError
from .rng import STREAM_TRAJECTORIES, make_rng
from .states import IdealOutput, parse_state_spec

DENSE_SIM_MAX_QUBITS = 12
DENSE_FID_MAX_QUBITS = 6
KRAUS_ENUM_LIMIT = 10**6
_TRAJ_SHARD_ENTRIES = 2**22


@dataclass(frozen=True)
class DenseState:
    """Full density matrix with physicality checks."""

    n_qubits: int
    rho: np.ndarray

    def check(self, atol: float = 1e-9) -> None:
        tr = complex(np.trace(self.rho))
        if abs(tr - 1.0) > atol:
            raise ValidationError(f"density matrix trace {tr} is not 1")
        if np.abs(self.rho - self.rho.conj().T).max() > atol:
            raise ValidationError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(self.rho).min() < -atol:
            raise ValidationError("density matrix has a negative eigenvalue")


@dataclass(frozen=True)
class TrajectoryEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int


def _dense_vector(state, n: int) -> np.ndarray:
    return parse_state_spec(state, n).dense()


def _ideal_unitary_output(c: NoisyCircuit, psi_vec: np.ndarray) -> np.ndarray:
    phi = psi_vec.reshape((2,) * c.n_qubits)
    for g in c.gates():
        phi = apply_to_axes(phi, g.unitary(), g.qubits)
    return phi.reshape(-1)


def _resolve_v(c: NoisyCircuit, psi_vec: np.ndarray, v) -> np.ndarray:
    v_s = parse_state_spec(v, c.n_qubits)
    if isinstance(v_s, IdealOutput):
        return _ideal_unitary_output(c, psi_vec)
    return v_s.dense()


def dense_state(c: NoisyCircuit, psi, validate: bool = False) -> DenseState:
    """Evolve the full density matrix through every circuit element."""
    n = c.n_qubits
    if n > DENSE_SIM_MAX_QUBITS:
        raise ResourceLimitError(
            f"dense simulation capped at {DENSE_SIM_MAX_QUBITS} qubits, got {n}"
        )
    psi_vec = _dense_vector(psi, n)
    rho = np.outer(psi_vec, psi_vec.conj()).reshape((2,) * (2 * n))
    for el in c.elements:
        if isinstance(el, Gate):
            u = el.unitary()
            rho = apply_to_axes(rho, u, el.qubits)
            rho = apply_to_axes(rho, u.conj(), tuple(q + n for q in el.qubits))
        else:
            acc = None
            for e in el.channel.kraus:
                term = apply_to_axes(rho, e, el.qubits)
                term = apply_to_axes(term, e.conj(), tuple(q + n for q in el.qubits))
                acc = term if acc is None else acc + term
            rho = acc
        if validate:
            DenseState(n, rho.reshape(2**n, 2**n)).check()
    return DenseState(n, rho.reshape(2**n, 2**n))


def dense_simulate(c: NoisyCircuit, psi, v, validate: bool = False) -> float:
    """<v| E(|psi><psi|) |v> by dense density-matrix evolution."""
    state = dense_state(c, psi, validate=validate)
    psi_vec = _dense_vector(psi, c.n_qubits)
    v_vec = _resolve_v(c, psi_vec, v)
    val = v_vec.conj() @ state.rho @ v_vec
    return float(val.real)


def kraus_sum_exact(c: NoisyCircuit, psi, v) -> float:
    """Sum |<v| E_dk_d ... E_1k_1 |psi>|^2 over every Kraus assignment."""
    n = c.n_qubits
    branches = 1
    for el in c.noises():
        branches *= len(el.channel.kraus)
        if branches > KRAUS_ENUM_LIMIT:
            raise ResourceLimitError(
                f"Kraus enumeration exceeds {KRAUS_ENUM_LIMIT} branches"
            )
    psi_vec = _dense_vector(psi, n)
    v_vec = _resolve_v(c, psi_vec, v)

    total = 0.0
    noise_positions = [i for i, el in enumerate(c.elements) if isinstance(el, NoiseOp)]
    counts = [len(c.elements[i].channel.kraus) for i in noise_positions]

    def rec(pos: int, phi: np.ndarray, branch_idx: int):
        nonlocal total
        for i in range(pos, len(c.elements)):
            el = c.elements[i]
            if isinstance(el, Gate):
                phi = apply_to_axes(phi, el.unitary(), el.qubits)
            else:
                for k in range(counts[branch_idx]):
                    rec_phi = apply_to_axes(phi, el.channel.kraus[k], el.qubits)
                    rec(i + 1, rec_phi, branch_idx + 1)
                return
        amp = v_vec.conj() @ phi.reshape(-1)
        total += float(abs(amp) ** 2)

    rec(0, psi_vec.reshape((2,) * n), 0)
    return total


def _maximally_entangled(n: int) -> np.ndarray:
    dim = 2**n
    psi = np.zeros(dim * dim, dtype=np.complex128)
    for i in range(dim):
        psi[i * dim + i] = 1.0
    return psi / math.sqrt(dim)


def dense_fidelity(ideal: NoisyCircuit, noisy: NoisyCircuit) -> float:
    """Jamiolkowski fidelity via dense Choi states.

    Builds rho_E = (I (x) E)(|Psi><Psi|) on 2n qubits and returns
    <Psi_U| rho_E |Psi_U> with |Psi_U> = (I (x) U)|Psi>.
    """
    n = ideal.n_qubits
    if n != noisy.n_qubits:
        raise ValidationError("width mismatch between ideal and noisy circuits")
    if ideal.has_noise:
        raise ValidationError("the ideal circuit must be noiseless")
    if n > DENSE_FID_MAX_QUBITS:
        raise ResourceLimitError(
            f"dense fidelity capped at {DENSE_FID_MAX_QUBITS} qubits, got {n}"
        )
    omega = _maximally_entangled(n)
    rho = np.outer(omega, omega.conj()).reshape((2,) * (4 * n))
    # the channel acts on the second register: qubits n..2n-1
    for el in noisy.elements:
        if isinstance(el, Gate):
            u = el.unitary()
            qs = tuple(q + n for q in el.qubits)
            rho = apply_to_axes(rho, u, qs)
            rho = apply_to_axes(rho, u.conj(), tuple(q + 2 * n for q in qs))
        else:
            qs = tuple(q + n for q in el.qubits)
            acc = None
            for e in el.channel.kraus:
                term = apply_to_axes(rho, e, qs)
                term = apply_to_axes(term, e.conj(), tuple(q + 2 * n for q in qs))
                acc = term if acc is None else acc + term
            rho = acc
    psi_u = omega.reshape((2,) * (2 * n))
    for g in ideal.gates():
        psi_u = apply_to_axes(psi_u, g.unitary(), tuple(q + n for q in g.qubits))
    psi_u = psi_u.reshape(-1)
    val = psi_u.conj() @ rho.reshape(4**n, 4**n) @ psi_u
    return float(val.real)


def trajectories(c: NoisyCircuit, psi, v, samples: int, seed: int) -> TrajectoryEstimate:
    """Quantum-trajectories Monte Carlo estimate of <v|E(|psi><psi|)|v>.

    Per sample the state vector evolves through the gates; at each noise
    a Kraus branch is drawn with probability |E_k phi|^2 and the state
    renormalized.  Samples are batched into shards processed with their
    own derived stream (seed, STREAM_TRAJECTORIES + shard), so the
    estimate is deterministic per seed and independent of shard size
    only through the documented sharding.
    """
    if samples < 1:
        raise ValidationError("trajectories needs samples >= 1")
    n = c.n_qubits
    psi_vec = _dense_vector(psi, n)
    v_vec = _resolve_v(c, psi_vec, v)

    shard_size = max(1, min(samples, _TRAJ_SHARD_ENTRIES // (2**n)))
    values = np.empty(samples, dtype=np.float64)
    done = 0
    shard = 0
    while done < samples:
        count = min(shard_size, samples - done)
        values[done : done + count] = _run_shard(c, psi_vec, v_vec, count, seed, shard)
        done += count
        shard += 1
    mean = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return TrajectoryEstimate(mean=mean, std_error=std_error, samples=samples, seed=seed)


def _run_shard(c, psi_vec, v_vec, count, seed, shard) -> np.ndarray:
    n = c.n_qubits
    rng = make_rng(seed, STREAM_TRAJECTORIES + shard)
    batch = np.broadcast_to(psi_vec, (count, 2**n)).copy()
    batch = batch.reshape((count,) + (2,) * n)
    for el in c.elements:
        if isinstance(el, Gate):
            qs = tuple(q + 1 for q in el.qubits)
            batch = apply_to_axes(batch, el.unitary(), qs)
        else:
            qs = tuple(q + 1 for q in el.qubits)
            branches = [apply_to_axes(batch, e, qs) for e in el.channel.kraus]
            flat = [b.reshape(count, -1) for b in branches]
            probs = np.stack([np.sum(np.abs(f) ** 2, axis=1) for f in flat], axis=1)
            cum = np.cumsum(probs, axis=1)
            draws = rng.random(count) * cum[:, -1]
            pick = np.minimum(
                (draws[:, None] >= cum).sum(axis=1), len(branches) - 1
            )
            # zero-norm branch cannot be drawn (its cumulative step is
            # empty); fall forward to the next index defensively anyway
            norms = np.sqrt(probs[np.arange(count), pick])
            for _ in range(len(branches)):
                bad = norms < 1e-150
                if not bad.any():
                    break
                pick = np.where(bad, (pick + 1) % len(branches), pick)
                norms = np.sqrt(probs[np.arange(count), pick])
            out = np.empty_like(flat[0])
            for k in range(len(branches)):
                mask = pick == k
                if mask.any():
                    out[mask] = flat[k][mask] / norms[mask, None]
            batch = out.reshape((count,) + (2,) * n)
    amps = batch.reshape(count, -1) @ v_vec.conj()
    return np.abs(amps) ** 2


def hoeffding_samples(delta: float, confidence: float = 0.99) -> int:
    """Samples for accuracy delta at the given confidence (Hoeffding)."""
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must be in (0, 1), got {delta}")
    if not 0.0 < confidence < 1.0:
        raise ValidationError(f"confidence must be in (0, 1), got {confidence}")
    return math.ceil(math.log(1.0 / (1.0 - confidence)) / (2.0 * delta * delta))
