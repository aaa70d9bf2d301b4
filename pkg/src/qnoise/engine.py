"""Simulation and equivalence-checking algorithms.

Exact values come from one full contraction of the doubled (or
trace-closed) network.  The level-l approximation A(l) substitutes
every noise slot with factors from its SVD decomposition: for each
subset of at most l slots, the chosen slots take one residual factor
each (indices enumerated over the full theoretical range, 3 per
single-qubit and 15 per two-qubit slot) and all others take the
dominant factor.  Every substitution pattern disconnects the two
copies, so its value is a product of independent component
contractions; one contraction plan is compiled per run and re-executed
with rebound factor tensors.

Patterns are enumerated in a fixed order (level ascending, subsets
lexicographic, residual indices ascending) and summed in that order
regardless of worker count, so results are bit-reproducible.
Residual indices beyond a slot's nonzero singular values contribute
exactly zero and short-circuit; the reported contraction count is the
analytic schedule size 2 * sum C(N1,i1) C(N2,u-i1) 3^i1 15^(u-i1), which
is what :func:`term_count` returns.
"""

from __future__ import annotations

import itertools
import math
import os
import time
import warnings as _warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import FactorDecomposition, decompose, matrix_rep
from .circuit.ir import NoisyCircuit, circuit_stats
from .errors import ValidationError
from .states import basis_state
from .tensornet import (
    CompiledPlan,
    build_doubled_network,
    build_fidelity_network,
    compile_plan,
    execute_plan,
    _substitute_indexed,
)

IMAG_TOL = 1e-9
RANGE_TOL = 1e-9
_PARALLEL_MIN_PATTERNS = 64


class NumericsWarning(UserWarning):
    """Raised when a physical scalar carries unexpected imaginary residue
    or falls outside its physical range by more than the tolerance."""


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the precision bound: noise counts, max rate, level."""

    n1: int
    n2: int
    p: float
    level: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValidationError("noise counts must be non-negative")
        if self.p < 0.0:
            raise ValidationError("noise rate must be non-negative")
        if not 0 <= self.level <= self.n1 + self.n2:
            raise ValidationError(
                f"level must be in [0, {self.n1 + self.n2}], got {self.level}"
            )


def error_bound(bp: BoundParams, refined: bool = True) -> float:
    """Upper bound on |exact - A(l)|.

    The loose form is sum_{u=l+1}^N C(N,u) (16p)^u (1+16p)^(N-u); the
    refined form splits the count by noise arity with per-arity factors
    4p / 16p and (1+4p) / (1+16p).
    """
    n1, n2, p, level = bp.n1, bp.n2, bp.p, bp.level
    n = n1 + n2
    total = 0.0
    for u in range(level + 1, n + 1):
        if refined:
            for i1 in range(0, u + 1):
                if i1 > n1 or u - i1 > n2:
                    continue
                total += (
                    math.comb(n1, i1)
                    * math.comb(n2, u - i1)
                    * (4.0 * p) ** i1
                    * (16.0 * p) ** (u - i1)
                    * (1.0 + 4.0 * p) ** (n1 - i1)
                    * (1.0 + 16.0 * p) ** (n2 - (u - i1))
                )
        else:
            total += math.comb(n, u) * (16.0 * p) ** u * (1.0 + 16.0 * p) ** (n - u)
    return total


def term_count(n1: int, n2: int, level: int) -> int:
    """Exact number of component contractions the level-l run schedules."""
    if n1 < 0 or n2 < 0 or level < 0:
        raise ValidationError("term_count arguments must be non-negative")
    total = 0
    for u in range(0, level + 1):
        for i1 in range(0, u + 1):
            if i1 > n1 or u - i1 > n2:
                continue
            total += math.comb(n1, i1) * math.comb(n2, u - i1) * 3**i1 * 15 ** (u - i1)
    return 2 * total


@dataclass(frozen=True)
class ApproxReport:
    """Result of one approximate run.

    ``value`` is the raw A(l) (or F(l)) and may fall slightly outside
    [0, 1]; ``clamped`` is the in-range convenience value.  ``value``
    equals the sum of ``term_sums``; ``contraction_count`` equals
    :func:`term_count` for the run's noise counts and level.
    """

    value: float
    level: int
    term_sums: tuple[float, ...]
    contraction_count: int
    bound: float
    elapsed: float
    seed: int | None = None
    workers: int = 1
    config: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.value))


def _physical_scalar(z: complex, what: str, warnings_out: list[str] | None = None) -> float:
    if abs(z.imag) > IMAG_TOL:
        msg = f"{what} has imaginary residue {z.imag:.3e} (truncated)"
        _warnings.warn(msg, NumericsWarning, stacklevel=3)
        if warnings_out is not None:
            warnings_out.append(msg)
    return float(z.real)


def _clamp_probability(x: float, what: str) -> float:
    if -RANGE_TOL <= x <= 1.0 + RANGE_TOL:
        return min(1.0, max(0.0, x))
    _warnings.warn(
        f"{what} = {x!r} lies outside [0, 1] beyond tolerance", NumericsWarning, stacklevel=3
    )
    return x


def simulate_exact(c: NoisyCircuit, psi="zeros", v="ideal", *, mem_budget=None) -> float:
    """<v| E(|psi><psi|) |v> by one full doubled-network contraction."""
    net, _ = build_doubled_network(c, psi, v)
    val = _contract_once(net, mem_budget)
    return _clamp_probability(_physical_scalar(val, "probability"), "probability")


def fidelity_exact(ideal: NoisyCircuit, noisy: NoisyCircuit, *, mem_budget=None) -> float:
    """Jamiolkowski fidelity 4^-n Tr((U^H (x) U^T) M_E) by contraction."""
    net, _ = build_fidelity_network(ideal, noisy)
    val = _contract_once(net, mem_budget) / 4**ideal.n_qubits
    return _clamp_probability(_physical_scalar(val, "fidelity"), "fidelity")


def _contract_once(net, mem_budget) -> complex:
    plan = compile_plan(net, mem_budget)
    return execute_plan(plan, [t.data for t in net.tensors], net.scalar)


def density_matrix_entry(c: NoisyCircuit, rho0, x: str, y: str) -> complex:
    """<x| E(rho0) |y> from four diagonal simulations.

    The measurement states (|x> +- |y>)/sqrt2 and (|x> +- i|y>)/sqrt2
    expand linearly into the four basis cross terms <a|E(rho0)|b>
    (a, b in {x, y}), which are shared across the four probabilities;
    x == y short-circuits to one exact simulation.
    """
    n = c.n_qubits
    if len(x) != n or len(y) != n:
        raise ValidationError("basis states must match the circuit width")
    if x == y:
        return complex(simulate_exact(c, rho0, basis_state(x)))
    e = {}
    for a, b in itertools.product((x, y), repeat=2):
        net, _ = build_doubled_network(c, rho0, basis_state(a), bra_v=basis_state(b))
        e[(a, b)] = _contract_once(net, None)
    s_plus = 0.5 * (e[(x, x)] + e[(x, y)] + e[(y, x)] + e[(y, y)]).real
    s_minus = 0.5 * (e[(x, x)] - e[(x, y)] - e[(y, x)] + e[(y, y)]).real
    s_plus_i = 0.5 * (e[(x, x)] + e[(y, y)]).real + 0.5 * (1j * (e[(x, y)] - e[(y, x)])).real
    s_minus_i = 0.5 * (e[(x, x)] + e[(y, y)]).real - 0.5 * (1j * (e[(x, y)] - e[(y, x)])).real
    return complex(
        0.5 * (s_plus - s_minus) + 0.5j * (s_minus_i - s_plus_i)
    )


# --- the approximation engine ---


@dataclass
class _Job:
    """Everything a worker needs to evaluate substitution patterns."""

    plan: CompiledPlan
    datas: list[np.ndarray]
    slot_positions: list[tuple[int, int]]  # (ket tensor idx, bra tensor idx) per slot
    slot_factors: list[list[tuple[np.ndarray, np.ndarray]]]  # reshaped factor tensors
    scalar: complex


_WORKER_JOB: _Job | None = None


def _init_worker(job: _Job) -> None:
    global _WORKER_JOB
    _WORKER_JOB = job


def _eval_patterns(job: _Job, patterns) -> list[tuple[int, complex]]:
    out = []
    for pid, assignment in patterns:
        out.append((pid, _eval_one(job, assignment)))
    return out


def _eval_patterns_worker(patterns) -> list[tuple[int, complex]]:
    return _eval_patterns(_WORKER_JOB, patterns)


def _eval_one(job: _Job, assignment: tuple[tuple[int, int], ...]) -> complex:
    datas = list(job.datas)
    for slot_id, term_idx in assignment:
        factors = job.slot_factors[slot_id]
        if term_idx >= len(factors):
            return 0.0 + 0j  # zero singular value: the term vanishes
        ket, bra = factors[term_idx]
        kpos, bpos = job.slot_positions[slot_id]
        datas[kpos] = ket
        datas[bpos] = bra
    return execute_plan(job.plan, datas, job.scalar)


def _pattern_stream(n_slots: int, theoretical: list[int], level: int):
    """(pattern id, level u, ((slot, term index), ...)) in the frozen order."""
    pid = 0
    for u in range(0, level + 1):
        for subset in itertools.combinations(range(n_slots), u):
            pools = [range(1, theoretical[s]) for s in subset]
            for combo in itertools.product(*pools):
                yield pid, u, tuple(zip(subset, combo))
                pid += 1


def default_workers() -> int:
    env = os.environ.get("QNOISE_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"QNOISE_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _approx_run(
    net,
    slots,
    decomps: list[FactorDecomposition],
    level: int,
    workers: int,
    mem_budget,
    scale: float,
) -> tuple[list[float], int, list[str]]:
    """Shared pattern loop for simulation and equivalence checking."""
    warnings_out: list[str] = []

    sub_net = net
    slot_positions: list[tuple[int, int]] = []
    for slot, dec in zip(slots, decomps):
        sub_net, kpos, bpos = _substitute_indexed(sub_net, slot, dec.dominant)
        slot_positions.append((kpos, bpos))

    plan = compile_plan(sub_net, mem_budget)
    datas = [t.data for t in sub_net.tensors]
    slot_factors = []
    for slot, dec in zip(slots, decomps):
        m = slot.arity
        factors = [
            (
                np.ascontiguousarray(u.reshape((2,) * (2 * m))),
                np.ascontiguousarray(v.reshape((2,) * (2 * m))),
            )
            for u, v in dec.terms
        ]
        slot_factors.append(factors)
    job = _Job(
        plan=plan,
        datas=datas,
        slot_positions=slot_positions,
        slot_factors=slot_factors,
        scalar=sub_net.scalar,
    )

    theoretical = [4**s.arity for s in slots]
    patterns = [
        (pid, assignment) for pid, _, assignment in _pattern_stream(len(slots), theoretical, level)
    ]
    levels = [u for _, u, _ in _pattern_stream(len(slots), theoretical, level)]

    if workers > 1 and len(patterns) >= _PARALLEL_MIN_PATTERNS:
        values = _run_parallel(job, patterns, workers)
    else:
        values = [v for _, v in _eval_patterns(job, patterns)]

    sums = [0.0 + 0j] * (level + 1)
    for (pid, _), u, val in zip(patterns, levels, values):
        sums[u] += val
    term_sums = [
        scale * _physical_scalar(s, f"level-{u} term sum", warnings_out)
        for u, s in enumerate(sums)
    ]
    return term_sums, len(patterns) * 2, warnings_out


def _run_parallel(job: _Job, patterns, workers: int) -> list[complex]:
    chunk = max(1, math.ceil(len(patterns) / (workers * 4)))
    chunks = [patterns[i : i + chunk] for i in range(0, len(patterns), chunk)]
    results: dict[int, complex] = {}
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(job,)
    ) as pool:
        for part in pool.map(_eval_patterns_worker, chunks):
            for pid, val in part:
                results[pid] = val
    # ordered reduction: identical to the serial sum
    return [results[pid] for pid, _ in patterns]


def _prepare_approx(c: NoisyCircuit, level: int):
    stats = circuit_stats(c)
    n_noise = stats.noise_count
    if not 0 <= level <= n_noise:
        raise ValidationError(
            f"level must be in [0, {n_noise}] for this circuit, got {level}"
        )
    decomps = [decompose(matrix_rep(el.channel)) for el in c.noises()]
    return stats, decomps


def simulate_approx(
    c: NoisyCircuit,
    psi="zeros",
    v="ideal",
    level: int = 1,
    *,
    workers: int = 1,
    mem_budget=None,
    seed: int | None = None,
) -> ApproxReport:
    """Level-l approximation of the noisy simulation value."""
    t0 = time.perf_counter()
    stats, decomps = _prepare_approx(c, level)
    net, slots = build_doubled_network(c, psi, v)
    term_sums, _, warns = _approx_run(
        net, slots, decomps, level, workers, mem_budget, scale=1.0
    )
    value = float(sum(term_sums))
    bound = error_bound(
        BoundParams(
            stats.single_qubit_noise_count,
            stats.two_qubit_noise_count,
            stats.max_noise_rate,
            level,
        )
    )
    return ApproxReport(
        value=value,
        level=level,
        term_sums=tuple(term_sums),
        contraction_count=term_count(
            stats.single_qubit_noise_count, stats.two_qubit_noise_count, level
        ),
        bound=bound,
        elapsed=time.perf_counter() - t0,
        seed=seed,
        workers=workers,
        config={"psi": getattr(psi, "spec", str(psi)), "v": getattr(v, "spec", str(v))},
        warnings=tuple(warns),
    )


def fidelity_approx(
    ideal: NoisyCircuit,
    noisy: NoisyCircuit,
    level: int = 1,
    *,
    workers: int = 1,
    mem_budget=None,
    seed: int | None = None,
) -> ApproxReport:
    """Level-l approximation of the Jamiolkowski fidelity F(l)."""
    t0 = time.perf_counter()
    stats, decomps = _prepare_approx(noisy, level)
    net, slots = build_fidelity_network(ideal, noisy)
    term_sums, _, warns = _approx_run(
        net, slots, decomps, level, workers, mem_budget, scale=1.0 / 4**ideal.n_qubits
    )
    value = float(sum(term_sums))
    bound = error_bound(
        BoundParams(
            stats.single_qubit_noise_count,
            stats.two_qubit_noise_count,
            stats.max_noise_rate,
            level,
        )
    )
    return ApproxReport(
        value=value,
        level=level,
        term_sums=tuple(term_sums),
        contraction_count=term_count(
            stats.single_qubit_noise_count, stats.two_qubit_noise_count, level
        ),
        bound=bound,
        elapsed=time.perf_counter() - t0,
        seed=seed,
        workers=workers,
        config={"ideal": ideal.name, "noisy": noisy.name},
        warnings=tuple(warns),
    )
