"""Request handlers shared by the HTTP routes and the CLI thin client.

Each handler takes a request model and returns a response model; all
domain errors surface as :class:`~qnoise.errors.QnoiseError` subclasses,
which the service maps to structured error payloads and the CLI maps to
exit codes.
"""

from __future__ import annotations

import math
import time
import warnings as _warnings

import numpy as np

from .. import engine, oracles
from ..channels import decompose, matrix_rep, noise_rate, reshuffle
from ..circuit import (
    NoisyCircuit,
    apply_noise_policy,
    channel_from_spec,
    circuit_stats,
    emit_circuit,
    gen_bv,
    gen_qaoa,
    gen_qft,
    gen_random_inst,
    parse_circuit,
    parse_coupling_graph,
    parse_policy,
)
from ..errors import CircuitSyntaxError, QnoiseError, ResourceLimitError, ValidationError
from . import models

PHASE_CONVENTION = (
    "each left singular vector is rotated so its largest-magnitude entry is "
    "real non-negative, with the compensating phase applied to the right "
    "vector; singular values below 1e-12 of the maximum are dropped"
)


def error_kind(exc: QnoiseError) -> str:
    if isinstance(exc, CircuitSyntaxError):
        return "parse"
    if isinstance(exc, ResourceLimitError):
        return "resource"
    if isinstance(exc, ValidationError):
        return "validation"
    return "internal"


def _stats_model(c: NoisyCircuit) -> models.CircuitStatsModel:
    s = circuit_stats(c)
    return models.CircuitStatsModel(
        n_qubits=s.n_qubits,
        gate_count=s.gate_count,
        single_qubit_noise_count=s.single_qubit_noise_count,
        two_qubit_noise_count=s.two_qubit_noise_count,
        max_noise_rate=s.max_noise_rate,
    )


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        return engine.default_workers()
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    return workers


class _CollectWarnings:
    """Capture NumericsWarning messages for the report."""

    def __init__(self):
        self.messages: list[str] = []

    def __enter__(self):
        self._ctx = _warnings.catch_warnings(record=True)
        self._records = self._ctx.__enter__()
        _warnings.simplefilter("always", engine.NumericsWarning)
        return self

    def __exit__(self, *exc):
        for r in self._records:
            if issubclass(r.category, engine.NumericsWarning):
                self.messages.append(str(r.message))
        return self._ctx.__exit__(*exc)


def run_simulate(req: models.SimulateRequest) -> models.SimulateReport:
    c = parse_circuit(req.circuit)
    workers = _resolve_workers(req.workers)
    t0 = time.perf_counter()
    level = None
    term_sums = None
    bound = None
    contraction_count = None
    samples = None
    std_error = None

    with _CollectWarnings() as warns:
        if req.mode == "exact":
            value = engine.simulate_exact(c, req.psi, req.v, mem_budget=req.mem_budget)
        elif req.mode == "approx":
            rep = engine.simulate_approx(
                c,
                req.psi,
                req.v,
                level=req.level,
                workers=workers,
                mem_budget=req.mem_budget,
                seed=req.seed,
            )
            value = rep.value
            level = rep.level
            term_sums = list(rep.term_sums)
            bound = rep.bound
            contraction_count = rep.contraction_count
        elif req.mode == "dense":
            value = oracles.dense_simulate(c, req.psi, req.v)
        elif req.mode == "kraus-sum":
            value = oracles.kraus_sum_exact(c, req.psi, req.v)
        else:  # trajectories
            samples = req.samples
            if samples is None:
                if req.delta is None:
                    raise ValidationError(
                        "trajectories mode needs --samples or --delta"
                    )
                samples = oracles.hoeffding_samples(req.delta)
            est = oracles.trajectories(c, req.psi, req.v, samples, req.seed)
            value = est.mean
            std_error = est.std_error

    return models.SimulateReport(
        mode=req.mode,
        value=value,
        clamped=min(1.0, max(0.0, value)),
        psi=req.psi,
        v=req.v,
        seed=req.seed,
        workers=workers,
        elapsed_seconds=time.perf_counter() - t0,
        circuit_stats=_stats_model(c),
        level=level,
        term_sums=term_sums,
        bound=bound,
        contraction_count=contraction_count,
        samples=samples,
        std_error=std_error,
        delta=req.delta,
        warnings=warns.messages,
    )


def run_eqcheck(req: models.EqcheckRequest) -> models.EqcheckReport:
    ideal = parse_circuit(req.ideal)
    noisy = parse_circuit(req.circuit)
    workers = _resolve_workers(req.workers)
    t0 = time.perf_counter()
    level = None
    term_sums = None
    bound = None
    contraction_count = None

    with _CollectWarnings() as warns:
        if req.mode == "exact":
            value = engine.fidelity_exact(ideal, noisy, mem_budget=req.mem_budget)
        elif req.mode == "approx":
            rep = engine.fidelity_approx(
                ideal,
                noisy,
                level=req.level,
                workers=workers,
                mem_budget=req.mem_budget,
                seed=req.seed,
            )
            value = rep.value
            level = rep.level
            term_sums = list(rep.term_sums)
            bound = rep.bound
            contraction_count = rep.contraction_count
        else:
            value = oracles.dense_fidelity(ideal, noisy)

    equivalent = None
    if req.threshold is not None:
        equivalent = bool(value >= 1.0 - req.threshold)
    return models.EqcheckReport(
        mode=req.mode,
        fidelity=value,
        clamped=min(1.0, max(0.0, value)),
        seed=req.seed,
        workers=workers,
        elapsed_seconds=time.perf_counter() - t0,
        circuit_stats=_stats_model(noisy),
        level=level,
        term_sums=term_sums,
        bound=bound,
        contraction_count=contraction_count,
        threshold=req.threshold,
        equivalent_within=equivalent,
        warnings=warns.messages,
    )


def _complex_matrix_json(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def run_decompose(req: models.DecomposeRequest) -> models.DecomposeReport:
    channel = channel_from_spec(req.channel)
    s = matrix_rep(channel)
    dec = decompose(s)
    recon_err = float(np.abs(dec.reconstruct() - s.matrix).max())
    return models.DecomposeReport(
        channel=req.channel,
        arity=channel.arity,
        noise_rate=noise_rate(channel),
        matrix_rep=_complex_matrix_json(s.matrix),
        reshuffled=_complex_matrix_json(reshuffle(s)),
        singular_values=[float(x) for x in dec.singular_values],
        terms=[
            models.FactorTermModel(
                singular_value=float(sv),
                left=_complex_matrix_json(u),
                right=_complex_matrix_json(v),
            )
            for sv, (u, v) in zip(dec.singular_values, dec.terms)
        ],
        reconstruction_error=recon_err,
        phase_convention=PHASE_CONVENTION,
    )


def _parse_edges(spec: str, n: int) -> list[tuple[int, int]]:
    if spec == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if spec == "ring":
        edges = [(i, i + 1) for i in range(n - 1)]
        if n > 2:
            edges.append((n - 1, 0))
        return edges
    edges = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split("-")
        if len(bits) != 2:
            raise ValidationError(f"bad edge {part!r} (expected like 0-1)")
        try:
            edges.append((int(bits[0]), int(bits[1])))
        except ValueError:
            raise ValidationError(f"bad edge {part!r} (expected like 0-1)") from None
    if not edges:
        raise ValidationError("empty edge list")
    return edges


def run_gen(req: models.GenRequest) -> models.GenResponse:
    if req.family == "bv":
        if req.n is None or req.secret is None:
            raise ValidationError("gen bv needs --n and --secret")
        c = gen_bv(req.n, req.secret)
    elif req.family == "qft":
        if req.n is None:
            raise ValidationError("gen qft needs --n")
        c = gen_qft(req.n)
    elif req.family == "qaoa":
        if req.n is None:
            raise ValidationError("gen qaoa needs --n")
        edges = _parse_edges(req.edges or "linear", req.n)
        layers = req.layers
        gammas = req.gammas if req.gammas is not None else [0.5] * layers
        betas = req.betas if req.betas is not None else [math.pi / 2.0] * layers
        c = gen_qaoa(req.n, edges, gammas, betas)
    else:
        if req.rows is None or req.cols is None or req.depth is None:
            raise ValidationError("gen inst needs --rows, --cols and --depth")
        c = gen_random_inst(req.rows, req.cols, req.depth, req.seed)

    if req.policy:
        graph = parse_coupling_graph(req.graph) if req.graph else None
        policy = parse_policy(req.policy, graph)
        c = apply_noise_policy(c, policy)

    return models.GenResponse(
        circuit=emit_circuit(c),
        name=c.name,
        seed=req.seed,
        policy=req.policy,
        stats=_stats_model(c),
    )


def run_bench(req: models.BenchRequest) -> models.BenchReport:
    noisy = parse_circuit(req.circuit)
    workers = _resolve_workers(req.workers)
    ideal = parse_circuit(req.ideal) if req.ideal else None
    if req.task in ("eqcheck", "both") and ideal is None:
        raise ValidationError("bench eqcheck needs --ideal")
    rows: list[models.BenchRow] = []
    with _CollectWarnings() as warns:
        for level in req.levels:
            if req.task in ("simulate", "both"):
                rep = engine.simulate_approx(
                    noisy, req.psi, req.v, level=level, workers=workers,
                    mem_budget=req.mem_budget, seed=req.seed,
                )
                rows.append(
                    models.BenchRow(
                        task="simulate",
                        level=level,
                        value=rep.value,
                        bound=rep.bound,
                        contraction_count=rep.contraction_count,
                        elapsed_seconds=rep.elapsed,
                    )
                )
            if req.task in ("eqcheck", "both"):
                rep = engine.fidelity_approx(
                    ideal, noisy, level=level, workers=workers,
                    mem_budget=req.mem_budget, seed=req.seed,
                )
                rows.append(
                    models.BenchRow(
                        task="eqcheck",
                        level=level,
                        value=rep.value,
                        bound=rep.bound,
                        contraction_count=rep.contraction_count,
                        elapsed_seconds=rep.elapsed,
                    )
                )
    return models.BenchReport(
        seed=req.seed,
        workers=workers,
        circuit_stats=_stats_model(noisy),
        rows=rows,
        warnings=warns.messages,
    )
