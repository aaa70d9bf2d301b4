from .generators import gen_bv, gen_qaoa, gen_qft, gen_random_inst
from .ir import (
    CircuitStats,
    CouplingGraph,
    Gate,
    NoiseOp,
    NoisyCircuit,
    circuit_stats,
    circuit_unitary,
    circuits_equal,
    gate_matrix,
    line_graph,
)
from .policy import NoisePolicy, apply_noise_policy, layer_circuit, parse_policy
from .textfmt import (
    channel_from_spec,
    emit_circuit,
    emit_coupling_graph,
    parse_circuit,
    parse_coupling_graph,
)

__all__ = [
    "CircuitStats",
    "CouplingGraph",
    "Gate",
    "NoiseOp",
    "NoisePolicy",
    "NoisyCircuit",
    "apply_noise_policy",
    "channel_from_spec",
    "circuit_stats",
    "circuit_unitary",
    "circuits_equal",
    "emit_circuit",
    "emit_coupling_graph",
    "gate_matrix",
    "gen_bv",
    "gen_qaoa",
    "gen_qft",
    "gen_random_inst",
    "layer_circuit",
    "line_graph",
    "parse_circuit",
    "parse_coupling_graph",
    "parse_policy",
]
