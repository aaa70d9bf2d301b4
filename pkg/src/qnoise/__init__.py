"""Noisy quantum circuit simulation and approximate equivalence checking.

Core pipeline: circuits (IR + text format + generators + noise
policies) -> doubled tensor networks -> exact contraction or the
level-l low-rank approximation built from SVD factorizations of each
noise channel's doubled-space matrix, with independent dense/Kraus/
trajectory oracles for verification.
"""

from .channels import (
    FactorDecomposition,
    KrausChannel,
    SuperOpMatrix,
    amplitude_damping,
    decoherence,
    decompose,
    depolarizing,
    dominant,
    matrix_rep,
    noise_rate,
    phase_damping,
    reshuffle,
    two_qubit_depolarizing,
    unitary_channel,
    zz_crosstalk,
)
from .circuit import (
    CouplingGraph,
    Gate,
    NoiseOp,
    NoisePolicy,
    NoisyCircuit,
    apply_noise_policy,
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
from .engine import (
    ApproxReport,
    BoundParams,
    density_matrix_entry,
    error_bound,
    fidelity_approx,
    fidelity_exact,
    simulate_approx,
    simulate_exact,
    term_count,
)
from .errors import (
    CircuitSyntaxError,
    InvalidChannelError,
    QnoiseError,
    ResourceLimitError,
    ValidationError,
)
from .linalg import SvdResult, kron, spectral_norm, svd
from .oracles import (
    DenseState,
    TrajectoryEstimate,
    dense_fidelity,
    dense_simulate,
    dense_state,
    hoeffding_samples,
    kraus_sum_exact,
    trajectories,
)
from .states import IdealOutput, ProductState, basis_state, product_state
from .tensornet import (
    Network,
    NoiseSlot,
    Tensor,
    build_doubled_network,
    build_fidelity_network,
    contract,
    split_components,
    substitute,
)

__version__ = "0.1.0"
