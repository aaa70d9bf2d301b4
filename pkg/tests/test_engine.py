import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import (
    US,
    NS,
    noisy_variant,
    random_circuit,
    random_noiseless,
    random_state_spec,
)
from qnoise.channels import decoherence, depolarizing
from qnoise.circuit import Gate, NoiseOp, NoisyCircuit, circuit_stats, gen_bv, gen_qaoa, parse_circuit
from qnoise.engine import (
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
from qnoise.errors import ValidationError
from qnoise.oracles import dense_fidelity, dense_simulate, dense_state, kraus_sum_exact


def bound_oracle(n1, n2, p, level, refined=True):
    """Exact-rational evaluation of the stated sums."""
    p = Fraction(p)
    n = n1 + n2
    total = Fraction(0)
    for u in range(level + 1, n + 1):
        if refined:
            for i1 in range(u + 1):
                if i1 > n1 or u - i1 > n2:
                    continue
                total += (
                    math.comb(n1, i1)
                    * math.comb(n2, u - i1)
                    * (4 * p) ** i1
                    * (16 * p) ** (u - i1)
                    * (1 + 4 * p) ** (n1 - i1)
                    * (1 + 16 * p) ** (n2 - (u - i1))
                )
        else:
            total += math.comb(n, u) * (16 * p) ** u * (1 + 16 * p) ** (n - u)
    return float(total)


class TestBounds:
    def test_empty_sum_at_full_level(self):
        assert error_bound(BoundParams(3, 1, 0.01, 4)) == 0.0
        assert error_bound(BoundParams(3, 1, 0.01, 4), refined=False) == 0.0

    def test_single_sum_against_rational_oracle(self):
        got = error_bound(BoundParams(20, 0, 0.001, 1), refined=False)
        want = bound_oracle(20, 0, Fraction(1, 1000), 1, refined=False)
        assert got == pytest.approx(want, rel=1e-12)

    def test_refined_against_rational_oracle(self):
        grids = itertools.product((0, 2, 5), (0, 1, 3), (0.0, 0.001, 0.02), (0, 1, 2))
        for n1, n2, p, level in grids:
            if level > n1 + n2:
                continue
            got = error_bound(BoundParams(n1, n2, p, level))
            want = bound_oracle(n1, n2, Fraction(p), level)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-300)

    def test_refined_no_looser_than_single_sum(self):
        for n1, n2, p, level in itertools.product(
            (0, 1, 4, 10), (0, 1, 3), (1e-4, 1e-3, 0.01, 0.05), (0, 1, 2)
        ):
            if level > n1 + n2:
                continue
            refined = error_bound(BoundParams(n1, n2, p, level))
            loose = error_bound(BoundParams(n1, n2, p, level), refined=False)
            assert refined <= loose + 1e-15

    def test_strictly_decreasing_in_level(self):
        for n1, n2, p in ((4, 0, 0.01), (2, 2, 0.002), (0, 3, 0.03)):
            n = n1 + n2
            vals = [error_bound(BoundParams(n1, n2, p, l)) for l in range(n + 1)]
            for a, b in zip(vals, vals[1:]):
                assert b < a
            assert vals[-1] == 0.0

    def test_param_validation(self):
        with pytest.raises(ValidationError):
            BoundParams(-1, 0, 0.1, 0)
        with pytest.raises(ValidationError):
            BoundParams(1, 0, 0.1, 2)


class TestTermCount:
    def test_trivial_level_zero(self):
        assert term_count(0, 0, 0) == 2
        assert term_count(5, 3, 0) == 2

    def test_6n_plus_2(self):
        for n in (1, 5, 20, 33):
            assert term_count(n, 0, 1) == 6 * n + 2

    def test_mixed_enumeration_oracle(self):
        # direct enumeration: choose which slots take a residual and which
        # residual index each takes
        def enumerate_count(arities, level):
            total = 0
            slots = range(len(arities))
            for u in range(level + 1):
                for subset in itertools.combinations(slots, u):
                    pools = [range(1, 4 ** arities[s]) for s in subset]
                    total += max(1, len(list(itertools.product(*pools)))) if subset else 1
            return 2 * total

        assert term_count(2, 1, 1) == 44
        assert term_count(2, 1, 1) == enumerate_count([1, 1, 2], 1)
        assert term_count(3, 2, 2) == enumerate_count([1, 1, 1, 2, 2], 2)

    def test_validation(self):
        with pytest.raises(ValidationError):
            term_count(-1, 0, 0)


class TestSimulateExact:
    def test_noiseless_bv(self):
        c = gen_bv(5, "10011")
        assert simulate_exact(c, "zeros", "100111") == pytest.approx(1.0, abs=1e-12)

    def test_qaoa_decoherence_vs_dense(self):
        base = gen_qaoa(2, [(0, 1)], [0.4], [np.pi / 2])
        els = list(base.elements)
        els.insert(3, NoiseOp(decoherence(200 * US, 30 * US, 25 * NS), (0,)))
        c = NoisyCircuit(2, tuple(els))
        assert simulate_exact(c, "zeros", "ideal") == pytest.approx(
            dense_simulate(c, "zeros", "ideal"), abs=1e-10
        )

    def test_depolarizing_only(self):
        for p in (0.01, 0.2):
            c = parse_circuit(f"qubits 1\nnoise depolarizing({p}) q0\n")
            assert simulate_exact(c, "0", "0") == pytest.approx(1 - 2 * p / 3, abs=1e-12)


class TestSimulateApprox:
    def setup_method(self):
        rng = np.random.default_rng(101)
        base = random_noiseless(rng, max_qubits=4, max_gates=10, min_qubits=4)
        els = list(base.elements)
        for pos, q in ((2, 0), (4, 2), (6, 3)):
            els.insert(pos, NoiseOp(depolarizing(0.01), (q,)))
        self.c = NoisyCircuit(4, tuple(els))
        self.exact = simulate_exact(self.c, "zeros", "ideal")

    def test_error_monotone_and_bounded(self):
        stats = circuit_stats(self.c)
        errs = []
        for level in range(4):
            rep = simulate_approx(self.c, "zeros", "ideal", level=level)
            err = abs(rep.value - self.exact)
            errs.append(err)
            assert err <= error_bound(BoundParams(3, 0, stats.max_noise_rate, level)) + 1e-12
            assert rep.contraction_count == term_count(3, 0, level)
            assert rep.value == pytest.approx(sum(rep.term_sums), abs=1e-12)
        assert errs[3] < 1e-9  # l = N collapse
        for a, b in zip(errs, errs[1:]):
            assert b <= a + 1e-12

    def test_noiseless_single_pattern(self):
        c = gen_qaoa(3, [(0, 1), (1, 2)], [0.3], [0.7])
        rep = simulate_approx(c, "zeros", "ideal", level=0)
        assert rep.value == pytest.approx(1.0, abs=1e-12)
        assert rep.contraction_count == 2
        assert rep.term_sums == (rep.value,)

    def test_level_above_noise_count_rejected(self):
        with pytest.raises(ValidationError):
            simulate_approx(self.c, "zeros", "ideal", level=4)

    def test_parallel_matches_serial_bitwise(self):
        rep1 = simulate_approx(self.c, "zeros", "ideal", level=2, workers=1)
        rep2 = simulate_approx(self.c, "zeros", "ideal", level=2, workers=2)
        assert rep1.value == rep2.value
        assert rep1.term_sums == rep2.term_sums

    def test_report_fields(self):
        rep = simulate_approx(self.c, "zeros", "ideal", level=1, seed=17)
        assert isinstance(rep, ApproxReport)
        assert rep.seed == 17
        assert rep.level == 1
        assert 0.0 <= rep.clamped <= 1.0
        assert rep.elapsed > 0


class TestFidelity:
    def test_identical_circuits(self):
        c = gen_qaoa(2, [(0, 1)], [0.25], [0.5])
        assert fidelity_exact(c, c) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_invariance(self):
        ideal = parse_circuit("qubits 1\nh q0\n")
        phase = np.exp(0.7j) * np.eye(2, dtype=complex)
        els = (Gate("h", (0,)), Gate("u1", (0,), matrix=phase))
        assert fidelity_exact(ideal, NoisyCircuit(1, els)) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_identical_noiseless_pair_at_level_zero(self):
        c = gen_qaoa(3, [(0, 1), (1, 2)], [0.4], [0.9])
        rep = fidelity_approx(c, c, level=0)
        assert rep.value == pytest.approx(1.0, abs=1e-12)
        assert rep.contraction_count == 2

    def test_full_level_collapse(self):
        rng = np.random.default_rng(303)
        for _ in range(5):
            ideal = random_noiseless(rng, max_qubits=3, max_gates=8)
            noisy = noisy_variant(rng, ideal, max_noises=2)
            n = len(noisy.noises())
            fe = fidelity_exact(ideal, noisy)
            rep = fidelity_approx(ideal, noisy, level=n)
            assert rep.value == pytest.approx(fe, abs=1e-9)
            assert rep.value == pytest.approx(dense_fidelity(ideal, noisy), abs=1e-9)

    def test_six_qubit_qaoa_bounds(self):
        ideal = gen_qaoa(6, [(i, i + 1) for i in range(5)], [0.4], [0.7])
        els = list(ideal.elements)
        for pos, q in ((3, 0), (7, 2), (11, 4), (15, 5)):
            els.insert(pos, NoiseOp(depolarizing(0.001), (q,)))
        noisy = NoisyCircuit(6, tuple(els))
        fe = fidelity_exact(ideal, noisy)
        for level in (0, 1, 2):
            rep = fidelity_approx(ideal, noisy, level=level)
            assert abs(rep.value - fe) <= error_bound(
                BoundParams(4, 0, 0.002, level)
            ) + 1e-12
            assert rep.contraction_count == term_count(4, 0, level)


class TestDensityMatrixEntry:
    def test_diagonal_matches_simulate(self):
        c = parse_circuit("qubits 2\nh q0\ncx q0 q1\nnoise depolarizing(0.1) q1\n")
        e = density_matrix_entry(c, "zeros", "11", "11")
        assert e.imag == pytest.approx(0.0, abs=1e-12)
        assert e.real == pytest.approx(simulate_exact(c, "zeros", "11"), abs=1e-12)

    def test_hadamard_off_diagonal(self):
        c = parse_circuit("qubits 1\nh q0\n")
        assert density_matrix_entry(c, "0", "0", "1") == pytest.approx(0.5, abs=1e-12)

    def test_against_dense_state(self):
        rng = np.random.default_rng(63)
        for _ in range(8):
            c = random_circuit(rng, max_qubits=3, max_gates=8, max_noises=2)
            n = c.n_qubits
            rho = dense_state(c, "zeros").rho
            x = format(int(rng.integers(2**n)), f"0{n}b")
            y = format(int(rng.integers(2**n)), f"0{n}b")
            got = density_matrix_entry(c, "zeros", x, y)
            want = rho[int(x, 2), int(y, 2)]
            assert got == pytest.approx(want, abs=1e-10)
            # Hermiticity of the reconstruction
            assert density_matrix_entry(c, "zeros", y, x) == pytest.approx(
                np.conj(got), abs=1e-10
            )


def test_custom_unitary_gates_through_engine():
    rng = np.random.default_rng(808)
    q1, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    q2, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    els = (
        Gate("u1", (0,), matrix=q1),
        NoiseOp(depolarizing(0.02), (0,)),
        Gate("u2", (2, 0), matrix=q2),
        Gate("h", (1,)),
    )
    c = NoisyCircuit(3, els)
    for v in ("ideal", "010", "+-+"):
        assert simulate_exact(c, "zeros", v) == pytest.approx(
            dense_simulate(c, "zeros", v), abs=1e-10
        )
    rep = simulate_approx(c, "zeros", "ideal", level=1)
    assert rep.value == pytest.approx(simulate_exact(c, "zeros", "ideal"), abs=1e-9)


def test_exact_matches_kraus_sum_beyond_dense_reach():
    # 8-qubit circuits exceed the dense-fidelity cap and stress the
    # contraction planner at sizes the density-matrix oracle avoids
    rng = np.random.default_rng(909)
    for _ in range(3):
        c = random_circuit(rng, max_qubits=8, max_gates=16, max_noises=2, min_qubits=7)
        psi = random_state_spec(rng, c.n_qubits)
        v = random_state_spec(rng, c.n_qubits)
        assert simulate_exact(c, psi, v) == pytest.approx(
            kraus_sum_exact(c, psi, v), abs=1e-9
        )


def test_error_bound_holds_on_random_circuits():
    rng = np.random.default_rng(505)
    for _ in range(15):
        c = random_circuit(rng, max_qubits=4, max_gates=10, max_noises=3)
        psi = random_state_spec(rng, c.n_qubits)
        v = random_state_spec(rng, c.n_qubits)
        stats = circuit_stats(c)
        exact = simulate_exact(c, psi, v)
        for level in range(stats.noise_count + 1):
            rep = simulate_approx(c, psi, v, level=level)
            bound = error_bound(
                BoundParams(
                    stats.single_qubit_noise_count,
                    stats.two_qubit_noise_count,
                    stats.max_noise_rate,
                    level,
                )
            )
            assert abs(rep.value - exact) <= bound + 1e-12
