"""Dense labelled-axis tensor networks.

A network is a list of tensors with string-labelled axes (all dimension
2); a label shared by two tensors is a bond, a label appearing once is
an open axis, and a closed network contracts to a scalar.  The doubled
network of a noisy circuit carries the gates and input/measurement
states on a "ket" copy, their conjugates on a "bra" copy, and one
bridging tensor per noise (its doubled-space matrix); equivalence
checking closes every wire into a trace loop instead of capping it with
states.

Contraction planning is separated from execution so the approximation
engine can compile one plan per network shape and re-execute it with
substituted factor tensors.  Paths: exhaustive optimal search up to
``OPTIMAL_MAX_TENSORS`` tensors, otherwise greedy smallest-intermediate
with a deterministic lexicographic tie-break on bond labels.  The
largest allowed intermediate defaults to 2^30 complex entries;
exceeding it raises :class:`ResourceLimitError` naming the offending
axes.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .channels import matrix_rep
from .circuit.ir import Gate, NoisyCircuit
from .errors import ResourceLimitError, ValidationError
from .states import IdealOutput, parse_state_spec

DEFAULT_MEM_BUDGET = 2**30
OPTIMAL_MAX_TENSORS = 14
_CANCEL_TOL = 1e-12


@dataclass(frozen=True)
class Tensor:
    axes: tuple[str, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.data.shape != (2,) * len(self.axes):
            raise ValidationError(
                f"tensor data shape {self.data.shape} does not match axes {self.axes}"
            )


@dataclass(frozen=True)
class NoiseSlot:
    """A noise site bridging the two copies, substitutable by factors."""

    slot_id: int
    arity: int
    tensor_index: int
    ket_out: tuple[str, ...]
    ket_in: tuple[str, ...]
    bra_out: tuple[str, ...]
    bra_in: tuple[str, ...]


@dataclass(frozen=True)
class Network:
    tensors: tuple[Tensor, ...]
    scalar: complex = 1.0 + 0j
    substituted: frozenset[int] = frozenset()

    def bonds(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for i, t in enumerate(self.tensors):
            for a in t.axes:
                out.setdefault(a, []).append(i)
        return out

    def open_axes(self) -> list[str]:
        return [a for a, ts in self.bonds().items() if len(ts) == 1]


class _Labels:
    def __init__(self):
        self._n = itertools.count()

    def new(self) -> str:
        return f"b{next(self._n):06d}"


# --- building ---


def _gate_tensor(mat: np.ndarray, out_ax, in_ax) -> Tensor:
    m = len(out_ax)
    return Tensor(tuple(out_ax) + tuple(in_ax), mat.reshape((2,) * (2 * m)))


def _op_sequence(circuit: NoisyCircuit, append_ideal_inverse: bool):
    """Normalize a circuit into gate/noise ops; optionally append the
    inverse of its noiseless part and cancel adjacent inverse pairs."""
    ops: list[tuple] = []  # ("g", matrix, qubits) or ("n", channel, qubits, index)
    ni = 0
    for el in circuit.elements:
        if isinstance(el, Gate):
            ops.append(("g", el.unitary(), el.qubits))
        else:
            ops.append(("n", el.channel, el.qubits, ni))
            ni += 1
    if append_ideal_inverse:
        for el in reversed(circuit.elements):
            if isinstance(el, Gate):
                ops.append(("g", el.unitary().conj().T, el.qubits))
        ops = _cancel_inverse_pairs(ops)
    return ops


def _cancel_inverse_pairs(ops: list[tuple]) -> list[tuple]:
    """Drop gate pairs (A, B) on identical qubits with B @ A = I when only
    qubit-disjoint elements sit between them."""
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(ops):
            if ops[i][0] != "g":
                i += 1
                continue
            qubits = set(ops[i][2])
            for j in range(i + 1, len(ops)):
                if not qubits.intersection(ops[j][2]):
                    continue
                if (
                    ops[j][0] == "g"
                    and ops[j][2] == ops[i][2]
                    and np.allclose(
                        ops[j][1] @ ops[i][1],
                        np.eye(ops[i][1].shape[0]),
                        atol=_CANCEL_TOL,
                    )
                ):
                    del ops[j]
                    del ops[i]
                    changed = True
                    i -= 1
                break
            i += 1
    return ops


def _thread_ops(ops, n_qubits, labels):
    """Lay ops onto ket/bra wire copies; returns tensors, slots, wire axes."""
    ket_ax = [labels.new() for _ in range(n_qubits)]
    bra_ax = [labels.new() for _ in range(n_qubits)]
    ket_start = list(ket_ax)
    bra_start = list(bra_ax)
    tensors: list[Tensor] = []
    slots: list[NoiseSlot] = []
    for op in ops:
        if op[0] == "g":
            _, mat, qubits = op
            k_out = [labels.new() for _ in qubits]
            b_out = [labels.new() for _ in qubits]
            tensors.append(_gate_tensor(mat, k_out, [ket_ax[q] for q in qubits]))
            tensors.append(
                _gate_tensor(mat.conj(), b_out, [bra_ax[q] for q in qubits])
            )
            for q, ka, ba in zip(qubits, k_out, b_out):
                ket_ax[q] = ka
                bra_ax[q] = ba
        else:
            _, channel, qubits, idx = op
            m = len(qubits)
            k_out = tuple(labels.new() for _ in qubits)
            b_out = tuple(labels.new() for _ in qubits)
            k_in = tuple(ket_ax[q] for q in qubits)
            b_in = tuple(bra_ax[q] for q in qubits)
            mat = matrix_rep(channel).matrix
            tensors.append(Tensor(k_out + b_out + k_in + b_in, mat.reshape((2,) * (4 * m))))
            slots.append(
                NoiseSlot(
                    slot_id=idx,
                    arity=m,
                    tensor_index=len(tensors) - 1,
                    ket_out=k_out,
                    ket_in=k_in,
                    bra_out=b_out,
                    bra_in=b_in,
                )
            )
            for q, ka, ba in zip(qubits, k_out, b_out):
                ket_ax[q] = ka
                bra_ax[q] = ba
    return tensors, slots, ket_ax, bra_ax, ket_start, bra_start


def build_doubled_network(
    circuit: NoisyCircuit,
    psi,
    v,
    *,
    bra_v=None,
) -> tuple[Network, list[NoiseSlot]]:
    """Doubled network for <v| (x) <v*| (M_d ... M_1) |psi> (x) |psi*>.

    ``v`` may be a product state or ``"ideal"``/:class:`IdealOutput`, in
    which case the inverse of the circuit's noiseless part is appended
    (mutually inverse adjacent gate pairs cancel) and both copies are
    capped with psi.  ``bra_v`` optionally replaces the bra-copy
    measurement state: with basis states a = v and b = bra_v the closed
    network contracts to <a| E(|psi><psi|) |b>.
    """
    n = circuit.n_qubits
    psi_s = parse_state_spec(psi, n)
    if isinstance(psi_s, IdealOutput):
        raise ValidationError("psi must be a product state, not 'ideal'")
    v_s = parse_state_spec(v, n)
    if isinstance(v_s, IdealOutput):
        if bra_v is not None:
            raise ValidationError("bra_v cannot be combined with ideal-output mode")
        ops = _op_sequence(circuit, append_ideal_inverse=True)
        ket_v, bra_v_s = psi_s, psi_s
    else:
        ops = _op_sequence(circuit, append_ideal_inverse=False)
        ket_v = v_s
        bra_v_s = parse_state_spec(bra_v, n) if bra_v is not None else v_s
        if isinstance(bra_v_s, IdealOutput):
            raise ValidationError("bra_v must be a product state")

    labels = _Labels()
    tensors, slots, ket_ax, bra_ax, ket_start, bra_start = _thread_ops(ops, n, labels)
    for q in range(n):
        tensors.append(Tensor((ket_start[q],), psi_s.factors[q]))
        tensors.append(Tensor((bra_start[q],), psi_s.factors[q].conj()))
        tensors.append(Tensor((ket_ax[q],), ket_v.factors[q].conj()))
        tensors.append(Tensor((bra_ax[q],), bra_v_s.factors[q]))
    return Network(tensors=tuple(tensors)), slots


def build_fidelity_network(
    ideal: NoisyCircuit, noisy: NoisyCircuit
) -> tuple[Network, list[NoiseSlot]]:
    """Closed network computing Tr((U^H (x) U^T) M_E_chain).

    The 4^-n Jamiolkowski normalization is applied by the caller at
    result time, not baked into the tensors.
    """
    if ideal.n_qubits != noisy.n_qubits:
        raise ValidationError(
            f"width mismatch: ideal has {ideal.n_qubits} qubits, noisy {noisy.n_qubits}"
        )
    if ideal.has_noise:
        raise ValidationError("the ideal circuit must be noiseless")
    n = noisy.n_qubits

    ops = _op_sequence(noisy, append_ideal_inverse=False)
    for el in reversed(ideal.elements):
        ops.append(("g", el.unitary().conj().T, el.qubits))
    ops = _cancel_inverse_pairs(ops)

    labels = _Labels()
    tensors, slots, ket_ax, bra_ax, ket_start, bra_start = _thread_ops(ops, n, labels)
    scalar = 1.0 + 0j
    rename: dict[str, str] = {}
    for cur, start in ((ket_ax, ket_start), (bra_ax, bra_start)):
        for q in range(n):
            if cur[q] == start[q]:
                scalar *= 2.0  # bare wire trace
            else:
                # close the wire: rebind the final axis to the start label
                rename[cur[q]] = start[q]

    def ren(axes: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(rename.get(a, a) for a in axes)

    tensors = [replace(t, axes=ren(t.axes)) for t in tensors]
    slots = [
        replace(
            s,
            ket_out=ren(s.ket_out),
            ket_in=ren(s.ket_in),
            bra_out=ren(s.bra_out),
            bra_in=ren(s.bra_in),
        )
        for s in slots
    ]
    return Network(tensors=tuple(tensors), scalar=scalar), slots


# --- substitution and splitting ---


def _factor_tensors(slot: NoiseSlot, factor) -> tuple[Tensor, Tensor]:
    a, b = factor
    m = slot.arity
    dim = 2**m
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != (dim, dim) or b.shape != (dim, dim):
        raise ValidationError(
            f"factor shapes {a.shape}/{b.shape} do not match slot arity {m}"
        )
    ket = Tensor(slot.ket_out + slot.ket_in, a.reshape((2,) * (2 * m)))
    bra = Tensor(slot.bra_out + slot.bra_in, b.reshape((2,) * (2 * m)))
    return ket, bra


def substitute(net: Network, slot: NoiseSlot, factor) -> Network:
    """Replace a noise slot by a ket-copy factor A and bra-copy factor B,
    removing the bridge between the copies."""
    net2, _, _ = _substitute_indexed(net, slot, factor)
    return net2


def _substitute_indexed(net: Network, slot: NoiseSlot, factor):
    if slot.slot_id in net.substituted:
        raise ValidationError(f"noise slot {slot.slot_id} already substituted")
    ket, bra = _factor_tensors(slot, factor)
    tensors = list(net.tensors)
    tensors[slot.tensor_index] = ket
    tensors.append(bra)
    net2 = Network(
        tensors=tuple(tensors),
        scalar=net.scalar,
        substituted=net.substituted | {slot.slot_id},
    )
    return net2, slot.tensor_index, len(tensors) - 1


def split_components(net: Network) -> list[Network]:
    """Connected components as independent networks.

    The product of the component contractions (times the carried
    scalar, attached to the first component) equals the contraction of
    the whole network.
    """
    groups = _component_groups(net)
    out = []
    for gi, idxs in enumerate(groups):
        out.append(
            Network(
                tensors=tuple(net.tensors[i] for i in idxs),
                scalar=net.scalar if gi == 0 else 1.0 + 0j,
                substituted=net.substituted,
            )
        )
    if not out:
        out.append(Network(tensors=(), scalar=net.scalar))
    return out


def _component_groups(net: Network) -> list[list[int]]:
    parent = list(range(len(net.tensors)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for idxs in net.bonds().values():
        if len(idxs) > 2:
            raise ValidationError(f"axis label shared by {len(idxs)} tensors")
        if len(idxs) == 2:
            a, b = find(idxs[0]), find(idxs[1])
            if a != b:
                parent[b] = a
    groups: dict[int, list[int]] = {}
    for i in range(len(net.tensors)):
        groups.setdefault(find(i), []).append(i)
    return [groups[r] for r in sorted(groups, key=lambda r: min(groups[r]))]


# --- contraction planning and execution ---


@dataclass(frozen=True)
class CompiledPlan:
    """Reusable contraction schedule for one network shape.

    ``trace_steps`` collapses repeated labels within a tensor (trace
    loops landing on a single tensor); ``scalar_ids`` are inputs that
    are 0-dim after tracing; ``steps`` are pairwise tensordot
    instructions over ssa ids (inputs first, results appended).
    """

    n_inputs: int
    trace_steps: tuple[tuple[int, tuple[tuple[int, int], ...]], ...]
    scalar_ids: tuple[int, ...]
    steps: tuple[tuple[int, int, tuple[int, ...], tuple[int, ...]], ...]
    peak_size: int


def _trace_pairs(axes: tuple[str, ...]):
    """Positions to trace, applied sequentially, plus surviving axes."""
    pairs = []
    axes = list(axes)
    i = 0
    while i < len(axes):
        try:
            j = axes.index(axes[i], i + 1)
        except ValueError:
            i += 1
            continue
        pairs.append((i, j))
        del axes[j]
        del axes[i]
    return tuple(pairs), tuple(axes)


def compile_plan(net: Network, mem_budget: int | None = None) -> CompiledPlan:
    budget = DEFAULT_MEM_BUDGET if mem_budget is None else mem_budget
    effective: dict[int, tuple[str, ...]] = {}
    trace_steps = []
    scalar_ids = []
    for i, t in enumerate(net.tensors):
        pairs, axes = _trace_pairs(t.axes)
        if pairs:
            trace_steps.append((i, pairs))
        if axes:
            effective[i] = axes
        else:
            scalar_ids.append(i)

    counts: dict[str, int] = {}
    for axes in effective.values():
        for a in axes:
            counts[a] = counts.get(a, 0) + 1
    open_ax = sorted(a for a, c in counts.items() if c == 1)
    if open_ax:
        raise ValidationError(f"cannot contract a network with open axes: {open_ax}")

    # contract each connected group independently; ssa ids for
    # intermediates are numbered in global step order so execution can
    # append results to one buffer
    steps: list[tuple[int, int, tuple[int, ...], tuple[int, ...]]] = []
    peak = 1
    groups = _groups_from_axes(effective)
    for group in groups:
        if len(group) == 1:
            raise ValidationError("isolated tensor with open axes cannot contract")
        reg = {i: effective[i] for i in group}
        base = len(net.tensors) + len(steps)
        if len(group) <= OPTIMAL_MAX_TENSORS:
            order = _optimal_order(reg, base)
        else:
            order = _greedy_order(reg, base)
        last_id = None
        for k, (i, j) in enumerate(order):
            ai, aj = reg[i], reg[j]
            shared = set(ai) & set(aj)
            # position lists must be label-aligned, not positional
            shared_ordered = [a for a in ai if a in shared]
            pos_i = tuple(ai.index(a) for a in shared_ordered)
            pos_j = tuple(aj.index(a) for a in shared_ordered)
            out_axes = tuple(a for a in ai if a not in shared) + tuple(
                a for a in aj if a not in shared
            )
            size = 1 << len(out_axes)
            if size > budget:
                raise ResourceLimitError(
                    f"intermediate tensor over axes {sorted(out_axes)} needs "
                    f"{size} entries (budget {budget})"
                )
            peak = max(peak, size)
            steps.append((i, j, pos_i, pos_j))
            last_id = base + k
            reg[last_id] = out_axes
        if reg[last_id]:
            raise ValidationError("component did not contract to a scalar")
        scalar_ids.append(last_id)

    return CompiledPlan(
        n_inputs=len(net.tensors),
        trace_steps=tuple(trace_steps),
        scalar_ids=tuple(scalar_ids),
        steps=tuple(steps),
        peak_size=peak,
    )


def _groups_from_axes(effective: dict[int, tuple[str, ...]]) -> list[list[int]]:
    parent = {i: i for i in effective}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[str, int] = {}
    for i, axes in effective.items():
        for a in axes:
            if a in owner:
                ra, rb = find(owner[a]), find(i)
                if ra != rb:
                    parent[rb] = ra
            else:
                owner[a] = i
    groups: dict[int, list[int]] = {}
    for i in effective:
        groups.setdefault(find(i), []).append(i)
    return [sorted(groups[r]) for r in sorted(groups, key=lambda r: min(groups[r]))]


def _greedy_order(axes_now: dict[int, tuple[str, ...]], base: int):
    """Smallest-intermediate-first pairing with lexicographic bond tie-break."""
    axes = {i: frozenset(a) for i, a in axes_now.items()}
    neighbors: dict[str, list[int]] = {}
    for i, aset in axes.items():
        for a in aset:
            neighbors.setdefault(a, []).append(i)

    def candidate(i, j):
        shared = axes[i] & axes[j]
        out = axes[i] ^ axes[j]
        return (1 << len(out), tuple(sorted(shared)), i, j)

    heap = []
    seen = set()
    for ids in neighbors.values():
        if len(ids) == 2:
            pair = (min(ids), max(ids))
            if pair not in seen:
                seen.add(pair)
                heapq.heappush(heap, candidate(*pair))
    alive = set(axes)
    order = []
    next_id = base
    while len(alive) > 1:
        while heap:
            size, key, i, j = heapq.heappop(heap)
            if i in alive and j in alive:
                break
        else:
            raise ValidationError("greedy path: disconnected group")
        order.append((i, j))
        new_axes = axes[i] ^ axes[j]
        alive.discard(i)
        alive.discard(j)
        nid = next_id
        next_id += 1
        axes[nid] = new_axes
        alive.add(nid)
        touched = set()
        for a in new_axes:
            ids = [t for t in neighbors.get(a, []) if t in alive and t != nid]
            neighbors[a] = ids + [nid]
            touched.update(ids)
        for t in touched:
            pair = (min(t, nid), max(t, nid))
            heapq.heappush(heap, candidate(*pair))
    return order


def _optimal_order(axes_now: dict[int, tuple[str, ...]], base: int):
    """Exhaustive pairwise-contraction search minimizing (flops, peak)."""
    ids = sorted(axes_now)
    n = len(ids)
    leaf_axes = [frozenset(axes_now[i]) for i in ids]
    best: dict[int, tuple[int, int, object]] = {}
    for i in range(n):
        best[1 << i] = (0, 1 << len(leaf_axes[i]), i)
    axes_of: dict[int, frozenset] = {1 << i: leaf_axes[i] for i in range(n)}

    masks_by_count: dict[int, list[int]] = {}
    full = (1 << n) - 1
    for mask in range(1, full + 1):
        masks_by_count.setdefault(mask.bit_count(), []).append(mask)

    for count in range(2, n + 1):
        for mask in masks_by_count[count]:
            low = mask & -mask
            sub = (mask - 1) & mask
            entry = None
            while sub:
                if sub & low:
                    rest = mask ^ sub
                    if sub in best and rest in best:
                        a_ax, b_ax = axes_of[sub], axes_of[rest]
                        if a_ax & b_ax:
                            flops = 1 << len(a_ax | b_ax)
                            out_sz = 1 << len(a_ax ^ b_ax)
                            total = best[sub][0] + best[rest][0] + flops
                            peak = max(best[sub][1], best[rest][1], out_sz)
                            cand = (total, peak, (sub, rest))
                            if entry is None or cand[:2] < entry[:2]:
                                entry = cand
                sub = (sub - 1) & mask
            if entry is not None:
                best[mask] = entry
                a_ax, b_ax = axes_of[entry[2][0]], axes_of[entry[2][1]]
                axes_of[mask] = a_ax ^ b_ax

    if full not in best:
        raise ValidationError("optimal path: disconnected group")

    order: list[tuple[int, int]] = []
    next_id = [base]

    def emit(mask) -> int:
        tree = best[mask][2]
        if isinstance(tree, int):
            return ids[tree]
        a, b = tree
        ia, ib = emit(a), emit(b)
        order.append((ia, ib))
        nid = next_id[0]
        next_id[0] += 1
        return nid

    emit(full)
    return order


def execute_plan(plan: CompiledPlan, datas: list[np.ndarray], scalar: complex = 1.0) -> complex:
    buf: list = list(datas) + [None] * len(plan.steps)
    for idx, pairs in plan.trace_steps:
        d = buf[idx]
        for a, b in pairs:
            d = np.trace(d, axis1=a, axis2=b)
        buf[idx] = d
    nid = plan.n_inputs
    for i, j, pos_i, pos_j in plan.steps:
        buf[nid] = np.tensordot(buf[i], buf[j], axes=(pos_i, pos_j))
        nid += 1
    val = complex(scalar)
    for sid in plan.scalar_ids:
        val *= complex(buf[sid])
    return val


def contract(net: Network, mem_budget: int | None = None) -> complex:
    """Contract a closed network to its scalar value."""
    plan = compile_plan(net, mem_budget)
    return execute_plan(plan, [t.data for t in net.tensors], net.scalar)
