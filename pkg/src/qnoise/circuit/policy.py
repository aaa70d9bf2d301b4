"""Noise-injection policies.

A policy turns a noiseless circuit into a noisy one.  Modes:

* ``explicit``          — no-op; the circuit file already carries noise.
* ``per-gate``          — one template instance after every gate: on the
  gate's qubits when arities match, after each qubit of a 2-qubit gate
  for a 1-qubit template, skipped for a 2-qubit template on a 1-qubit
  gate.
* ``random-k``          — k instances after k distinct seeded gate picks
  (all gates are eligible for a 1-qubit template, which lands on a
  seeded qubit of a 2-qubit gate; only 2-qubit gates for a 2-qubit
  template).
* ``crosstalk-layered`` — greedy left-to-right layering; in each layer,
  every coupling-graph edge with exactly one busy endpoint gets a
  ``zz(theta)`` noise with theta drawn uniformly from [-0.1, 0.1].

Draw order on the policy stream (seed, STREAM_POLICY) is documented and
frozen: random-k consumes one raw double per eligible gate (selection
keys), then one per chosen 2-qubit gate needing a qubit pick, in
circuit order; crosstalk consumes one double per injected ZZ, layers in
circuit order and edges in sorted order within a layer.

Policy strings (CLI / service):

    explicit
    per-gate:<channel>
    random-k:<k>[:<channel>]:seed=<int>
    crosstalk-layered:seed=<int>

``<channel>`` is a channel spec per the circuit grammar; random-k
defaults to ``decoherence(200,30,25)`` (T1/T2 in µs, gate time in ns).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..channels import KrausChannel, zz_crosstalk
from ..errors import ValidationError
from ..rng import STREAM_POLICY, choose_distinct, index_in, make_rng, uniform_in
from .ir import CouplingGraph, Gate, NoiseOp, NoisyCircuit
from .textfmt import channel_from_spec

THETA_RANGE = 0.1

MODES = ("explicit", "per-gate", "random-k", "crosstalk-layered")

DEFAULT_TEMPLATE_SPEC = "decoherence(200,30,25)"


@dataclass(frozen=True)
class NoisePolicy:
    mode: str
    template: KrausChannel | None = None
    k: int = 0
    seed: int | None = None
    graph: CouplingGraph | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown policy mode {self.mode!r}")
        if self.mode in ("per-gate", "random-k") and self.template is None:
            raise ValidationError(f"{self.mode} policy needs a channel template")
        if self.mode == "random-k":
            if self.k < 0:
                raise ValidationError("random-k needs k >= 0")
            if self.seed is None:
                raise ValidationError("random-k policy needs a seed")
        if self.mode == "crosstalk-layered":
            if self.seed is None:
                raise ValidationError("crosstalk-layered policy needs a seed")
            if self.graph is None:
                raise ValidationError("crosstalk-layered policy needs a coupling graph")


def parse_policy(text: str, graph: CouplingGraph | None = None) -> NoisePolicy:
    """Parse a compact policy string (see module docstring)."""
    parts = _split_outside_parens(text.strip())
    if not parts or parts[0] not in MODES:
        raise ValidationError(f"unknown policy mode in {text!r}")
    mode = parts[0]
    k = 0
    template_spec: str | None = None
    seed: int | None = None
    for part in parts[1:]:
        if re.fullmatch(r"seed=\d+", part):
            seed = int(part.split("=", 1)[1])
        elif re.fullmatch(r"\d+", part):
            k = int(part)
        else:
            template_spec = part
    template = None
    if mode == "per-gate":
        template = channel_from_spec(template_spec or DEFAULT_TEMPLATE_SPEC)
    elif mode == "random-k":
        template = channel_from_spec(template_spec or DEFAULT_TEMPLATE_SPEC)
    return NoisePolicy(mode=mode, template=template, k=k, seed=seed, graph=graph)


def _split_outside_parens(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for chr_ in text:
        if chr_ == ":" and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        if chr_ == "(":
            depth += 1
        elif chr_ == ")":
            depth -= 1
        cur.append(chr_)
    parts.append("".join(cur))
    return [p for p in parts if p]


def layer_circuit(c: NoisyCircuit) -> list[list[Gate]]:
    """Greedy left-to-right layering: a gate joins the current layer iff
    its qubits are all free in that layer."""
    layers: list[list[Gate]] = []
    current: list[Gate] = []
    busy: set[int] = set()
    for el in c.elements:
        if not isinstance(el, Gate):
            raise ValidationError("layering expects a noiseless circuit")
        if busy.intersection(el.qubits):
            layers.append(current)
            current = [el]
            busy = set(el.qubits)
        else:
            current.append(el)
            busy.update(el.qubits)
    if current:
        layers.append(current)
    return layers


def apply_noise_policy(c: NoisyCircuit, policy: NoisePolicy) -> NoisyCircuit:
    """Inject noise into a noiseless circuit; deterministic given the seed."""
    if policy.mode == "explicit":
        return c
    if c.has_noise:
        raise ValidationError("noise policies apply to noiseless circuits only")

    if policy.mode == "per-gate":
        return _apply_per_gate(c, policy.template)
    if policy.mode == "random-k":
        return _apply_random_k(c, policy.template, policy.k, policy.seed)
    return _apply_crosstalk(c, policy.graph, policy.seed)


def _instances_for_gate(gate: Gate, template: KrausChannel) -> list[NoiseOp]:
    if template.arity == gate.arity:
        return [NoiseOp(template, gate.qubits)]
    if template.arity == 1:
        return [NoiseOp(template, (q,)) for q in gate.qubits]
    return []  # 2-qubit template cannot attach to a 1-qubit gate


def _apply_per_gate(c: NoisyCircuit, template: KrausChannel) -> NoisyCircuit:
    els = []
    for el in c.elements:
        els.append(el)
        if isinstance(el, Gate):
            els.extend(_instances_for_gate(el, template))
    return NoisyCircuit(c.n_qubits, tuple(els), name=c.name)


def _apply_random_k(
    c: NoisyCircuit, template: KrausChannel, k: int, seed: int
) -> NoisyCircuit:
    gates = [(i, el) for i, el in enumerate(c.elements) if isinstance(el, Gate)]
    eligible = [
        (i, g) for i, g in gates if template.arity == 1 or g.arity == template.arity
    ]
    if k > len(eligible):
        raise ValidationError(
            f"random-k asks for {k} noises but only {len(eligible)} eligible gates"
        )
    rng = make_rng(seed, STREAM_POLICY)
    chosen = choose_distinct(rng, k, len(eligible))
    inject: dict[int, NoiseOp] = {}
    for pick in chosen:
        idx, gate = eligible[pick]
        if template.arity == gate.arity:
            qubits = gate.qubits
        else:
            qubits = (gate.qubits[index_in(rng, gate.arity)],)
        inject[idx] = NoiseOp(template, qubits)
    els = []
    for i, el in enumerate(c.elements):
        els.append(el)
        if i in inject:
            els.append(inject[i])
    return NoisyCircuit(c.n_qubits, tuple(els), name=c.name)


def _apply_crosstalk(c: NoisyCircuit, graph: CouplingGraph, seed: int) -> NoisyCircuit:
    if graph.n_qubits != c.n_qubits:
        raise ValidationError(
            f"coupling graph has {graph.n_qubits} qubits, circuit has {c.n_qubits}"
        )
    rng = make_rng(seed, STREAM_POLICY)
    els = []
    edges = graph.sorted_edges()
    for layer in layer_circuit(c):
        els.extend(layer)
        busy = set()
        for g in layer:
            busy.update(g.qubits)
        for a, b in edges:
            if (a in busy) != (b in busy):
                theta = uniform_in(rng, -THETA_RANGE, THETA_RANGE)
                els.append(NoiseOp(zz_crosstalk(theta), (a, b)))
    return NoisyCircuit(c.n_qubits, tuple(els), name=c.name)
