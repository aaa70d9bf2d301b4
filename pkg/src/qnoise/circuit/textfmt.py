"""Line-oriented circuit file format: parser and emitter.

Grammar (UTF-8, one element per line, ``#`` starts a comment):

    qubits <n>
    x|y|z|h|s|t q<i>
    rx|ry|rz(<float>) q<i>
    cx|cz q<i> q<j>
    zz(<float>) q<i> q<j>
    u1 q<i> [ <4 complex entries> ]
    u2 q<i> q<j> [ <16 complex entries> ]
    noise depolarizing(<p>) q<i>
    noise decoherence(<t1_us>,<t2_us>,<dt_ns>) q<i>
    noise depolarizing2(<p>) q<i> q<j>
    noise zz(<theta>) q<i> q<j>
    noise kraus q<i> [q<j>] [ <entries> ; <entries> ; ... ]

Complex entries are written ``a+bi`` / ``a-bi`` (bare reals accepted on
input); matrices are row-major; ``;`` separates the Kraus matrices of a
custom channel.  Decoherence times are given in microseconds and the
gate time in nanoseconds, matching common hardware datasheets; they are
converted to seconds internally.  Floats are emitted with ``repr`` so a
parse/emit round trip is bit-exact.

Coupling-graph files use the same lexical rules:

    qubits <n>
    edge <i> <j>
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .. import channels as ch
from ..errors import CircuitSyntaxError, QnoiseError, ValidationError
from .ir import GATE_KINDS, CouplingGraph, Gate, NoiseOp, NoisyCircuit

_TOKEN_RE = re.compile(r"\[|\]|;|[^\s\[\];]+")
_QUBIT_RE = re.compile(r"^q(\d+)$")
_CALL_RE = re.compile(r"^([a-z_][a-z0-9_]*)\((.*)\)$")

US = 1e-6
NS = 1e-9


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [
            _Tok(m.group(0), lineno, m.start() + 1) for m in _TOKEN_RE.finditer(body)
        ]
        if toks:
            yield toks


def _err(msg: str, tok: _Tok | None = None, line: int | None = None) -> CircuitSyntaxError:
    if tok is not None:
        return CircuitSyntaxError(msg, tok.line, tok.col)
    return CircuitSyntaxError(msg, line)


def _parse_float(text: str, tok: _Tok) -> float:
    try:
        return float(text)
    except ValueError:
        raise _err(f"expected a number, got {text!r}", tok) from None


def _parse_complex(tok: _Tok) -> complex:
    s = tok.text
    try:
        if s.endswith("i"):
            return complex(s[:-1] + "j")
        return complex(float(s))
    except ValueError:
        raise _err(f"bad complex entry {s!r} (expected a+bi)", tok) from None


def _parse_qubit(tok: _Tok, n_qubits: int) -> int:
    m = _QUBIT_RE.match(tok.text)
    if not m:
        raise _err(f"expected a qubit like q0, got {tok.text!r}", tok)
    q = int(m.group(1))
    if q >= n_qubits:
        raise _err(f"qubit q{q} out of range (circuit has {n_qubits})", tok)
    return q


def _split_args(argstr: str, tok: _Tok, count: int) -> list[float]:
    parts = argstr.split(",") if argstr else []
    if len(parts) != count:
        raise _err(
            f"expected {count} argument(s) in {tok.text!r}, got {len(parts)}", tok
        )
    return [_parse_float(p.strip(), tok) for p in parts]


def channel_from_spec(spec: str, tok: _Tok | None = None) -> ch.KrausChannel:
    """Build a catalog channel from its textual spec.

    Used by noise lines, policy templates, and the decompose command.
    Accepts ``depolarizing(p)``, ``decoherence(t1_us,t2_us,dt_ns)``,
    ``depolarizing2(p)``, ``zz(theta)`` and ``identity``.
    """
    spec = spec.strip()
    where = tok if tok is not None else _Tok(spec, 0, 0)
    if spec == "identity":
        return ch.identity_channel()
    m = _CALL_RE.match(spec)
    if not m:
        raise _err(f"unknown channel spec {spec!r}", where)
    name, argstr = m.group(1), m.group(2)
    try:
        if name == "depolarizing":
            (p,) = _split_args(argstr, where, 1)
            return ch.depolarizing(p)
        if name == "depolarizing2":
            (p,) = _split_args(argstr, where, 1)
            return ch.two_qubit_depolarizing(p)
        if name == "decoherence":
            t1_us, t2_us, dt_ns = _split_args(argstr, where, 3)
            c = ch.decoherence(t1_us * US, t2_us * US, dt_ns * NS)
            # keep the file-unit spelling so emit round-trips the same line
            return ch.KrausChannel(
                arity=1,
                kraus=c.kraus,
                label=f"decoherence({t1_us!r},{t2_us!r},{dt_ns!r})",
            )
        if name == "zz":
            (theta,) = _split_args(argstr, where, 1)
            return ch.zz_crosstalk(theta)
    except ValidationError as e:
        raise _err(str(e), where) from None
    raise _err(f"unknown channel {name!r}", where)


def _parse_bracketed(toks: list[_Tok], pos: int) -> tuple[list[list[complex]], int]:
    """Parse ``[ e e .. ; e e .. ]`` starting at ``toks[pos]``.

    Returns the entry groups (split on ``;``) and the index after ``]``.
    """
    if pos >= len(toks) or toks[pos].text != "[":
        where = toks[pos] if pos < len(toks) else toks[-1]
        raise _err("expected '['", where)
    groups: list[list[complex]] = [[]]
    i = pos + 1
    while i < len(toks) and toks[i].text != "]":
        if toks[i].text == ";":
            groups.append([])
        elif toks[i].text == "[":
            raise _err("nested '[' not allowed", toks[i])
        else:
            groups[-1].append(_parse_complex(toks[i]))
        i += 1
    if i >= len(toks):
        raise _err("unterminated '['", toks[pos])
    return groups, i + 1


def _expect_end(toks: list[_Tok], pos: int) -> None:
    if pos < len(toks):
        raise _err(f"unexpected trailing token {toks[pos].text!r}", toks[pos])


def _parse_gate_line(toks: list[_Tok], n_qubits: int) -> Gate:
    head = toks[0]
    word = head.text.lower()
    m = _CALL_RE.match(word)
    kind, param = (m.group(1), None) if m else (word, None)
    if kind not in GATE_KINDS:
        raise _err(f"unknown gate {head.text!r}", head)
    arity, takes_angle = GATE_KINDS[kind]
    if takes_angle:
        if not m:
            raise _err(f"gate {kind} needs an angle, e.g. {kind}(0.5)", head)
        (param,) = _split_args(m.group(2), head, 1)
    elif m:
        raise _err(f"gate {kind} takes no arguments", head)

    qubits = []
    pos = 1
    for _ in range(arity):
        if pos >= len(toks):
            raise _err(f"gate {kind} expects {arity} qubit(s)", head)
        qubits.append(_parse_qubit(toks[pos], n_qubits))
        pos += 1
    if len(set(qubits)) != len(qubits):
        raise _err(f"duplicate qubit in {kind}", toks[pos - 1])

    matrix = None
    if kind in ("u1", "u2"):
        groups, pos = _parse_bracketed(toks, pos)
        dim = 2**arity
        if len(groups) != 1 or len(groups[0]) != dim * dim:
            raise _err(f"{kind} expects {dim * dim} complex entries", head)
        matrix = np.array(groups[0], dtype=np.complex128).reshape(dim, dim)
    _expect_end(toks, pos)
    try:
        return Gate(kind=kind, qubits=tuple(qubits), param=param, matrix=matrix)
    except ValidationError as e:
        raise _err(str(e), head) from None


def _parse_noise_line(toks: list[_Tok], n_qubits: int) -> NoiseOp:
    head = toks[0]
    if len(toks) < 2:
        raise _err("noise line needs a channel spec", head)
    spec_tok = toks[1]
    if spec_tok.text == "kraus":
        qubits = []
        pos = 2
        while pos < len(toks) and _QUBIT_RE.match(toks[pos].text):
            qubits.append(_parse_qubit(toks[pos], n_qubits))
            pos += 1
        if len(qubits) not in (1, 2):
            raise _err("kraus noise expects 1 or 2 qubits", spec_tok)
        groups, pos = _parse_bracketed(toks, pos)
        _expect_end(toks, pos)
        dim = 2 ** len(qubits)
        mats = []
        for g in groups:
            if len(g) != dim * dim:
                raise _err(
                    f"each kraus matrix needs {dim * dim} entries, got {len(g)}",
                    spec_tok,
                )
            mats.append(np.array(g, dtype=np.complex128).reshape(dim, dim))
        try:
            channel = ch.KrausChannel(arity=len(qubits), kraus=tuple(mats), label="kraus")
            return NoiseOp(channel=channel, qubits=tuple(qubits))
        except QnoiseError as e:
            raise _err(str(e), spec_tok) from None

    channel = channel_from_spec(spec_tok.text, spec_tok)
    qubits = []
    pos = 2
    for _ in range(channel.arity):
        if pos >= len(toks):
            raise _err(f"noise {spec_tok.text} expects {channel.arity} qubit(s)", spec_tok)
        qubits.append(_parse_qubit(toks[pos], n_qubits))
        pos += 1
    _expect_end(toks, pos)
    try:
        return NoiseOp(channel=channel, qubits=tuple(qubits))
    except ValidationError as e:
        raise _err(str(e), spec_tok) from None


def parse_circuit(text: str, name: str = "") -> NoisyCircuit:
    """Parse circuit text; raises :class:`CircuitSyntaxError` with position."""
    lines = list(_tokenize(text))
    if not lines:
        raise CircuitSyntaxError("empty circuit file (missing 'qubits <n>' header)")
    header = lines[0]
    if header[0].text.lower() != "qubits":
        raise _err("first line must be 'qubits <n>'", header[0])
    if len(header) != 2 or not header[1].text.isdigit():
        where = header[1] if len(header) > 1 else header[0]
        raise _err("'qubits' needs one integer argument", where)
    n_qubits = int(header[1].text)
    if n_qubits < 1:
        raise _err("circuit needs at least 1 qubit", header[1])

    elements: list[Gate | NoiseOp] = []
    for toks in lines[1:]:
        word = toks[0].text.lower()
        if word == "qubits":
            raise _err("duplicate 'qubits' header", toks[0])
        if word == "noise":
            elements.append(_parse_noise_line(toks, n_qubits))
        else:
            elements.append(_parse_gate_line(toks, n_qubits))
    return NoisyCircuit(n_qubits=n_qubits, elements=tuple(elements), name=name)


# --- emission ---


def _fmt_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    sign = "+" if im >= 0 or im != im else "-"
    return f"{re_!r}{sign}{abs(im)!r}i"


def _fmt_matrix(m: np.ndarray) -> str:
    return " ".join(_fmt_complex(z) for z in m.reshape(-1))


_GRAMMAR_CHANNEL_RE = re.compile(
    r"^(depolarizing|depolarizing2|decoherence|zz)\([^()\s]*\)$"
)


def _label_roundtrips(channel: ch.KrausChannel) -> bool:
    """A label is only emitted if re-parsing it rebuilds the same Kraus set
    bit for bit (labels may carry non-file units, e.g. raw seconds)."""
    try:
        ref = channel_from_spec(channel.label)
    except QnoiseError:
        return False
    return len(ref.kraus) == len(channel.kraus) and all(
        np.array_equal(a, b) for a, b in zip(ref.kraus, channel.kraus)
    )


def _emit_element(el: Gate | NoiseOp) -> str:
    if isinstance(el, Gate):
        qs = " ".join(f"q{q}" for q in el.qubits)
        if el.kind in ("u1", "u2"):
            return f"{el.kind} {qs} [ {_fmt_matrix(el.matrix)} ]"
        if el.param is not None:
            return f"{el.kind}({el.param!r}) {qs}"
        return f"{el.kind} {qs}"
    qs = " ".join(f"q{q}" for q in el.qubits)
    label = el.channel.label
    if _GRAMMAR_CHANNEL_RE.match(label) and _label_roundtrips(el.channel):
        return f"noise {label} {qs}"
    mats = " ; ".join(_fmt_matrix(e) for e in el.channel.kraus)
    return f"noise kraus {qs} [ {mats} ]"


def emit_circuit(c: NoisyCircuit) -> str:
    """Canonical text for a circuit; parse(emit(c)) is structurally equal."""
    out = [f"qubits {c.n_qubits}"]
    out.extend(_emit_element(el) for el in c.elements)
    return "\n".join(out) + "\n"


def parse_coupling_graph(text: str) -> CouplingGraph:
    lines = list(_tokenize(text))
    if not lines:
        raise CircuitSyntaxError("empty coupling-graph file")
    header = lines[0]
    if header[0].text.lower() != "qubits" or len(header) != 2 or not header[1].text.isdigit():
        raise _err("coupling graph must start with 'qubits <n>'", header[0])
    n = int(header[1].text)
    edges = []
    for toks in lines[1:]:
        if toks[0].text.lower() != "edge" or len(toks) != 3:
            raise _err("expected 'edge <i> <j>'", toks[0])
        try:
            a, b = int(toks[1].text), int(toks[2].text)
        except ValueError:
            raise _err("edge endpoints must be integers", toks[1]) from None
        if not (0 <= a < n and 0 <= b < n):
            raise _err(f"edge ({a},{b}) out of range", toks[1])
        if a == b:
            raise _err("self-loop edge", toks[1])
        edges.append((a, b))
    return CouplingGraph(n_qubits=n, edges=tuple(edges))


def emit_coupling_graph(g: CouplingGraph) -> str:
    out = [f"qubits {g.n_qubits}"]
    out.extend(f"edge {a} {b}" for a, b in g.edges)
    return "\n".join(out) + "\n"
