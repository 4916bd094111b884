"""Gate-level structural Verilog netlists as immutable circuit DAGs.

The model is deliberately small: a netlist is an ordered set of primary
inputs, primary outputs, and gate instances drawn from the eight-gate
combinational set {BUF, NOT, AND, OR, XOR, NAND, NOR, XNOR}.  Every net is
driven by exactly one gate output or one primary input; the two constant
nets ``1'b0`` and ``1'b1`` are always available.  Vector ports are
bit-blasted at parse time into scalar nets ``name[i]`` with bit 0 the LSB.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

GATE_KINDS = ("BUF", "NOT", "AND", "OR", "XOR", "NAND", "NOR", "XNOR")

CONST0 = "1'b0"
CONST1 = "1'b1"

_BEHAVIORAL_KEYWORDS = {
    "always", "initial", "reg", "assign", "posedge", "negedge",
    "if", "else", "case", "begin", "end", "parameter", "integer",
}

_PLAIN_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*\Z")


class NetlistError(Exception):
    """Base class for netlist construction and parsing failures."""


class ParseError(NetlistError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, col {col})"
        super().__init__(message)


class ValidationError(NetlistError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    code: str
    message: str
    nets: tuple = ()


@dataclass(frozen=True)
class Gate:
    kind: str
    output: str
    inputs: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))


@dataclass
class Netlist:
    """A combinational circuit.  Treat instances as immutable once built."""

    name: str
    inputs: tuple
    outputs: tuple
    gates: tuple

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.outputs = tuple(self.outputs)
        self.gates = tuple(self.gates)

    @cached_property
    def driver(self):
        """Map net-id -> driving Gate, or None for PIs and constants."""
        d = {CONST0: None, CONST1: None}
        for pi in self.inputs:
            d[pi] = None
        for g in self.gates:
            d[g.output] = g
        return d

    @cached_property
    def nets(self):
        """All driven nets in deterministic order: constants, PIs, gate outputs."""
        seen = [CONST0, CONST1]
        seen.extend(self.inputs)
        seen.extend(g.output for g in self.gates)
        return tuple(dict.fromkeys(seen))

    @cached_property
    def loads(self):
        """Map net-id -> tuple of gates consuming it."""
        m = {n: [] for n in self.nets}
        for g in self.gates:
            for i in g.inputs:
                m.setdefault(i, []).append(g)
        return {n: tuple(gs) for n, gs in m.items()}

    @cached_property
    def topo_gates(self):
        """Gates in topological order (Kahn).  Raises ValidationError on cycles."""
        pending = {g.output: sum(1 for i in g.inputs if i in self._gate_out_set)
                   for g in self.gates}
        by_out = {g.output: g for g in self.gates}
        fanout = {}
        for g in self.gates:
            for i in g.inputs:
                if i in by_out:
                    fanout.setdefault(i, []).append(g.output)
        ready = [g.output for g in self.gates if pending[g.output] == 0]
        order = []
        k = 0
        while k < len(ready):
            out = ready[k]
            k += 1
            order.append(by_out[out])
            for nxt in fanout.get(out, ()):
                pending[nxt] -= 1
                if pending[nxt] == 0:
                    ready.append(nxt)
        if len(order) != len(self.gates):
            stuck = sorted(o for o, c in pending.items() if c > 0)
            raise ValidationError([Diagnostic(
                "error", "cycle", f"combinational cycle through nets {stuck}",
                tuple(stuck))])
        return tuple(order)

    @cached_property
    def _gate_out_set(self):
        return frozenset(g.output for g in self.gates)

    def depth(self):
        """Logic depth per net (PIs and constants at 0)."""
        lv = {n: 0 for n in self.nets if self.driver[n] is None}
        for g in self.topo_gates:
            lv[g.output] = 1 + max(lv[i] for i in g.inputs)
        return lv


def _fold(kind, values, width=None):
    mask = None if width is None else (1 << width) - 1
    inv = (lambda v: ~v & mask) if mask is not None else (lambda v: v ^ 1)
    if kind == "BUF":
        return values[0]
    if kind == "NOT":
        return inv(values[0])
    acc = values[0]
    base = {"AND": "AND", "NAND": "AND", "OR": "OR", "NOR": "OR",
            "XOR": "XOR", "XNOR": "XOR"}[kind]
    for v in values[1:]:
        if base == "AND":
            acc &= v
        elif base == "OR":
            acc |= v
        else:
            acc ^= v
    if kind in ("NAND", "NOR", "XNOR"):
        acc = inv(acc)
    return acc


def simulate(n: Netlist, stimulus: dict) -> dict:
    """Evaluate all nets for one input assignment.

    ``stimulus`` must bind exactly the primary inputs to 0/1.  Multi-input
    gate semantics follow the Verilog primitives: AND/OR/XOR are the n-ary
    fold of the 2-input function, NAND/NOR/XNOR their complements.
    """
    missing = [p for p in n.inputs if p not in stimulus]
    if missing:
        raise NetlistError(f"stimulus missing primary inputs: {missing}")
    extra = set(stimulus) - set(n.inputs)
    if extra:
        raise NetlistError(f"stimulus binds non-input nets: {sorted(extra)}")
    values = {CONST0: 0, CONST1: 1}
    for p in n.inputs:
        values[p] = stimulus[p] & 1
    for g in n.topo_gates:
        values[g.output] = _fold(g.kind, [values[i] for i in g.inputs])
    return values


def simulate_packed(n: Netlist, patterns: dict, width: int) -> dict:
    """Bit-parallel simulation: each net carries ``width`` stimuli packed in an int."""
    mask = (1 << width) - 1
    values = {CONST0: 0, CONST1: mask}
    for p in n.inputs:
        values[p] = patterns[p] & mask
    for g in n.topo_gates:
        values[g.output] = _fold(g.kind, [values[i] for i in g.inputs], width)
    return values


def validate(n: Netlist) -> list:
    """Structural diagnostics; empty list iff all invariants hold.

    Unconnected primary outputs are reported as warnings, everything else
    as errors.
    """
    diags = []
    driven = {CONST0, CONST1}
    driven.update(n.inputs)
    if len(set(n.inputs)) != len(n.inputs):
        diags.append(Diagnostic("error", "dup-input", "duplicate primary input names"))
    for g in n.gates:
        if g.kind not in GATE_KINDS:
            diags.append(Diagnostic("error", "bad-kind",
                                    f"unknown gate kind '{g.kind}'", (g.output,)))
        if g.kind in ("BUF", "NOT"):
            if len(g.inputs) != 1:
                diags.append(Diagnostic("error", "arity",
                                        f"{g.kind} gate must have exactly 1 input",
                                        (g.output,)))
        elif len(g.inputs) < 2:
            diags.append(Diagnostic("error", "arity",
                                    f"{g.kind} gate needs at least 2 inputs",
                                    (g.output,)))
        if g.output in driven:
            diags.append(Diagnostic("error", "multi-driver",
                                    f"net '{g.output}' has multiple drivers",
                                    (g.output,)))
        if g.output in (CONST0, CONST1):
            diags.append(Diagnostic("error", "const-driver",
                                    "gate may not drive a constant net", (g.output,)))
        driven.add(g.output)
    for g in n.gates:
        for i in g.inputs:
            if i not in driven:
                diags.append(Diagnostic("error", "undriven-input",
                                        f"gate input '{i}' is not driven", (i,)))
    for o in n.outputs:
        if o not in driven:
            diags.append(Diagnostic("warning", "undriven-output",
                                    f"primary output '{o}' is not driven", (o,)))
    if not any(d.severity == "error" for d in diags):
        try:
            n.topo_gates
        except ValidationError as e:
            diags.extend(e.diagnostics)
    return diags


def is_valid(n: Netlist) -> bool:
    return not any(d.severity == "error" for d in validate(n))


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>//[^\n]*|/\*.*?\*/)
      | (?P<escaped>\\[^\s]+)
      | (?P<literal>1'[bB][01])
      | (?P<number>\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
      | (?P<punct>[()\[\],;:])
      | (?P<other>.)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(source):
    toks = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind not in ("ws", "comment"):
            if kind == "escaped":
                toks.append(_Tok("ident", text[1:], line, col))
            else:
                toks.append(_Tok(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, source):
        self.toks = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text=None, kind=None):
        t = self.next()
        if text is not None and t.text != text:
            raise ParseError(f"expected '{text}', found '{t.text or 'EOF'}'",
                             t.line, t.col)
        if kind is not None and t.kind != kind:
            raise ParseError(f"expected {kind}, found '{t.text or 'EOF'}'",
                             t.line, t.col)
        return t

    def parse_module(self):
        self.expect(text="module")
        name = self.expect(kind="ident").text
        if self.peek().text == "(":
            self.next()
            while self.peek().text != ")":
                t = self.next()
                if t.kind not in ("ident",) and t.text not in (",",):
                    # ranged header entries like ``input [3:0] a`` are rare in
                    # the supported subset; tolerate brackets and numbers here
                    if t.kind not in ("number",) and t.text not in ("[", "]", ":"):
                        raise ParseError(f"unexpected token '{t.text}' in port list",
                                         t.line, t.col)
            self.expect(text=")")
        self.expect(text=";")

        inputs, outputs, wires, gates = [], [], [], []
        declared = set()
        auto_idx = 0
        while True:
            t = self.peek()
            if t.kind == "eof":
                raise ParseError("missing 'endmodule'", t.line, t.col)
            if t.text == "endmodule":
                self.next()
                break
            if t.text in ("input", "output", "wire"):
                self.next()
                names = self._decl_names(t.text)
                target = {"input": inputs, "output": outputs, "wire": wires}[t.text]
                target.extend(names)
                declared.update(names)
                continue
            if t.text in _BEHAVIORAL_KEYWORDS:
                raise ParseError(
                    f"sequential/behavioral construct '{t.text}' not supported",
                    t.line, t.col)
            if t.kind == "ident":
                kind = t.text.upper()
                if kind not in GATE_KINDS:
                    if t.text.lower() in ("dff", "dffr", "dlatch", "latch", "sdff"):
                        raise ParseError(
                            f"sequential/behavioral construct '{t.text}' not supported",
                            t.line, t.col)
                    raise ParseError(
                        f"unsupported construct: instance of '{t.text}' "
                        "(only the eight combinational primitives are allowed)",
                        t.line, t.col)
                self.next()
                inst = ""
                if self.peek().text != "(":
                    inst = self.expect(kind="ident").text
                if not inst:
                    inst = f"g{auto_idx}"
                    auto_idx += 1
                self.expect(text="(")
                conns = [self._connection()]
                while self.peek().text == ",":
                    self.next()
                    conns.append(self._connection())
                self.expect(text=")")
                self.expect(text=";")
                if len(conns) < 2:
                    raise ParseError(f"gate '{inst}' needs an output and at least "
                                     "one input", t.line, t.col)
                out, ins = conns[0], tuple(conns[1:])
                if out in (CONST0, CONST1):
                    raise ParseError(f"gate '{inst}' drives a constant literal",
                                     t.line, t.col)
                gates.append(Gate(kind, out, ins, inst))
                continue
            raise ParseError(f"unexpected token '{t.text}'", t.line, t.col)

        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"trailing content after endmodule: '{t.text}'",
                             t.line, t.col)
        return name, inputs, outputs, wires, gates

    def _decl_names(self, decl_kind):
        """Parse ``[msb:lsb] a, b, c ;`` and bit-blast ranges (LSB-0)."""
        rng = None
        if self.peek().text == "[":
            self.next()
            msb = int(self.expect(kind="number").text)
            self.expect(text=":")
            lsb = int(self.expect(kind="number").text)
            self.expect(text="]")
            rng = (msb, lsb)
        names = []
        while True:
            ident = self.expect(kind="ident").text
            if rng is None:
                names.append(ident)
            else:
                msb, lsb = rng
                lo, hi = min(msb, lsb), max(msb, lsb)
                names.extend(f"{ident}[{i}]" for i in range(lo, hi + 1))
            t = self.next()
            if t.text == ";":
                return names
            if t.text != ",":
                raise ParseError(f"expected ',' or ';' in {decl_kind} declaration, "
                                 f"found '{t.text}'", t.line, t.col)

    def _connection(self):
        t = self.next()
        if t.kind == "literal":
            return CONST1 if t.text[-1] == "1" else CONST0
        if t.kind != "ident":
            raise ParseError(f"expected net name, found '{t.text}'", t.line, t.col)
        name = t.text
        if self.peek().text == "[":
            self.next()
            idx = self.expect(kind="number").text
            self.expect(text="]")
            name = f"{name}[{idx}]"
        return name


def parse_netlist(source: str) -> Netlist:
    """Parse one structural Verilog module into a validated Netlist.

    Rejects anything outside the supported subset (behavioral blocks,
    flip-flops, module hierarchies) with a position-annotated ParseError.
    Semantic violations (multiple drivers, undriven inputs, cycles) raise
    ValidationError.
    """
    name, inputs, outputs, wires, gates = _Parser(source).parse_module()
    n = Netlist(name, tuple(inputs), tuple(outputs), tuple(gates))
    diags = validate(n)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ValidationError(errors)
    return n


# ---------------------------------------------------------------------------
# writing

def _emit_ident(name):
    if _PLAIN_IDENT.match(name) and name not in _BEHAVIORAL_KEYWORDS:
        return name
    return f"\\{name} "


def write_netlist(n: Netlist) -> str:
    """Serialize to the structural subset; parse(write(n)) is graph-isomorphic to n."""
    lines = [f"module {_emit_ident(n.name)} ("]
    ports = [_emit_ident(p) for p in (*n.inputs, *n.outputs)]
    lines.append("  " + ", ".join(ports))
    lines.append(");")
    if n.inputs:
        lines.append("  input " + ", ".join(_emit_ident(p) for p in n.inputs) + ";")
    if n.outputs:
        lines.append("  output " + ", ".join(_emit_ident(p) for p in n.outputs) + ";")
    port_set = set(n.inputs) | set(n.outputs)
    wires = [g.output for g in n.gates if g.output not in port_set]
    if wires:
        lines.append("  wire " + ", ".join(_emit_ident(w) for w in wires) + ";")
    for g in n.gates:
        conns = ", ".join(_emit_conn(c) for c in (g.output, *g.inputs))
        lines.append(f"  {g.kind.lower()} {_emit_ident(g.name)} ({conns});")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _emit_conn(net):
    if net in (CONST0, CONST1):
        return net
    return _emit_ident(net)


def to_json_dict(n: Netlist) -> dict:
    """Canonical JSON-ready dump used by the ``forge parse --json`` surface."""
    return {
        "name": n.name,
        "inputs": list(n.inputs),
        "outputs": list(n.outputs),
        "nets": list(n.nets),
        "gates": [
            {"kind": g.kind, "name": g.name, "output": g.output,
             "inputs": list(g.inputs)}
            for g in n.gates
        ],
    }
