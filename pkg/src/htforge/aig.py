"""AND-inverter graphs with structural hashing and bit-parallel simulation.

Literal encoding: ``lit = 2*node + complement``.  Node 0 is the constant
TRUE node, so literal 0 is TRUE and literal 1 is FALSE.  Nodes 1..P are the
primary inputs, AND nodes follow in topological order (every fanin index is
strictly smaller than the node's own index).
"""

from __future__ import annotations

from dataclasses import dataclass

from .netlist import CONST0, CONST1, Gate, Netlist, NetlistError

TRUE = 0
FALSE = 1


def lit(node, comp=0):
    return node * 2 + comp


def lit_node(l):
    return l >> 1


def lit_comp(l):
    return l & 1


def lit_not(l):
    return l ^ 1


class AigGraph:
    """Immutable AND-inverter graph."""

    __slots__ = ("pi_names", "fan0", "fan1", "pos", "levels", "max_level")

    def __init__(self, pi_names, fan0, fan1, pos):
        self.pi_names = tuple(pi_names)
        self.fan0 = tuple(fan0)
        self.fan1 = tuple(fan1)
        self.pos = tuple(pos)  # (name, literal) pairs
        base = 1 + len(self.pi_names)
        levels = [0] * (base + len(self.fan0))
        for j, (f0, f1) in enumerate(zip(self.fan0, self.fan1)):
            node = base + j
            if f0 >> 1 >= node or f1 >> 1 >= node:
                raise ValueError(f"fanin of node {node} violates topological order")
            levels[node] = 1 + max(levels[f0 >> 1], levels[f1 >> 1])
        self.levels = tuple(levels)
        po_levels = [levels[l >> 1] for _, l in self.pos]
        self.max_level = max(po_levels, default=0)

    @property
    def n_pis(self):
        return len(self.pi_names)

    @property
    def n_ands(self):
        return len(self.fan0)

    @property
    def n_nodes(self):
        return 1 + len(self.pi_names) + len(self.fan0)

    def is_and(self, node):
        return node > len(self.pi_names)

    def fanins(self, node):
        j = node - 1 - len(self.pi_names)
        return self.fan0[j], self.fan1[j]

    def pi_lit(self, k):
        return lit(1 + k)

    def __repr__(self):
        return (f"AigGraph(pis={self.n_pis}, ands={self.n_ands}, "
                f"pos={len(self.pos)}, depth={self.max_level})")


class AigBuilder:
    """Incremental constructor.  With hashing enabled, and2() applies the
    constant rules, normalizes fanin order, and shares identical nodes."""

    def __init__(self, pi_names, hashing=True):
        self.pi_names = list(pi_names)
        self.fan0 = []
        self.fan1 = []
        self.pos = []
        self.table = {} if hashing else None

    def pi(self, k):
        return lit(1 + k)

    def and2(self, a, b):
        if self.table is not None:
            if a == b:
                return a
            if a == lit_not(b):
                return FALSE
            if a == TRUE:
                return b
            if b == TRUE:
                return a
            if a == FALSE or b == FALSE:
                return FALSE
            if a > b:
                a, b = b, a
            hit = self.table.get((a, b))
            if hit is not None:
                return hit
        node = 1 + len(self.pi_names) + len(self.fan0)
        self.fan0.append(a)
        self.fan1.append(b)
        out = lit(node)
        if self.table is not None:
            self.table[(a, b)] = out
        return out

    def or2(self, a, b):
        return lit_not(self.and2(lit_not(a), lit_not(b)))

    def xor2(self, a, b):
        return self.or2(self.and2(a, lit_not(b)), self.and2(lit_not(a), b))

    def add_po(self, name, l):
        self.pos.append((name, l))

    def build(self):
        return AigGraph(self.pi_names, self.fan0, self.fan1, self.pos)


def to_aig(n: Netlist) -> AigGraph:
    """Decompose a netlist into 2-input ANDs and complemented edges.

    Gates are expanded gate-by-gate without structural hashing, so a
    k-input AND/OR becomes exactly k-1 AND nodes and XOR/XNOR become 3
    each; run strash() to share structure.
    """
    b = AigBuilder(n.inputs, hashing=False)
    net2lit = {CONST1: TRUE, CONST0: FALSE}
    for k, p in enumerate(n.inputs):
        net2lit[p] = b.pi(k)
    for g in n.topo_gates:
        lits = [net2lit[i] for i in g.inputs]
        if g.kind == "BUF":
            out = lits[0]
        elif g.kind == "NOT":
            out = lit_not(lits[0])
        else:
            acc = lits[0]
            for v in lits[1:]:
                if g.kind in ("AND", "NAND"):
                    acc = b.and2(acc, v)
                elif g.kind in ("OR", "NOR"):
                    acc = b.or2(acc, v)
                else:
                    acc = b.xor2(acc, v)
            out = lit_not(acc) if g.kind in ("NAND", "NOR", "XNOR") else acc
        net2lit[g.output] = out
    for o in n.outputs:
        if o not in net2lit:
            raise NetlistError(f"primary output '{o}' is undriven")
        b.add_po(o, net2lit[o])
    return b.build()


def strash(g: AigGraph) -> AigGraph:
    """Structurally hash: merge identical ordered-fanin nodes, normalize
    fanin order, and propagate constants.  Idempotent."""
    b = AigBuilder(g.pi_names, hashing=True)
    node_map = list(range(0, 2 * (1 + g.n_pis), 2))  # const + PIs map to themselves

    def mapped(l):
        return node_map[l >> 1] ^ (l & 1)

    for j in range(g.n_ands):
        node_map.append(b.and2(mapped(g.fan0[j]), mapped(g.fan1[j])))
    for name, l in g.pos:
        b.add_po(name, mapped(l))
    return b.build()


def strip_unreachable(g: AigGraph) -> AigGraph:
    """Drop nodes with no path to any PO (function unchanged)."""
    live = set()
    stack = [l >> 1 for _, l in g.pos]
    while stack:
        node = stack.pop()
        if node in live or not g.is_and(node):
            continue
        live.add(node)
        f0, f1 = g.fanins(node)
        stack.append(f0 >> 1)
        stack.append(f1 >> 1)
    b = AigBuilder(g.pi_names, hashing=True)
    node_map = {v: lit(v) for v in range(1 + g.n_pis)}
    node_map[0] = TRUE
    base = 1 + g.n_pis
    for j in range(g.n_ands):
        node = base + j
        if node not in live:
            continue
        f0, f1 = g.fan0[j], g.fan1[j]
        node_map[node] = b.and2(node_map[f0 >> 1] ^ (f0 & 1),
                                node_map[f1 >> 1] ^ (f1 & 1))
    for nm, l in g.pos:
        b.add_po(nm, node_map[l >> 1] ^ (l & 1))
    return b.build()


def aig_simulate(g: AigGraph, pi_words, width):
    """Bit-parallel node signatures: ``pi_words[k]`` is the packed stimulus
    for PI k, one bit per vector.  Returns a list indexed by node."""
    if len(pi_words) != g.n_pis:
        raise ValueError(f"expected {g.n_pis} PI words, got {len(pi_words)}")
    mask = (1 << width) - 1
    for w in pi_words:
        if w > mask:
            raise ValueError("stimulus word wider than the declared width")
    sigs = [mask]
    sigs.extend(w & mask for w in pi_words)
    fan0, fan1 = g.fan0, g.fan1
    for j in range(g.n_ands):
        f0, f1 = fan0[j], fan1[j]
        a = sigs[f0 >> 1] ^ (mask if f0 & 1 else 0)
        b_ = sigs[f1 >> 1] ^ (mask if f1 & 1 else 0)
        sigs.append(a & b_)
    return sigs


def po_signatures(g: AigGraph, sigs, width):
    mask = (1 << width) - 1
    return [(sigs[l >> 1] ^ (mask if l & 1 else 0)) for _, l in g.pos]


def exhaustive_signatures(g: AigGraph):
    """Node signatures over all 2^n_pis input rows (PI k toggles with
    period 2^k).  Only sensible for small PI counts."""
    m = g.n_pis
    return aig_simulate(g, [tt_var(k, m) for k in range(m)], 1 << m)


_TT_VAR_CACHE = {}


def tt_var(j, m):
    """Truth-table pattern of variable j over 2^m rows (bit i = (i>>j)&1)."""
    if m <= 16:
        hit = _TT_VAR_CACHE.get((j, m))
        if hit is not None:
            return hit
    half = 1 << j
    chunk = ((1 << half) - 1) << half
    period = half * 2
    reps = ((1 << (1 << m)) - 1) // ((1 << period) - 1)
    out = chunk * reps
    if m <= 16:
        _TT_VAR_CACHE[(j, m)] = out
    return out


# ---------------------------------------------------------------------------
# cut enumeration

@dataclass(frozen=True)
class Cut:
    leaves: tuple  # ascending node indices
    tt: int        # truth table over the leaves, leaf j = variable j


def cone_tt(g: AigGraph, root, leaves):
    """Truth table of ``root`` over ``leaves``, by simulating the cone with
    the leaves pinned to the standard variable patterns."""
    m = len(leaves)
    width = 1 << m
    mask = (1 << width) - 1
    val = {0: mask}
    for j, leaf in enumerate(leaves):
        val[leaf] = tt_var(j, m)
    stack = [root]
    while stack:
        node = stack[-1]
        if node in val:
            stack.pop()
            continue
        f0, f1 = g.fanins(node)
        deps = [v for v in (f0 >> 1, f1 >> 1) if v not in val]
        if deps:
            stack.extend(deps)
            continue
        a = val[f0 >> 1] ^ (mask if f0 & 1 else 0)
        b = val[f1 >> 1] ^ (mask if f1 & 1 else 0)
        val[node] = a & b
        stack.pop()
    return val[root]


def enumerate_cuts(g: AigGraph, k=6, max_cuts=8):
    """K-feasible cuts per node with truth tables, smallest cuts first.

    Every node keeps its trivial cut (listed last) plus up to max_cuts-1
    merged cuts, prioritized by leaf count.
    """
    cuts = [[] for _ in range(g.n_nodes)]
    for node in range(1, 1 + g.n_pis):
        cuts[node] = [Cut((node,), 0b10)]
    base = 1 + g.n_pis
    for j in range(g.n_ands):
        node = base + j
        f0, f1 = g.fan0[j] >> 1, g.fan1[j] >> 1
        seen = set()
        merged = []
        for c0 in cuts[f0]:
            for c1 in cuts[f1]:
                leaves = tuple(sorted(set(c0.leaves) | set(c1.leaves)))
                if len(leaves) > k or leaves in seen:
                    continue
                seen.add(leaves)
                merged.append(leaves)
        merged.sort(key=lambda ls: (len(ls), ls))
        out = [Cut(ls, cone_tt(g, node, ls)) for ls in merged[:max_cuts - 1]]
        out.append(Cut((node,), 0b10))
        cuts[node] = out
    return cuts


# ---------------------------------------------------------------------------
# netlist emission

def from_aig(g: AigGraph, group_multi_input_and=False, name="aig") -> Netlist:
    """Map back to the eight-gate netlist using AND, NOT, and BUF gates.

    With grouping enabled, maximal single-fanout non-complemented AND trees
    collapse into one multi-input AND gate (the gate-size-change pass).
    PI and PO names and order are preserved; internal nets are renamed
    n0, n1, ... in emission order.
    """
    live = set()
    stack = [l >> 1 for _, l in g.pos]
    while stack:
        node = stack.pop()
        if node in live or not g.is_and(node):
            continue
        live.add(node)
        f0, f1 = g.fanins(node)
        stack.append(f0 >> 1)
        stack.append(f1 >> 1)

    refs = {node: 0 for node in live}
    comp_ref = set()
    for node in live:
        for f in g.fanins(node):
            v = f >> 1
            if v in refs:
                refs[v] += 1
                if f & 1:
                    comp_ref.add(v)
    po_ref = set()
    for _, l in g.pos:
        v = l >> 1
        if v in refs:
            refs[v] += 1
            po_ref.add(v)

    if group_multi_input_and:
        emit = {node for node in live
                if refs[node] != 1 or node in comp_ref or node in po_ref}
    else:
        emit = set(live)

    reserved = set(g.pi_names) | {nm for nm, _ in g.pos}
    name_of = {}
    for nm, l in g.pos:
        v = l >> 1
        if not (l & 1) and g.is_and(v) and v in emit and v not in name_of:
            name_of[v] = nm

    counter = [0]

    def fresh():
        while True:
            cand = f"n{counter[0]}"
            counter[0] += 1
            if cand not in reserved:
                return cand

    gates = []
    ginst = [0]

    def inst():
        ginst[0] += 1
        return f"g{ginst[0] - 1}"

    inv_net = {}

    def net_for(l):
        """Net carrying literal l, creating shared NOT gates for complements."""
        v, c = l >> 1, l & 1
        if v == 0:
            return CONST0 if c else CONST1
        base = g.pi_names[v - 1] if not g.is_and(v) else name_of[v]
        if not c:
            return base
        if l not in inv_net:
            out = fresh()
            gates.append(Gate("NOT", out, (base,), inst()))
            inv_net[l] = out
        return inv_net[l]

    def tree_leaves(node):
        leaves = []
        for f in g.fanins(node):
            v = f >> 1
            if not (f & 1) and g.is_and(v) and v not in emit:
                leaves.extend(tree_leaves(v))
            else:
                leaves.append(f)
        return leaves

    for node in sorted(emit):
        if node not in name_of:
            name_of[node] = fresh()
    for node in sorted(emit):
        leaves = tree_leaves(node) if group_multi_input_and else list(g.fanins(node))
        ins = tuple(net_for(l) for l in leaves)
        gates.append(Gate("AND", name_of[node], ins, inst()))

    outputs = []
    for nm, l in g.pos:
        v = l >> 1
        if g.is_and(v) and name_of.get(v) == nm and not (l & 1):
            outputs.append(nm)
            continue
        if l & 1:
            src = net_for(lit(v))
            gates.append(Gate("NOT", nm, (src,), inst()))
        else:
            src = net_for(l)
            gates.append(Gate("BUF", nm, (src,), inst()))
        outputs.append(nm)

    return Netlist(name, tuple(g.pi_names), tuple(outputs), tuple(gates))


# ---------------------------------------------------------------------------
# AIGER export

def export_aiger(g: AigGraph, comments=()) -> str:
    """ASCII AIGER (aag) dump.  Our constant-TRUE literal 0 maps to AIGER's
    literal 1; all other literals coincide."""

    def alit(l):
        return l ^ 1 if l < 2 else l

    m = g.n_nodes - 1
    lines = [f"aag {m} {g.n_pis} 0 {len(g.pos)} {g.n_ands}"]
    for k in range(g.n_pis):
        lines.append(str(lit(1 + k)))
    for _, l in g.pos:
        lines.append(str(alit(l)))
    base = 1 + g.n_pis
    for j in range(g.n_ands):
        lhs = lit(base + j)
        rhs = sorted((alit(g.fan0[j]), alit(g.fan1[j])), reverse=True)
        lines.append(f"{lhs} {rhs[0]} {rhs[1]}")
    for k, nm in enumerate(g.pi_names):
        lines.append(f"i{k} {nm}")
    for k, (nm, _) in enumerate(g.pos):
        lines.append(f"o{k} {nm}")
    if comments:
        lines.append("c")
        lines.extend(comments)
    return "\n".join(lines) + "\n"
