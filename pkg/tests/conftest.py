import random

import pytest

from htforge.netlist import CONST0, CONST1, Gate, Netlist, parse_netlist

FULL_ADDER = """
module full_adder (a, b, cin, sum, cout);
  input a, b, cin;
  output sum, cout;
  wire t1, t2, t3;
  xor g1 (t1, a, b);
  xor g2 (sum, t1, cin);
  and g3 (t2, a, b);
  and g4 (t3, t1, cin);
  or  g5 (cout, t2, t3);
endmodule
"""

# the canonical six-NAND circuit
C17 = """
module c17 (N1, N2, N3, N6, N7, N22, N23);
  input N1, N2, N3, N6, N7;
  output N22, N23;
  wire N10, N11, N16, N19;
  nand g10 (N10, N1, N3);
  nand g11 (N11, N3, N6);
  nand g16 (N16, N2, N11);
  nand g19 (N19, N11, N7);
  nand g22 (N22, N10, N16);
  nand g23 (N23, N16, N19);
endmodule
"""


@pytest.fixture
def full_adder():
    return parse_netlist(FULL_ADDER)


@pytest.fixture
def c17():
    return parse_netlist(C17)


def random_netlist(seed, n_pis=None, n_gates=None, name=None):
    """Seeded random combinational netlist used as shared test stock."""
    rng = random.Random(seed)
    if n_pis is None:
        n_pis = rng.randint(3, 8)
    if n_gates is None:
        n_gates = rng.randint(10, 40)
    pis = [f"i{k}" for k in range(n_pis)]
    nets = list(pis)
    gates = []
    kinds = ["AND", "OR", "XOR", "NAND", "NOR", "XNOR", "NOT", "BUF",
             "AND", "OR", "NAND", "NOR"]
    for k in range(n_gates):
        kind = rng.choice(kinds)
        if kind in ("NOT", "BUF"):
            ins = (rng.choice(nets),)
        else:
            fanin = rng.choice((2, 2, 2, 3))
            ins = tuple(rng.choice(nets) for _ in range(fanin))
        out = f"w{k}"
        gates.append(Gate(kind, out, ins, f"g{k}"))
        nets.append(out)
    used = set()
    for g in gates:
        used.update(g.inputs)
    sinks = [g.output for g in gates if g.output not in used]
    if not sinks:
        sinks = [gates[-1].output]
    n = Netlist(name or f"rand{seed}", tuple(pis), tuple(sinks), tuple(gates))
    assert n.topo_gates is not None
    return n


def rarity_netlist(seed, n_branches=4, pis_per_branch=6, branch_gates=22):
    """Monotone multi-branch circuit rich in very-low-probability nets.

    Each branch stacks AND/OR gates over its own PI group and ends in wide
    AND collectors, so rare nets from different branches are statistically
    independent and jointly ultra-rare triggers exist.
    """
    rng = random.Random(seed)
    pis, gates, tops, collectors = [], [], [], []
    gid = [0]

    def g(kind, out, ins):
        gates.append(Gate(kind, out, tuple(ins), f"g{gid[0]}"))
        gid[0] += 1

    for b in range(n_branches):
        bpis = [f"i{b}_{k}" for k in range(pis_per_branch)]
        pis.extend(bpis)
        nets = list(bpis)
        for k in range(branch_gates):
            kind = "AND" if rng.random() < 0.7 else "OR"
            ins = [rng.choice(nets) for _ in range(rng.choice((2, 2, 3)))]
            out = f"b{b}w{k}"
            g(kind, out, ins)
            nets.append(out)
        sh = list(bpis)
        rng.shuffle(sh)
        g("AND", f"b{b}c0", sh)
        g("AND", f"b{b}c1", sh[:5])
        g("AND", f"b{b}c2", [sh[0], sh[1], sh[2], nets[-1]])
        collectors += [f"b{b}c0", f"b{b}c1", f"b{b}c2"]
        tops.append(nets[-1])
    outs = []
    for b, top in enumerate(tops):
        g("XOR", f"po{b}", (top, tops[(b + 1) % n_branches]))
        outs.append(f"po{b}")
    acc = collectors[0]
    for k, c in enumerate(collectors[1:]):
        g("OR", f"orf{k}", (acc, c))
        acc = f"orf{k}"
    outs.append(acc)
    return Netlist(f"rar{seed}", tuple(pis), tuple(outs), tuple(gates))


def brute_eval(n, stimulus):
    """Independent recursive evaluator used as the simulation oracle."""
    memo = {CONST0: 0, CONST1: 1}
    memo.update({p: stimulus[p] & 1 for p in n.inputs})

    def value(net):
        if net in memo:
            return memo[net]
        g = n.driver[net]
        vs = [value(i) for i in g.inputs]
        if g.kind == "BUF":
            r = vs[0]
        elif g.kind == "NOT":
            r = 1 - vs[0]
        elif g.kind == "AND":
            r = int(all(vs))
        elif g.kind == "NAND":
            r = int(not all(vs))
        elif g.kind == "OR":
            r = int(any(vs))
        elif g.kind == "NOR":
            r = int(not any(vs))
        elif g.kind == "XOR":
            r = sum(vs) % 2
        elif g.kind == "XNOR":
            r = 1 - sum(vs) % 2
        else:
            raise AssertionError(g.kind)
        memo[net] = r
        return r

    return {net: value(net) for net in n.nets}


def all_stimuli(n):
    """Yield every PI assignment of a small netlist, LSB-first PI order."""
    pis = n.inputs
    for word in range(1 << len(pis)):
        yield {p: (word >> k) & 1 for k, p in enumerate(pis)}


def truth_signature(n):
    """Exhaustive output signature: tuple of per-PO ints over all 2^PI rows."""
    sig = {o: 0 for o in n.outputs}
    for row, stim in enumerate(all_stimuli(n)):
        vals = brute_eval(n, stim)
        for o in n.outputs:
            sig[o] |= vals[o] << row
    return tuple(sig[o] for o in n.outputs)
