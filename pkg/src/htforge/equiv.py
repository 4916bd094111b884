"""Miter construction and combinational equivalence checking.

Exhaustive bit-parallel enumeration decides circuits up to a configurable
PI bound (default 24, chunked so memory stays flat); above it, randomized
sampling gives an explicitly non-definitive "no-mismatch-found" verdict.
Counterexamples are always re-verified by scalar simulation before being
returned.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .aig import tt_var
from .netlist import CONST0, CONST1, Gate, Netlist, simulate, simulate_packed


class InterfaceMismatchError(Exception):
    pass


@dataclass
class CheckConfig:
    exhaustive_bound: int = 24
    sample_vectors: int = 100_000
    seed: int = 0
    chunk_bits: int = 14


@dataclass
class Miter:
    netlist: Netlist
    output: str


@dataclass
class EquivVerdict:
    mode: str            # "exhaustive" or "sampled"
    result: str          # "equivalent" | "no-mismatch-found" | "counterexample"
    counterexample: dict = None
    vectors: int = 0

    @property
    def equivalent(self):
        return self.result == "equivalent"


def _check_interface(a: Netlist, b: Netlist):
    if a.inputs != b.inputs or a.outputs != b.outputs:
        diff_i = set(a.inputs) ^ set(b.inputs)
        diff_o = set(a.outputs) ^ set(b.outputs)
        raise InterfaceMismatchError(
            f"PI/PO interfaces differ (inputs: {sorted(diff_i) or 'order'}, "
            f"outputs: {sorted(diff_o) or 'order'})")


def build_miter(a: Netlist, b: Netlist) -> Miter:
    """XOR the two circuits' outputs over shared PIs and OR-reduce; the
    miter output is 1 exactly on the inputs where they disagree."""
    _check_interface(a, b)
    pis = set(a.inputs)

    def side(n, prefix):
        def ren(net):
            if net in pis or net in (CONST0, CONST1):
                return net
            return f"{prefix}{net}"
        return [Gate(g.kind, ren(g.output), tuple(ren(i) for i in g.inputs),
                     f"{prefix}{g.name}") for g in n.gates]

    gates = side(a, "a$") + side(b, "b$")
    diffs = []
    for k, po in enumerate(a.outputs):
        out = f"d${k}"
        gates.append(Gate("XOR", out, (f"a${po}", f"b${po}"), f"gd{k}"))
        diffs.append(out)
    acc = diffs[0]
    for k, nxt in enumerate(diffs[1:]):
        out = f"m${k}"
        gates.append(Gate("OR", out, (acc, nxt), f"gm{k}"))
        acc = out
    m = Netlist("miter", a.inputs, (acc,), tuple(gates))
    return Miter(m, acc)


def _assignment(pis, chunk_base, bit_index, chunk_vars):
    stim = {}
    for k, p in enumerate(pis):
        if k < chunk_vars:
            stim[p] = (bit_index >> k) & 1
        else:
            stim[p] = (chunk_base >> (k - chunk_vars)) & 1
    return stim


def exhaustive_po_diff(a: Netlist, b: Netlist, chunk_bits=14, extra_nets=()):
    """Yield (chunk_base, chunk_vars, width, vals_a, vals_b, diff_word) per
    chunk of the full input space."""
    pis = a.inputs
    n = len(pis)
    chunk_vars = min(n, chunk_bits)
    width = 1 << chunk_vars
    hi = n - chunk_vars
    base_patterns = [tt_var(k, chunk_vars) for k in range(chunk_vars)]
    mask = (1 << width) - 1
    for chunk_base in range(1 << hi):
        patterns = {}
        for k, p in enumerate(pis):
            if k < chunk_vars:
                patterns[p] = base_patterns[k]
            else:
                patterns[p] = mask if (chunk_base >> (k - chunk_vars)) & 1 else 0
        va = simulate_packed(a, patterns, width)
        vb = simulate_packed(b, patterns, width)
        diff = 0
        for po in a.outputs:
            diff |= va[po] ^ vb[po]
        yield chunk_base, chunk_vars, width, va, vb, diff


def check_equivalence(a: Netlist, b: Netlist, config: CheckConfig = None) -> EquivVerdict:
    """Definitive exhaustive verdict up to the configured PI bound;
    sampled (non-definitive) above it."""
    cfg = config or CheckConfig()
    _check_interface(a, b)
    pis = a.inputs
    n = len(pis)
    if n <= cfg.exhaustive_bound:
        total = 1 << n
        for chunk_base, chunk_vars, width, _, _, diff in exhaustive_po_diff(
                a, b, cfg.chunk_bits):
            if diff:
                bit = (diff & -diff).bit_length() - 1
                stim = _assignment(pis, chunk_base, bit, chunk_vars)
                assert _po_mismatch(a, b, stim)
                return EquivVerdict("exhaustive", "counterexample", stim, total)
        return EquivVerdict("exhaustive", "equivalent", None, total)

    rng = random.Random(cfg.seed)
    remaining = cfg.sample_vectors
    while remaining > 0:
        width = min(remaining, 1 << cfg.chunk_bits)
        remaining -= width
        patterns = {p: rng.getrandbits(width) for p in pis}
        va = simulate_packed(a, patterns, width)
        vb = simulate_packed(b, patterns, width)
        diff = 0
        for po in a.outputs:
            diff |= va[po] ^ vb[po]
        if diff:
            bit = (diff & -diff).bit_length() - 1
            stim = {p: (patterns[p] >> bit) & 1 for p in pis}
            assert _po_mismatch(a, b, stim)
            return EquivVerdict("sampled", "counterexample", stim,
                                cfg.sample_vectors)
    return EquivVerdict("sampled", "no-mismatch-found", None, cfg.sample_vectors)


def _po_mismatch(a, b, stim):
    va = simulate(a, stim)
    vb = simulate(b, stim)
    return any(va[po] != vb[po] for po in a.outputs)


@dataclass
class TrojanVerdict:
    ok: bool
    reason: str = ""
    offending: dict = None
    mode: str = ""


def _trigger_word(vals, trigger, width):
    mask = (1 << width) - 1
    act = mask
    for net, pol in trigger:
        w = vals[net]
        act &= w if pol else (~w & mask)
    return act


def check_trojan_semantics(golden: Netlist, infected: Netlist, rec,
                           config: CheckConfig = None) -> TrojanVerdict:
    """Verify the two-sided contract of an inserted Trojan.

    (i) on every checked input with the trigger inactive, the infected
    circuit agrees with the golden one; (ii) the stored witness activates
    the trigger and flips at least one output.  A record without a witness
    fails as unproven.
    """
    cfg = config or CheckConfig()
    _check_interface(golden, infected)
    if rec.witness is None:
        return TrojanVerdict(False, "unproven HT: record carries no witness")
    pis = golden.inputs
    n = len(pis)

    wit = {p: rec.witness[p] & 1 for p in pis}
    vg = simulate(golden, wit)
    vi = simulate(infected, wit)
    act = all((vi[net] if pol else 1 - vi[net]) for net, pol in rec.trigger)
    if not act:
        return TrojanVerdict(False, "witness does not activate the trigger", wit)
    if all(vg[po] == vi[po] for po in golden.outputs):
        return TrojanVerdict(False, "witness does not flip any output", wit)

    if n <= cfg.exhaustive_bound:
        for chunk_base, chunk_vars, width, _, vi_vals, diff in exhaustive_po_diff(
                golden, infected, cfg.chunk_bits):
            inactive = (~_trigger_word(vi_vals, rec.trigger, width)
                        & ((1 << width) - 1))
            bad = diff & inactive
            if bad:
                bit = (bad & -bad).bit_length() - 1
                stim = _assignment(pis, chunk_base, bit, chunk_vars)
                return TrojanVerdict(
                    False, "infected diverges while trigger inactive", stim,
                    "exhaustive")
        return TrojanVerdict(True, "", None, "exhaustive")

    rng = random.Random(cfg.seed)
    remaining = cfg.sample_vectors
    while remaining > 0:
        width = min(remaining, 1 << cfg.chunk_bits)
        remaining -= width
        patterns = {p: rng.getrandbits(width) for p in pis}
        vgv = simulate_packed(golden, patterns, width)
        viv = simulate_packed(infected, patterns, width)
        diff = 0
        for po in golden.outputs:
            diff |= vgv[po] ^ viv[po]
        inactive = ~_trigger_word(viv, rec.trigger, width) & ((1 << width) - 1)
        bad = diff & inactive
        if bad:
            bit = (bad & -bad).bit_length() - 1
            stim = {p: (patterns[p] >> bit) & 1 for p in pis}
            return TrojanVerdict(
                False, "infected diverges while trigger inactive", stim,
                "sampled")
    return TrojanVerdict(True, "", None, "sampled")
