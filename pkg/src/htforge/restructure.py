"""Function-preserving netlist restructuring.

Seven techniques (structural hashing, balancing, rewriting, refactoring,
resubstitution, fraiging, gate-size change) and eighteen shipped recipes
composed from them.  Every pass is non-worsening: rewrite, refactor,
resubstitute, and fraig never increase node count; balance never increases
depth.  apply_recipe() re-checks functional equivalence of its output and
treats a failure as an internal bug, not a user condition.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass, field

from .aig import (
    FALSE,
    TRUE,
    AigBuilder,
    AigGraph,
    aig_simulate,
    cone_tt,
    from_aig,
    lit,
    lit_not,
    strash,
    strip_unreachable,
    to_aig,
    tt_var,
)
from .netlist import Netlist


class RestructureError(Exception):
    """Raised when a pipeline equivalence check fails (an internal bug trap)."""


def _vkey(v):
    return (0, v) if isinstance(v, int) else (1, v[1], v[2])


# ---------------------------------------------------------------------------
# mutable work graph

class _Work:
    """Mutable AIG with structural hashing, fanout sets, and exact reference
    counts.  replace() repoints fanouts and POs, simplifies consumers that
    trivialize, merges hash collisions, and deletes dead cones, keeping the
    live-node count exact at all times."""

    def __init__(self, g: AigGraph, sim_words=0, seed=0):
        base = 1 + g.n_pis
        n = g.n_nodes
        self.n_pis = g.n_pis
        self.pi_names = g.pi_names
        self.first_and = base
        self.fan0 = [0] * n
        self.fan1 = [0] * n
        self.dead = [False] * n
        self.nref = [0] * n
        self.fanouts = [set() for _ in range(n)]
        self.table = {}
        self.live = 0
        self.pos = [l for _, l in g.pos]
        self.po_names = [nm for nm, _ in g.pos]
        self.sim_width = 64 * sim_words
        self.sig = None
        if sim_words:
            rng = random.Random(seed)
            self.sig = [(1 << self.sim_width) - 1]
            self.sig.extend(rng.getrandbits(self.sim_width)
                            for _ in range(g.n_pis))
        for j in range(g.n_ands):
            node = base + j
            f0, f1 = g.fan0[j], g.fan1[j]
            if f0 > f1:
                f0, f1 = f1, f0
            self.fan0[node] = f0
            self.fan1[node] = f1
            self.table[(f0, f1)] = node
            self.live += 1
            for f in (f0, f1):
                self.nref[f >> 1] += 1
                self.fanouts[f >> 1].add(node)
            if self.sig is not None:
                self.sig.append(self._sig_of(f0, f1))
        for l in self.pos:
            self.nref[l >> 1] += 1

    def _sig_of(self, f0, f1):
        mask = (1 << self.sim_width) - 1
        a = self.sig[f0 >> 1] ^ (mask if f0 & 1 else 0)
        b = self.sig[f1 >> 1] ^ (mask if f1 & 1 else 0)
        return a & b

    def and2(self, a, b):
        """Hashed AND with the constant rules; creates a node on miss."""
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
            return lit(hit)
        node = len(self.fan0)
        self.fan0.append(a)
        self.fan1.append(b)
        self.dead.append(False)
        self.nref.append(0)
        self.fanouts.append(set())
        self.table[(a, b)] = node
        self.live += 1
        for f in (a, b):
            self.nref[f >> 1] += 1
            self.fanouts[f >> 1].add(node)
        if self.sig is not None:
            self.sig.append(self._sig_of(a, b))
        return lit(node)

    def _delete_cascade(self, v):
        stack = [v]
        while stack:
            u = stack.pop()
            if u < self.first_and or self.dead[u] or self.nref[u] != 0:
                continue
            self.dead[u] = True
            self.live -= 1
            f0, f1 = self.fan0[u], self.fan1[u]
            if self.table.get((f0, f1)) == u:
                del self.table[(f0, f1)]
            self.fanouts[u].clear()
            for f in (f0, f1):
                w = f >> 1
                self.fanouts[w].discard(u)
                self.nref[w] -= 1
                if self.nref[w] == 0:
                    stack.append(w)

    def replace(self, node, new_lit):
        """Repoint every consumer (and PO) of ``node`` to ``new_lit``.

        Queued follow-up replacements keep their target pinned so cascaded
        deletions cannot invalidate them.
        """
        self.nref[new_lit >> 1] += 1  # pin
        queue = [(node, new_lit)]
        while queue:
            old, nl = queue.pop(0)
            self.nref[nl >> 1] -= 1  # unpin
            if (nl >> 1) == old or self.dead[old]:
                self._delete_cascade(nl >> 1)
                continue
            for k, pl in enumerate(self.pos):
                if (pl >> 1) == old:
                    repl = nl ^ (pl & 1)
                    self.pos[k] = repl
                    self.nref[old] -= 1
                    self.nref[repl >> 1] += 1
            for m in sorted(self.fanouts[old]):
                if self.dead[m]:
                    continue
                of0, of1 = self.fan0[m], self.fan1[m]
                if self.table.get((of0, of1)) == m:
                    del self.table[(of0, of1)]
                nf0, nf1 = of0, of1
                if (nf0 >> 1) == old:
                    nf0 = nl ^ (nf0 & 1)
                if (nf1 >> 1) == old:
                    nf1 = nl ^ (nf1 & 1)
                if nf0 > nf1:
                    nf0, nf1 = nf1, nf0
                self.nref[of0 >> 1] -= 1
                self.nref[of1 >> 1] -= 1
                self.fanouts[of0 >> 1].discard(m)
                self.fanouts[of1 >> 1].discard(m)
                self.fan0[m], self.fan1[m] = nf0, nf1
                self.nref[nf0 >> 1] += 1
                self.nref[nf1 >> 1] += 1
                self.fanouts[nf0 >> 1].add(m)
                self.fanouts[nf1 >> 1].add(m)
                t = None
                if nf0 == nf1:
                    t = nf0
                elif nf0 == lit_not(nf1):
                    t = FALSE
                elif nf0 == TRUE:
                    t = nf1
                elif nf0 == FALSE:
                    t = FALSE
                if t is not None:
                    self.nref[t >> 1] += 1  # pin
                    queue.append((m, t))
                    continue
                other = self.table.get((nf0, nf1))
                if other is not None and other != m:
                    self.nref[other] += 1  # pin
                    queue.append((m, lit(other)))
                else:
                    self.table[(nf0, nf1)] = m
            if self.nref[old] == 0:
                self._delete_cascade(old)

    # -- analysis helpers

    def mffc_size(self, root, pins=None):
        """Nodes that would die if root's consumers vanished, honoring
        extra pin references on some nodes."""
        dec = {}
        count = 0
        stack = [root]
        while stack:
            v = stack.pop()
            count += 1
            for f in (self.fan0[v], self.fan1[v]):
                u = f >> 1
                if u < self.first_and or self.dead[u]:
                    continue
                dec[u] = dec.get(u, 0) + 1
                need = self.nref[u] + (pins.get(u, 0) if pins else 0)
                if dec[u] == need:
                    stack.append(u)
        return count

    def mffc_set(self, root):
        dec = {}
        out = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            for f in (self.fan0[v], self.fan1[v]):
                u = f >> 1
                if u < self.first_and or self.dead[u]:
                    continue
                dec[u] = dec.get(u, 0) + 1
                if dec[u] == self.nref[u]:
                    out.add(u)
                    stack.append(u)
        return out

    def cone_tt(self, root, leaves):
        """Truth table of root over the leaf nodes, or None when the cone
        escapes the leaves (stale cut) or grows past 512 nodes."""
        m = len(leaves)
        mask = (1 << (1 << m)) - 1
        val = {0: mask}
        for j, leaf in enumerate(leaves):
            val[leaf] = tt_var(j, m)
        if root in val:
            return val[root]
        stack = [root]
        steps = 0
        while stack:
            nd = stack[-1]
            if nd in val:
                stack.pop()
                continue
            if nd < self.first_and or self.dead[nd]:
                return None
            steps += 1
            if steps > 512:
                return None
            f0, f1 = self.fan0[nd], self.fan1[nd]
            deps = [u for u in (f0 >> 1, f1 >> 1) if u not in val]
            bad = [u for u in deps if u < self.first_and]
            if bad:
                return None
            if deps:
                stack.extend(deps)
                continue
            a = val[f0 >> 1] ^ (mask if f0 & 1 else 0)
            b = val[f1 >> 1] ^ (mask if f1 & 1 else 0)
            val[nd] = a & b
            stack.pop()
        return val[root]

    def support(self, node):
        """PI-index bitmask of the structural support of a node."""
        out = 0
        seen = set()
        stack = [node]
        while stack:
            v = stack.pop()
            if v in seen or v == 0:
                continue
            seen.add(v)
            if v < self.first_and:
                out |= 1 << (v - 1)
            else:
                stack.append(self.fan0[v] >> 1)
                stack.append(self.fan1[v] >> 1)
        return out

    # -- candidate evaluation

    def trial(self, root, tree):
        """Exact gain of replacing root's function with the candidate tree,
        without mutating.  Returns (gain, tree) or None for a no-op.

        ``tree`` nests ('lit', l) / ('and', t, t) / ('not', t) over existing
        literals.  Planned nodes are deduplicated against the hash table and
        each other; references they place on existing nodes pin those nodes
        when computing the freed count.
        """
        overlay = {}
        planned = [0]
        pins = {}

        def walk(t):
            if t[0] == "lit":
                return t[1]
            if t[0] == "not":
                v = walk(t[1])
                return lit_not(v) if isinstance(v, int) else (v[0], v[1], v[2] ^ 1)
            a = walk(t[1])
            b = walk(t[2])
            if isinstance(a, int) and isinstance(b, int):
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
                    return lit(hit)
            ka, kb = sorted((a, b), key=_vkey)
            hit = overlay.get((ka, kb))
            if hit is not None:
                return hit
            planned[0] += 1
            for f in (a, b):
                if isinstance(f, int):
                    pins[f >> 1] = pins.get(f >> 1, 0) + 1
            vl = ("p", len(overlay), 0)
            overlay[(ka, kb)] = vl
            return vl

        out = walk(tree)
        added = planned[0]
        if isinstance(out, int):
            if (out >> 1) == root:
                return None
            pins[out >> 1] = pins.get(out >> 1, 0) + self.nref[root]
        freed = self.mffc_size(root, pins)
        return freed - added, tree

    def commit(self, root, tree):
        def build(t):
            if t[0] == "lit":
                return t[1]
            if t[0] == "not":
                return lit_not(build(t[1]))
            return self.and2(build(t[1]), build(t[2]))

        new_lit = build(tree)
        if (new_lit >> 1) == root or self._in_cone(root, new_lit >> 1):
            return
        self.replace(root, new_lit)

    def _in_cone(self, node, top):
        """True when ``node`` lies in the fanin cone of ``top``.  Guards
        replace() against candidates that hash onto structures built over
        the node being replaced (cannot happen for irredundant covers,
        but cheap to rule out)."""
        stack = [top]
        seen = set()
        while stack:
            v = stack.pop()
            if v == node:
                return True
            if v in seen or v < self.first_and:
                continue
            seen.add(v)
            stack.append(self.fan0[v] >> 1)
            stack.append(self.fan1[v] >> 1)
        return False

    def rebuild(self) -> AigGraph:
        """Compact the live reachable structure into a fresh AigGraph.

        Node indices stop being topologically ordered once replace() has
        run, so the cones are walked depth-first from the POs.
        """
        b = AigBuilder(self.pi_names, hashing=True)
        node_map = {0: TRUE}
        for k in range(self.n_pis):
            node_map[1 + k] = b.pi(k)
        for nm, pl in zip(self.po_names, self.pos):
            stack = [pl >> 1]
            while stack:
                u = stack[-1]
                if u in node_map:
                    stack.pop()
                    continue
                f0, f1 = self.fan0[u], self.fan1[u]
                deps = [x for x in (f0 >> 1, f1 >> 1) if x not in node_map]
                if deps:
                    stack.extend(deps)
                    continue
                node_map[u] = b.and2(node_map[f0 >> 1] ^ (f0 & 1),
                                     node_map[f1 >> 1] ^ (f1 & 1))
                stack.pop()
            b.add_po(nm, node_map[pl >> 1] ^ (pl & 1))
        return b.build()

    def check(self):
        """Internal consistency assertions (used by tests)."""
        refs = {}
        for node in range(self.first_and, len(self.fan0)):
            if self.dead[node]:
                continue
            for f in (self.fan0[node], self.fan1[node]):
                refs[f >> 1] = refs.get(f >> 1, 0) + 1
                assert not (f >> 1 >= self.first_and and self.dead[f >> 1])
                assert node in self.fanouts[f >> 1]
        for pl in self.pos:
            refs[pl >> 1] = refs.get(pl >> 1, 0) + 1
        for v in range(len(self.fan0)):
            assert self.nref[v] == refs.get(v, 0), (v, self.nref[v], refs.get(v, 0))
        live = sum(1 for v in range(self.first_and, len(self.fan0))
                   if not self.dead[v])
        assert self.live == live


# ---------------------------------------------------------------------------
# truth-table synthesis: irredundant SOP + algebraic factoring

def _cofactors(f, v, m):
    half = 1 << v
    p = tt_var(v, m)
    a = f & ~p
    f0 = a | (a << half)
    b = f & p
    f1 = b | (b >> half)
    return f0, f1


def isop(f, m):
    """Minato-Morreale irredundant sum-of-products.

    Returns cubes as (pos_mask, neg_mask) pairs over variables 0..m-1; the
    empty cube (0, 0) is the tautology.
    """
    full = (1 << (1 << m)) - 1
    f &= full

    def rec(lo, up, var):
        if lo == 0:
            return [], 0
        if up == full:
            return [(0, 0)], full
        assert var < m
        lo0, lo1 = _cofactors(lo, var, m)
        up0, up1 = _cofactors(up, var, m)
        c0, cov0 = rec(lo0 & ~up1, up0, var + 1)
        c1, cov1 = rec(lo1 & ~up0, up1, var + 1)
        rest = (lo0 & ~cov0) | (lo1 & ~cov1)
        cs, covs = rec(rest, up0 & up1, var + 1)
        vpos = tt_var(var, m)
        vneg = ~vpos & full
        cubes = ([(p, q | (1 << var)) for p, q in c0]
                 + [(p | (1 << var), q) for p, q in c1]
                 + cs)
        cover = (cov0 & vneg) | (cov1 & vpos) | covs
        return cubes, cover

    cubes, cover = rec(f, f, 0)
    assert cover == f
    return cubes


def _bits(mask):
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def _factor(cubes):
    """Algebraic factoring of a cube list into a ('literal'|'and'|'or'|'const')
    tree; divides by the most frequent literal."""
    cubes = list(dict.fromkeys(cubes))
    if not cubes:
        return ("const", 0)
    if (0, 0) in cubes:
        return ("const", 1)
    if len(cubes) == 1:
        return _cube_tree(cubes[0])
    counts = {}
    for p, q in cubes:
        for v in _bits(p):
            counts[(v, 1)] = counts.get((v, 1), 0) + 1
        for v in _bits(q):
            counts[(v, 0)] = counts.get((v, 0), 0) + 1
    (v, pol), best = max(counts.items(),
                         key=lambda kv: (kv[1], -kv[0][0], kv[0][1]))
    if best < 2:
        return _balanced("or", [_cube_tree(c) for c in cubes])
    bit = 1 << v
    quot, rest = [], []
    for p, q in cubes:
        if pol and (p & bit):
            quot.append((p & ~bit, q))
        elif not pol and (q & bit):
            quot.append((p, q & ~bit))
        else:
            rest.append((p, q))
    if (0, 0) in quot or not quot:
        inner = ("literal", v, pol)
    else:
        inner = ("and", ("literal", v, pol), _factor(quot))
    if not rest:
        return inner
    return ("or", inner, _factor(rest))


def _cube_tree(cube):
    p, q = cube
    lits = ([("literal", v, 1) for v in _bits(p)]
            + [("literal", v, 0) for v in _bits(q)])
    if not lits:
        return ("const", 1)
    return _balanced("and", lits)


def _balanced(op, items):
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return (op, _balanced(op, items[:mid]), _balanced(op, items[mid:]))


def _tree_cost(tree):
    if tree[0] in ("const", "literal"):
        return 0
    return 1 + _tree_cost(tree[1]) + _tree_cost(tree[2])


def _to_lit_tree(tree, leaf_lits):
    kind = tree[0]
    if kind == "const":
        return ("lit", TRUE if tree[1] else FALSE)
    if kind == "literal":
        _, v, pol = tree
        l = leaf_lits[v]
        return ("lit", l if pol else lit_not(l))
    if kind == "and":
        return ("and", _to_lit_tree(tree[1], leaf_lits),
                _to_lit_tree(tree[2], leaf_lits))
    return ("not", ("and",
                    ("not", _to_lit_tree(tree[1], leaf_lits)),
                    ("not", _to_lit_tree(tree[2], leaf_lits))))


def synth_tree(tt, m, leaf_lits):
    """Candidate structure for a truth table: the cheaper of the factored
    ISOP of the function and of its complement."""
    full = (1 << (1 << m)) - 1
    tt &= full
    if tt == 0:
        return ("lit", FALSE)
    if tt == full:
        return ("lit", TRUE)
    for v in range(m):
        pv = tt_var(v, m)
        if tt == pv:
            return ("lit", leaf_lits[v])
        if tt == (~pv & full):
            return ("lit", lit_not(leaf_lits[v]))
    pos = _factor(isop(tt, m))
    neg = _factor(isop(~tt & full, m))
    if _tree_cost(neg) < _tree_cost(pos):
        return ("not", _to_lit_tree(neg, leaf_lits))
    return _to_lit_tree(pos, leaf_lits)


# ---------------------------------------------------------------------------
# light cut enumeration (leaf sets only)

def _cut_leaves(g: AigGraph, k, max_cuts):
    cuts = [((),)] * g.n_nodes
    for node in range(1, 1 + g.n_pis):
        cuts[node] = ((node,),)
    base = 1 + g.n_pis
    out = [()] * g.n_nodes
    for j in range(g.n_ands):
        node = base + j
        f0, f1 = g.fan0[j] >> 1, g.fan1[j] >> 1
        seen = set()
        merged = []
        for c0 in cuts[f0]:
            for c1 in cuts[f1]:
                if not c0 or not c1:
                    continue
                leaves = tuple(sorted(set(c0) | set(c1)))
                if len(leaves) > k or leaves in seen:
                    continue
                seen.add(leaves)
                merged.append(leaves)
        merged.sort(key=lambda ls: (len(ls), ls))
        merged = merged[:max_cuts - 1]
        cuts[node] = tuple(merged) + ((node,),)
        out[node] = tuple(merged)
    return out


# ---------------------------------------------------------------------------
# passes

def balance(g: AigGraph, seed=0) -> AigGraph:
    """Rebuild AND trees level-minimally.  Tie-breaks among equal-level
    operands are seeded, which varies structure without affecting depth."""
    g = strash(g)
    rng = random.Random(seed)
    nref = [0] * g.n_nodes
    comp_ref = set()
    po_ref = set()
    for j in range(g.n_ands):
        for f in (g.fan0[j], g.fan1[j]):
            nref[f >> 1] += 1
            if f & 1:
                comp_ref.add(f >> 1)
    for _, l in g.pos:
        nref[l >> 1] += 1
        po_ref.add(l >> 1)

    b = AigBuilder(g.pi_names, hashing=True)
    levels = {v: 0 for v in range(1 + g.n_pis)}
    balanced = {}

    def mapped(f):
        v = f >> 1
        if not g.is_and(v):
            return f
        return balanced[v] ^ (f & 1)

    def operands(node, acc):
        for f in g.fanins(node):
            v = f >> 1
            if not (f & 1) and g.is_and(v) and nref[v] == 1 and v not in po_ref:
                operands(v, acc)
            else:
                acc.append(mapped(f))

    base = 1 + g.n_pis
    for j in range(g.n_ands):
        node = base + j
        if nref[node] == 1 and node not in comp_ref and node not in po_ref:
            continue  # internal to some tree
        ops = []
        operands(node, ops)
        groups = {}
        for l in ops:
            groups.setdefault(levels.get(l >> 1, 0), []).append(l)
        pool = []
        for lv in sorted(groups):
            grp = sorted(groups[lv])
            rng.shuffle(grp)
            pool.extend((lv, l) for l in grp)
        while len(pool) > 1:
            pool.sort(key=lambda t: t[0])
            (l0, a), (l1, c) = pool[0], pool[1]
            pool = pool[2:]
            nl = b.and2(a, c)
            lv = levels.get(nl >> 1)
            if lv is None:
                lv = 1 + max(l0, l1)
                levels[nl >> 1] = lv
            pool.append((lv, nl))
        balanced[node] = pool[0][1]
    for nm, l in g.pos:
        b.add_po(nm, mapped(l))
    out = strip_unreachable(b.build())
    assert out.max_level <= g.max_level
    return out


def rewrite(g: AigGraph, cut_size=4, max_cuts=8, seed=0) -> AigGraph:
    """Cut-based local rewriting: resynthesize each node's cut function from
    its truth table; replacements accepted only with non-negative gain."""
    g = strash(g)
    rng = random.Random(seed)
    node_cuts = _cut_leaves(g, cut_size, max_cuts)
    w = _Work(g)
    before = w.live
    for node in range(1 + g.n_pis, g.n_nodes):
        if w.dead[node] or w.nref[node] == 0:
            continue
        cand = []
        for leaves in node_cuts[node]:
            if len(leaves) < 2:
                continue
            if any(v >= w.first_and and w.dead[v] for v in leaves):
                continue
            tt = w.cone_tt(node, leaves)
            if tt is None:
                continue
            tree = synth_tree(tt, len(leaves), [lit(v) for v in leaves])
            res = w.trial(node, tree)
            if res is None:
                continue
            gain, plan = res
            if gain >= 0:
                cand.append((gain, plan))
        if not cand:
            continue
        best = max(c[0] for c in cand)
        top = [c for c in cand if c[0] == best]
        _, plan = top[rng.randrange(len(top))] if len(top) > 1 else top[0]
        w.commit(node, plan)
    assert w.live <= before
    return w.rebuild()


def refactor(g: AigGraph, max_cone_inputs=10, seed=0) -> AigGraph:
    """Collapse reconvergent cones to truth tables and rebuild them from a
    factored irredundant SOP; accepted only when node count does not grow."""
    if max_cone_inputs > 16:
        raise ValueError("max_cone_inputs is capped at 16 (truth-table width)")
    g = strash(g)
    w = _Work(g)
    before = w.live
    n_orig = g.n_nodes
    for node in range(1 + g.n_pis, n_orig):
        if w.dead[node] or w.nref[node] == 0:
            continue
        leaves = {w.fan0[node] >> 1, w.fan1[node] >> 1}
        for _ in range(4 * max_cone_inputs):
            best_leaf, best_sz = None, None
            for v in sorted(leaves):
                if v < w.first_and or w.dead[v]:
                    continue
                nxt = (leaves - {v}) | {w.fan0[v] >> 1, w.fan1[v] >> 1}
                if len(nxt) > max_cone_inputs:
                    continue
                if best_sz is None or len(nxt) < best_sz:
                    best_leaf, best_sz = v, len(nxt)
            if best_leaf is None:
                break
            leaves = ((leaves - {best_leaf})
                      | {w.fan0[best_leaf] >> 1, w.fan1[best_leaf] >> 1})
        leaves = tuple(sorted(leaves - {0}))
        if len(leaves) < 2:
            continue
        tt = w.cone_tt(node, leaves)
        if tt is None:
            continue
        tree = synth_tree(tt, len(leaves), [lit(v) for v in leaves])
        res = w.trial(node, tree)
        if res is None:
            continue
        gain, plan = res
        if gain >= 0:
            w.commit(node, plan)
    assert w.live <= before
    return w.rebuild()


def resubstitute(g: AigGraph, max_divisors=20, seed=0) -> AigGraph:
    """Re-express nodes over existing divisors when that strictly reduces
    node count.  Candidates are filtered by simulation signatures and
    validated by an exact check over the local PI support."""
    g = strash(g)
    w = _Work(g, sim_words=2, seed=seed ^ 0x5EED)
    mask = (1 << w.sim_width) - 1
    before = w.live
    supports = {}

    def supp(v):
        if v not in supports:
            supports[v] = w.support(v)
        return supports[v]

    for node in range(1 + g.n_pis, g.n_nodes):
        if w.dead[node] or w.nref[node] == 0:
            continue
        mffc = w.mffc_set(node)
        s_node = supp(node)
        pi_nodes = tuple(1 + k for k in _bits(s_node))
        if not pi_nodes or len(pi_nodes) > 20:
            continue
        full = (1 << (1 << len(pi_nodes))) - 1
        divs = []
        for d in range(1, node):
            if d >= w.first_and and (w.dead[d] or w.nref[d] == 0):
                continue
            if d in mffc:
                continue
            if supp(d) & ~s_node:
                continue
            divs.append(d)
            if len(divs) >= max_divisors:
                break
        if not divs:
            continue
        sig_n = w.sig[node]
        tt_n = None
        done = False
        for d in divs:  # 0-resub
            comp = None
            if w.sig[d] == sig_n:
                comp = 0
            elif (w.sig[d] ^ mask) == sig_n:
                comp = 1
            if comp is None:
                continue
            if tt_n is None:
                tt_n = w.cone_tt(node, pi_nodes)
            tt_d = w.cone_tt(d, pi_nodes)
            if tt_d is None or tt_n is None:
                continue
            if (tt_d ^ (full if comp else 0)) == tt_n:
                w.replace(node, lit(d, comp))
                done = True
                break
        if done or len(mffc) < 2:
            continue
        for i1 in range(len(divs)):  # 1-resub
            if done:
                break
            for i2 in range(i1 + 1, len(divs)):
                d1, d2 = divs[i1], divs[i2]
                s1, s2 = w.sig[d1], w.sig[d2]
                found = None
                for c1 in (0, 1):
                    for c2 in (0, 1):
                        v = (s1 ^ (mask if c1 else 0)) & (s2 ^ (mask if c2 else 0))
                        if v == sig_n:
                            found = (c1, c2, 0)
                        elif (v ^ mask) == sig_n:
                            found = (c1, c2, 1)
                        if found:
                            break
                    if found:
                        break
                if not found:
                    continue
                c1, c2, oc = found
                if tt_n is None:
                    tt_n = w.cone_tt(node, pi_nodes)
                t1 = w.cone_tt(d1, pi_nodes)
                t2 = w.cone_tt(d2, pi_nodes)
                if tt_n is None or t1 is None or t2 is None:
                    continue
                v = (t1 ^ (full if c1 else 0)) & (t2 ^ (full if c2 else 0))
                if (v ^ (full if oc else 0)) != tt_n:
                    continue
                tree = ("and", ("lit", lit(d1, c1)), ("lit", lit(d2, c2)))
                if oc:
                    tree = ("not", tree)
                res = w.trial(node, tree)
                if res is None:
                    continue
                gain, plan = res
                if gain >= 1:
                    w.commit(node, plan)
                    done = True
                    break
    assert w.live <= before
    return w.rebuild()


def fraig(g: AigGraph, sim_words=16, seed=0, exact_budget=4096) -> AigGraph:
    """Functionally reduce: group nodes into candidate classes by random
    simulation, prove merges exactly (exhaustive when the pair's PI support
    is at most 20, bounded random search otherwise), and rebuild with
    proven-equivalent nodes shared.  Unresolved candidates stay unmerged."""
    g = strash(g)
    rng = random.Random(seed)
    width = 64 * max(1, sim_words)
    mask = (1 << width) - 1
    pi_words = [rng.getrandbits(width) for _ in range(g.n_pis)]
    sigs = aig_simulate(g, pi_words, width)

    supports = {}

    def supp(v):
        if v in supports:
            return supports[v]
        out = 0
        seen = set()
        stack = [v]
        while stack:
            u = stack.pop()
            if u in seen or u == 0:
                continue
            seen.add(u)
            if u <= g.n_pis:
                out |= 1 << (u - 1)
            else:
                f0, f1 = g.fanins(u)
                stack.append(f0 >> 1)
                stack.append(f1 >> 1)
        supports[v] = out
        return out

    def proven_equal(a, b_, comp):
        """True / False / None(unresolved) for f_a == f_b ^ comp."""
        union = supp(a) | supp(b_)
        pis = tuple(1 + k for k in _bits(union))
        if len(pis) <= 20:
            ta = cone_tt(g, a, pis)
            tb = cone_tt(g, b_, pis)
            full = (1 << (1 << len(pis))) - 1
            return ta == (tb ^ (full if comp else 0))
        words = [rng.getrandbits(exact_budget) for _ in range(g.n_pis)]
        ss = aig_simulate(g, words, exact_budget)
        m2 = (1 << exact_budget) - 1
        if ss[a] != (ss[b_] ^ (m2 if comp else 0)):
            return False
        return None

    b = AigBuilder(g.pi_names, hashing=True)
    node_map = {0: TRUE}
    classes = {}

    def canon(s):
        return s if not (s & 1) else (~s & mask)

    classes[canon(sigs[0])] = [0]
    for k in range(g.n_pis):
        node_map[1 + k] = b.pi(k)
        classes.setdefault(canon(sigs[1 + k]), []).append(1 + k)
    base = 1 + g.n_pis
    for j in range(g.n_ands):
        node = base + j
        f0, f1 = g.fan0[j], g.fan1[j]
        nf = b.and2(node_map[f0 >> 1] ^ (f0 & 1), node_map[f1 >> 1] ^ (f1 & 1))
        s = sigs[node]
        merged = False
        for rep in classes.get(canon(s), ()):
            comp = 0 if sigs[rep] == s else 1
            if proven_equal(rep, node, comp) is True:
                node_map[node] = node_map[rep] ^ comp
                merged = True
                break
        if not merged:
            classes.setdefault(canon(s), []).append(node)
            node_map[node] = nf
    for nm, l in g.pos:
        b.add_po(nm, node_map[l >> 1] ^ (l & 1))
    out = strip_unreachable(b.build())
    assert out.n_ands <= g.n_ands
    return out


# ---------------------------------------------------------------------------
# recipes

PASS_NAMES = ("strash", "balance", "rewrite", "refactor", "resub", "fraig",
              "gate_size")


@dataclass(frozen=True)
class PassStep:
    name: str
    params: tuple = ()  # sorted (key, value) pairs
    seed: int = 0

    def param_dict(self):
        return dict(self.params)


@dataclass(frozen=True)
class Recipe:
    id: int
    steps: tuple

    def __post_init__(self):
        if not self.steps or self.steps[0].name != "strash":
            raise ValueError("every recipe must begin with strash")
        for s in self.steps:
            if s.name not in PASS_NAMES:
                raise ValueError(f"unknown pass '{s.name}'")


@dataclass
class PassReport:
    name: str
    nodes_before: int
    nodes_after: int
    levels_before: int
    levels_after: int
    wall_time: float
    params: dict = field(default_factory=dict)
    equivalence_checked: bool = False
    check_mode: str = ""

    def to_dict(self):
        return {
            "pass": self.name, "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after, "levels_before": self.levels_before,
            "levels_after": self.levels_after, "wall_time": self.wall_time,
            "params": self.params, "equivalence_checked": self.equivalence_checked,
            "check_mode": self.check_mode,
        }


def _s(name, seed=0, **params):
    return PassStep(name, tuple(sorted(params.items())), seed)


RECIPES = {
    1: Recipe(1, (_s("strash"), _s("balance"))),
    2: Recipe(2, (_s("strash"), _s("rewrite"))),
    3: Recipe(3, (_s("strash"), _s("rewrite"), _s("balance", seed=3))),
    4: Recipe(4, (_s("strash"), _s("refactor"))),
    5: Recipe(5, (_s("strash"), _s("refactor"), _s("balance", seed=5))),
    6: Recipe(6, (_s("strash"), _s("resub"))),
    7: Recipe(7, (_s("strash"), _s("balance", seed=7), _s("rewrite"),
                  _s("refactor"))),
    8: Recipe(8, (_s("strash"), _s("fraig"))),
    9: Recipe(9, (_s("strash"), _s("rewrite"), _s("resub"),
                  _s("balance", seed=9))),
    10: Recipe(10, (_s("strash"), _s("refactor"), _s("rewrite"))),
    11: Recipe(11, (_s("strash"), _s("gate_size"))),
    12: Recipe(12, (_s("strash"), _s("balance", seed=12), _s("gate_size"))),
    13: Recipe(13, (_s("strash"), _s("fraig"), _s("balance", seed=13))),
    14: Recipe(14, (_s("strash"), _s("rewrite", cut_size=5),
                    _s("rewrite", seed=14))),
    15: Recipe(15, (_s("strash"), _s("refactor", max_cone_inputs=12),
                    _s("resub", max_divisors=24))),
    16: Recipe(16, (_s("strash"), _s("resub"), _s("fraig"),
                    _s("rewrite", seed=16))),
    17: Recipe(17, (_s("strash"), _s("balance", seed=17), _s("refactor"),
                    _s("resub"), _s("rewrite"), _s("gate_size"))),
    18: Recipe(18, (_s("strash"), _s("fraig"), _s("rewrite"), _s("refactor"),
                    _s("balance", seed=18))),
}


def recipe_from_steps(steps) -> Recipe:
    """Build a user recipe from [{'pass': name, 'params': {...}, 'seed': n}]."""
    parsed = [PassStep(d["pass"], tuple(sorted(d.get("params", {}).items())),
                       d.get("seed", 0)) for d in steps]
    if not parsed or parsed[0].name != "strash":
        parsed.insert(0, PassStep("strash"))
    return Recipe(0, tuple(parsed))


def _derive_seed(user_seed, recipe_id, step_index, step_seed):
    blob = f"{user_seed}:{recipe_id}:{step_index}:{step_seed}".encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


def _run_step(aig, step, eff_seed):
    p = step.param_dict()
    if step.name == "strash":
        return strash(aig)
    if step.name == "balance":
        return balance(aig, seed=eff_seed)
    if step.name == "rewrite":
        return rewrite(aig, cut_size=p.get("cut_size", 4),
                       max_cuts=p.get("max_cuts", 8), seed=eff_seed)
    if step.name == "refactor":
        return refactor(aig, max_cone_inputs=p.get("max_cone_inputs", 10),
                        seed=eff_seed)
    if step.name == "resub":
        return resubstitute(aig, max_divisors=p.get("max_divisors", 20),
                            seed=eff_seed)
    if step.name == "fraig":
        return fraig(aig, sim_words=p.get("sim_words", 16), seed=eff_seed,
                     exact_budget=p.get("exact_budget", 4096))
    if step.name == "gate_size":
        return aig  # grouping applies at netlist emission
    raise ValueError(f"unknown pass '{step.name}'")


def apply_recipe(n: Netlist, recipe: Recipe, seed=0, exhaustive_bound=24,
                 sample_vectors=100_000):
    """Run a recipe over a netlist; returns (netlist, pass reports).

    The output preserves PI/PO names and order and is equivalence-checked
    against the input (exhaustive up to ``exhaustive_bound`` PIs, randomized
    miter sampling above).  A check failure raises RestructureError naming
    the offending pass.
    """
    from .equiv import CheckConfig, check_equivalence

    aig = to_aig(n)
    group = any(s.name == "gate_size" for s in recipe.steps)
    reports = []
    stages = [aig]
    for idx, step in enumerate(recipe.steps):
        eff = _derive_seed(seed, recipe.id, idx, step.seed)
        t0 = time.perf_counter()
        nxt = _run_step(aig, step, eff)
        reports.append(PassReport(step.name, aig.n_ands, nxt.n_ands,
                                  aig.max_level, nxt.max_level,
                                  time.perf_counter() - t0, step.param_dict()))
        aig = nxt
        stages.append(aig)
    out = from_aig(aig, group_multi_input_and=group, name=n.name)

    cfg = CheckConfig(exhaustive_bound=exhaustive_bound,
                      sample_vectors=sample_vectors, seed=seed)
    verdict = check_equivalence(n, out, cfg)
    if verdict.result == "counterexample":
        culprit = _find_culprit(recipe, stages, len(n.inputs))
        raise RestructureError(
            f"recipe {recipe.id}: pass '{culprit}' broke functional "
            "equivalence (internal bug)")
    for r in reports:
        r.equivalence_checked = True
        r.check_mode = verdict.mode
    return out, reports


def _find_culprit(recipe, stages, n_pis):
    from .aig import exhaustive_signatures, po_signatures

    if n_pis == 0 or n_pis > 16:
        return recipe.steps[-1].name
    width = 1 << n_pis
    ref = po_signatures(stages[0], exhaustive_signatures(stages[0]), width)
    for idx in range(1, len(stages)):
        cur = po_signatures(stages[idx], exhaustive_signatures(stages[idx]), width)
        if cur != ref:
            return recipe.steps[idx - 1].name
    return recipe.steps[-1].name
