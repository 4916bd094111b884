"""Functionally restructure a circuit with the eighteen shipped recipes.

Each recipe is a pipeline over the AND-inverter graph (strash, balance,
rewrite, refactor, resubstitution, fraig, gate-size change).  The output
always computes the same function -- apply_recipe() proves it before
returning -- but the structure varies recipe to recipe, which is the whole
point: the same circuit, many shapes.
"""

import random

from htforge import RECIPES, apply_recipe, check_equivalence, parse_netlist
from htforge.aig import export_aiger, strash, to_aig
from htforge.netlist import Gate, Netlist, write_netlist

rng = random.Random(7)
pis = [f"i{k}" for k in range(8)]
nets = list(pis)
gates = []
for k in range(48):
    kind = rng.choice(["AND", "OR", "XOR", "NAND", "NOR", "NOT"])
    ins = ((rng.choice(nets),) if kind == "NOT"
           else (rng.choice(nets), rng.choice(nets)))
    gates.append(Gate(kind, f"w{k}", ins, f"g{k}"))
    nets.append(f"w{k}")
sinks = [g.output for g in gates
         if not any(g.output in h.inputs for h in gates)]
n = Netlist("demo", tuple(pis), tuple(sinks), tuple(gates))

base = strash(to_aig(n))
print(f"original: {len(n.gates)} gates -> AIG {base.n_ands} nodes, "
      f"depth {base.max_level}\n")

print("recipe  passes                                        gates  verdict")
shapes = set()
for rid in sorted(RECIPES):
    out, reports = apply_recipe(n, RECIPES[rid], seed=1)
    verdict = check_equivalence(n, out)
    names = ",".join(r.name for r in reports)
    print(f"  {rid:2d}    {names:44s}  {len(out.gates):3d}   {verdict.result}")
    shapes.add(write_netlist(out))
print(f"\n{len(shapes)} structurally distinct variants out of 18 recipes")

print("\nASCII AIGER export of the strashed original (head):")
print("\n".join(export_aiger(base).splitlines()[:6]))
