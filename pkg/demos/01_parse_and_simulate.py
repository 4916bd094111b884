"""Parse a structural Verilog netlist, validate it, and simulate it.

Walks through the front door of the toolkit: the eight-gate structural
subset, the netlist object model, scalar simulation, and the canonical
JSON dump used by `forge parse --json`.
"""

import json

from htforge import parse_netlist, simulate, validate, write_netlist
from htforge.netlist import to_json_dict

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

n = parse_netlist(FULL_ADDER)
print(f"parsed '{n.name}': {len(n.gates)} gates, "
      f"PIs {list(n.inputs)}, POs {list(n.outputs)}")
print("diagnostics:", validate(n) or "none")

print("\ntruth table:")
print(" a b cin | sum cout")
for word in range(8):
    stim = {"a": word & 1, "b": (word >> 1) & 1, "cin": (word >> 2) & 1}
    vals = simulate(n, stim)
    print(f" {stim['a']} {stim['b']}  {stim['cin']}  |  {vals['sum']}    "
          f"{vals['cout']}")

print("\ncanonical JSON dump (first gate):")
print(json.dumps(to_json_dict(n)["gates"][0], indent=2))

print("\nround trip: write_netlist -> parse_netlist")
again = parse_netlist(write_netlist(n))
assert [g.kind for g in again.gates] == [g.kind for g in n.gates]
print(write_netlist(n))
