"""Identify rare nets and hide a triggered payload behind them.

The trigger is an AND over nets that almost never reach their required
values under random stimulus; the payload XOR-flips one victim net.  The
inserter proves its own work: the shipped record carries an input witness
that activates the trigger and observably flips an output.
"""

from htforge import (
    TrojanSpec,
    activation_estimate,
    check_trojan_semantics,
    exact_signal_prob,
    find_trigger_witness,
    insert_trojan,
    parse_netlist,
    rare_nets,
    scoap,
)

SRC = """
module lock (k0, k1, k2, k3, k4, k5, d0, d1, ok, out);
  input k0, k1, k2, k3, k4, k5, d0, d1;
  output ok, out;
  wire m01, m23, m45, m0123, pass;
  and g1 (m01, k0, k1);
  and g2 (m23, k2, k3);
  and g3 (m45, k4, k5);
  and g4 (m0123, m01, m23);
  and g5 (pass, m0123, m45);
  buf g6 (ok, pass);
  xor g7 (out, d0, d1);
endmodule
"""

n = parse_netlist(SRC)
stats = exact_signal_prob(n)
rare, regular = rare_nets(stats, "signal-prob-low", 0.2)
print("signal probabilities (rarest first):")
for net in rare:
    print(f"  {net:6s} p = {stats.p[net]:.4f}")

sc = scoap(n)
print(f"\nSCOAP at the rarest net '{rare[0]}': "
      f"CC0={sc.cc0[rare[0]]} CC1={sc.cc1[rare[0]]} CO={sc.co[rare[0]]}")

spec = TrojanSpec(q=2, rare_count=2, threshold=0.2, seed=5,
                  sample_vectors=4096)
infected, rec = insert_trojan(n, spec)
print(f"\ninserted: trigger {rec.trigger} -> victim '{rec.victim}'")
print(f"added gates: {[g[3] for g in rec.added_gates]}")
print(f"witness: {rec.witness}")

est = activation_estimate(infected, rec, 100_000, seed=1)
print(f"activation estimate over 100k vectors: {est:.6f}")

wit = find_trigger_witness(infected, rec)
print(f"independent witness search: {wit}")

verdict = check_trojan_semantics(n, infected, rec)
print(f"semantics check ({verdict.mode}): "
      f"{'pass' if verdict.ok else verdict.reason}")
