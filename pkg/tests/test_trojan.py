import pytest

from htforge.analysis import exact_signal_prob
from htforge.equiv import CheckConfig, check_trojan_semantics
from htforge.netlist import parse_netlist, simulate, validate
from htforge.trojan import (
    InsertionError,
    TrojanRecord,
    TrojanSpec,
    activation_estimate,
    find_trigger_witness,
    insert_trojan,
)

from conftest import all_stimuli, random_netlist


def _wide_and(k=8):
    ins = ", ".join(f"i{j}" for j in range(k))
    return parse_netlist(f"module m({ins}, y); input {ins}; output y;"
                         f" and g(y, {ins}); endmodule")


def test_insert_into_full_adder(full_adder):
    spec = TrojanSpec(q=2, rare_count=0, threshold=0.01, seed=3,
                      sample_vectors=4096)
    infected, rec = insert_trojan(full_adder, spec)
    assert infected.inputs == full_adder.inputs
    assert infected.outputs == full_adder.outputs
    assert validate(infected) == []
    kinds = [g.kind for g in infected.gates]
    assert kinds.count("XOR") == full_adder_xor_count() + 1
    assert "AND" in kinds
    # agreement whenever the trigger is off, divergence on the witness
    for stim in all_stimuli(full_adder):
        vg = simulate(full_adder, stim)
        vi = simulate(infected, stim)
        active = all((vi[net] if pol else 1 - vi[net])
                     for net, pol in rec.trigger)
        if not active:
            assert all(vg[po] == vi[po] for po in full_adder.outputs)
    vg = simulate(full_adder, rec.witness)
    vi = simulate(infected, rec.witness)
    assert any(vg[po] != vi[po] for po in full_adder.outputs)


def full_adder_xor_count():
    return 2


def test_insert_all_rare_picks_wide_and_output():
    ins = ", ".join(f"i{j}" for j in range(8))
    n = parse_netlist(f"module m({ins}, y, z); input {ins}; output y, z;"
                      f" and g1(y, {ins}); or g2(z, i0, i1); endmodule")
    spec = TrojanSpec(q=2, rare_count=1, threshold=0.1, seed=1,
                      sample_vectors=4096)
    infected, rec = insert_trojan(n, spec)
    nets = dict(rec.trigger)
    assert "y" in nets and nets["y"] == 1  # rare value of a low-p net is 1
    assert rec.victim == "z"


def test_insert_no_loop_free_victim():
    # both gate outputs sit inside the trigger cone, so no victim exists
    n = parse_netlist("module m(a,b,c,y); input a,b,c; output y; wire w;"
                      " and g1(w,a,b); and g2(y,w,c); endmodule")
    spec = TrojanSpec(q=2, rare_count=2, threshold=0.3, seed=0,
                      sample_vectors=4096)
    with pytest.raises(InsertionError, match="victim"):
        insert_trojan(n, spec)


def test_insert_insufficient_rare_nets():
    n = parse_netlist(
        "module m(a,b,y); input a,b; output y; xor g(y,a,b); endmodule")
    spec = TrojanSpec(q=2, rare_count=2, threshold=0.01, seed=0,
                      sample_vectors=4096)
    with pytest.raises(InsertionError, match="insufficient rare nets"):
        insert_trojan(n, spec)


def test_insert_q_exceeds_net_count():
    n = parse_netlist(
        "module m(a,b,y); input a,b; output y; and g(y,a,b); endmodule")
    spec = TrojanSpec(q=5, rare_count=0, threshold=0.5, seed=0,
                      sample_vectors=1024)
    with pytest.raises(InsertionError, match="exceeds"):
        insert_trojan(n, spec)


def test_insert_deterministic(full_adder):
    spec = TrojanSpec(q=2, rare_count=0, threshold=0.01, seed=11,
                      sample_vectors=4096)
    _, r1 = insert_trojan(full_adder, spec)
    _, r2 = insert_trojan(full_adder, spec)
    assert r1 == r2


def test_spec_validation():
    with pytest.raises(ValueError):
        TrojanSpec(q=1)
    with pytest.raises(ValueError):
        TrojanSpec(q=2, rare_count=3)
    with pytest.raises(ValueError):
        TrojanSpec(q=2, payload_kind="wire-or")
    assert TrojanSpec(q=3).rare_count == 3  # defaults to q


def test_record_json_round_trip(full_adder):
    spec = TrojanSpec(q=2, rare_count=0, threshold=0.01, seed=5,
                      sample_vectors=4096)
    _, rec = insert_trojan(full_adder, spec)
    back = TrojanRecord.from_json_dict(rec.to_json_dict())
    assert back == rec


def test_find_witness_full_adder(full_adder):
    spec = TrojanSpec(q=2, rare_count=0, threshold=0.01, seed=3,
                      sample_vectors=4096)
    infected, rec = insert_trojan(full_adder, spec)
    wit = find_trigger_witness(infected, rec)
    assert wit is not None
    vals = simulate(infected, wit)
    assert all((vals[net] if pol else 1 - vals[net])
               for net, pol in rec.trigger)


def test_find_witness_unsatisfiable():
    n = parse_netlist("module m(a,y,z); input a; output y,z;"
                      " not g1(y,a); buf g2(z,a); endmodule")
    rec = TrojanRecord(trigger=(("y", 1), ("z", 1)), trigger_net="t",
                       victim="z", victim_pre="p", payload_gate="gp",
                       witness=None, added_gates=(), q=2)
    assert find_trigger_witness(n, rec) is None


def test_find_witness_wide_and_forced():
    n = _wide_and(8)
    rec = TrojanRecord(trigger=(("y", 1),), trigger_net="t", victim="y",
                       victim_pre="p", payload_gate="gp", witness=None,
                       added_gates=(), q=1)
    wit = find_trigger_witness(n, rec)
    assert wit is not None
    assert all(wit[f"i{j}"] == 1 for j in range(8))


def test_activation_estimate_wide_and():
    n = _wide_and(8)
    rec = TrojanRecord(trigger=(("y", 1),), trigger_net="t", victim="y",
                       victim_pre="p", payload_gate="gp", witness=None,
                       added_gates=(), q=1)
    est = activation_estimate(n, rec, 100_000, seed=4)
    assert est <= 0.004  # true rate 1/256


def test_activation_estimate_unsatisfiable():
    n = parse_netlist("module m(a,y,z); input a; output y,z;"
                      " not g1(y,a); buf g2(z,a); endmodule")
    rec = TrojanRecord(trigger=(("y", 1), ("z", 1)), trigger_net="t",
                       victim="z", victim_pre="p", payload_gate="gp",
                       witness=None, added_gates=(), q=2)
    assert activation_estimate(n, rec, 50_000, seed=1) == 0.0


def test_activation_estimate_matches_exact_prob():
    n = parse_netlist(
        "module m(a,b,y); input a,b; output y; xor g(y,a,b); endmodule")
    rec = TrojanRecord(trigger=(("y", 1),), trigger_net="t", victim="y",
                       victim_pre="p", payload_gate="gp", witness=None,
                       added_gates=(), q=1)
    exact = exact_signal_prob(n).p["y"]
    est = activation_estimate(n, rec, 100_000, seed=9)
    assert abs(est - exact) < 0.01


def test_stealth_exhaustive_on_seeded_insertions():
    cfg = CheckConfig()
    for seed in range(6):
        n = random_netlist(seed * 17 + 3, n_pis=6, n_gates=30)
        spec = TrojanSpec(q=2, rare_count=1, threshold=0.35, seed=seed,
                          sample_vectors=4096)
        try:
            infected, rec = insert_trojan(n, spec)
        except InsertionError:
            continue
        verdict = check_trojan_semantics(n, infected, rec, cfg)
        assert verdict.ok, verdict.reason
