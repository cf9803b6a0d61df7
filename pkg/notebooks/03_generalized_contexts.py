"""Generalized contexts across time for a precessing spin.

With H = diag(0, pi/2) the x-basis rotates by a quarter turn per unit
time. Measuring x at t=1 and t=3 is compatible (the Heisenberg
projectors coincide up to relabeling); x at t=1 and t=2 is not.
"""

from pathlib import Path

from qhistories import build_generalized_context, clamp_probability, generalized_probability, load_scenario

root = Path(__file__).resolve().parents[1]
s = load_scenario(root / "scenarios" / "precession.json")

for pair in ((0, 2), (0, 1)):
    tcs = [s.contexts[i] for i in pair]
    gc = build_generalized_context(s.reference_time, tcs, s.propagator)
    times = [tc.time for tc in tcs]
    if gc:
        print(f"times {times}: compatible, {len(gc.atoms)} generalized atoms")
        for k, a in gc.atoms.items():
            print(f"  atom {k} rank {a.rank} probability {clamp_probability(generalized_probability(s.state, gc.atom(k))):.6f}")
    else:
        print(f"times {times}: incompatible, max commutator norm {gc.max_norm:.6f}")
        for pr in gc.pairs:
            print(f"  atoms ({pr.i},{pr.k_i}) and ({pr.j},{pr.k_j}) norm {pr.norm:.6f}")
