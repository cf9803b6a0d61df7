"""Compatibility implies consistency, and consistency depends on the state.

Part one samples compatible two-time families and checks that their
decoherence functional is diagonal, with history probabilities equal to
the generalized-context probabilities. Part two shows a family that is
consistent for one state and inconsistent for another, which is why a
state-independent compatibility test is the stronger requirement.
"""

import numpy as np

from qhistories import HistoryFamily, State, is_consistent, three_box_scenario
from qhistories.cli import bridge_demo

print("bridge demo:", bridge_demo(seed=7, trials=50, tol=1e-9))

s = three_box_scenario()
fam = HistoryFamily.build(s.reference_time, [s.contexts[0], s.contexts[2]], s.propagator)
for name, psi in (("(1,1,1)/sqrt3", np.ones(3) / np.sqrt(3)),
                  ("(1,1,0)/sqrt2", np.array([1, 1, 0]) / np.sqrt(2)),
                  ("(1,0,1)/sqrt2", np.array([1, 0, 1]) / np.sqrt(2))):
    rep = is_consistent(fam, State.pure(psi))
    print(f"state {name}: consistent={rep.consistent} max off-diagonal {rep.max_off_diagonal:.6f}")
