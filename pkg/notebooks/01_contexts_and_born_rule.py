"""Contexts, their Boolean lattice, and Born probabilities.

Run with ``python3 notebooks/01_contexts_and_born_rule.py``.
"""

import numpy as np

from qhistories import State, born_probability, conditional_probability, is_contrary, ray, validate_context

# A qutrit prepared in the uniform superposition.
psi = np.ones(3) / np.sqrt(3)
rho = State.pure(psi)

# The coordinate context: "the particle is in box k" for k = 1, 2, 3.
boxes = validate_context([ray(e) for e in np.eye(3)], labels=["box 1", "box 2", "box 3"])

# Properties are subsets of atoms. Lattice operations are plain set algebra,
# so distributivity holds exactly.
b1, b2, b3 = (boxes.atom(k) for k in range(3))
not_b1 = ~b1
print("not box 1 =", not_b1)
print("box 1 and not box 1 is empty:", (b1 & not_b1) == boxes.empty())
print("box 2 or box 3 equals not box 1:", (b2 | b3) == not_b1)

# Born probabilities over the atoms sum to one.
probs = [born_probability(rho, a) for a in (b1, b2, b3)]
print("Born probabilities:", np.round(probs, 12), "sum", sum(probs))

# Box 1 and box 2 are contrary: one excludes the other.
print("box 1 contrary to box 2:", is_contrary(b1, b2))

# Conditioning on "box 1 or box 2" inside the same context.
given = b1 | b2
for name, p in (("box 1", b1), ("box 2", b2)):
    print(f"Pr({name} | box 1 or 2) = {conditional_probability(rho, p, given):.6f}")
# The two conditionals of contrary properties never add above one.
