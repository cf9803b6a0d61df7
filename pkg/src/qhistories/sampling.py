"""Random states, unitaries and contexts for randomized checks."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .contexts import Context, State, validate_context
from .histories import TimedContext
from .linalg import Projector, Propagator, _frozen, hermitize, propagate


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.eye(1)
    return unitary_group.rvs(d, random_state=rng)


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * hermitize(g)


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> State:
    """Density matrix W W^dagger / Tr from a Ginibre matrix of the given rank (default full)."""
    k = d if rank is None else rank
    w = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = w @ w.conj().T
    return State(_frozen(hermitize(rho / np.trace(rho).real)))


def random_partition(d: int, rng: np.random.Generator, n_parts: int | None = None) -> list[list[int]]:
    """Shuffle 0..d-1 and cut into ``n_parts`` nonempty blocks."""
    if n_parts is None:
        n_parts = int(rng.integers(1, d + 1))
    order = rng.permutation(d)
    cuts = np.sort(rng.choice(np.arange(1, d), size=n_parts - 1, replace=False)) if n_parts > 1 else []
    return [sorted(int(x) for x in block) for block in np.split(order, cuts)]


def block_projectors(basis: np.ndarray, blocks: Sequence[Sequence[int]]) -> list[Projector]:
    out = []
    for b in blocks:
        cols = basis[:, list(b)]
        out.append(Projector.trusted(cols @ cols.conj().T))
    return out


def random_context(d: int, rng: np.random.Generator, basis: np.ndarray | None = None,
                   n_atoms: int | None = None) -> Context:
    if basis is None:
        basis = random_unitary(d, rng)
    return validate_context(block_projectors(basis, random_partition(d, rng, n_atoms)))


def compatible_family(
    d: int,
    rng: np.random.Generator,
    times: Sequence[float],
    u: Propagator,
    t0: float = 0.0,
) -> list[TimedContext]:
    """Timed contexts whose Heisenberg atoms share one random eigenbasis.

    Each atom is built at t0 as a block of the common basis and moved to
    its Schroedinger time t_i by U(t_i, t0).
    """
    basis = random_unitary(d, rng)
    out = []
    for t in times:
        v = propagate(u, t0, t, d)
        heis = block_projectors(basis, random_partition(d, rng))
        atoms = [Projector.trusted(v @ h.matrix @ v.conj().T) for h in heis]
        out.append(TimedContext(float(t), validate_context(atoms)))
    return out
