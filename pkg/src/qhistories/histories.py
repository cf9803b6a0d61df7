"""Generalized contexts: joint properties at several times.

Contexts at times t_1 < ... < t_n are translated to a reference time
t_0 (Heisenberg picture). When every pair of translated atoms commutes
the products of one atom per time form a new projective decomposition
whose index set is the Cartesian product of the per-time label sets.
The compatibility test consumes no state.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

import numpy as np

from .contexts import Context, LatticeElement, State, check_decomposition, trace_product
from .errors import ContextError, DimensionMismatchError, NumericalError, ValidationError, ZeroConditioningError
from .linalg import (
    TOL,
    Projector,
    _frozen,
    commutation_threshold,
    commutator_norm,
    dagger,
    matrix_of,
    propagate,
    Propagator,
)

MARGINAL_FACTOR = 100.0

MultiIndex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class TimedContext:
    time: float
    context: Context


def heisenberg_translate(p, u: Propagator, t_i: float, t0: float) -> Projector:
    """U(t0, t_i) Pi U(t_i, t0): the property at t_i seen from t0."""
    pm = matrix_of(p)
    rank = p.rank if isinstance(p, Projector) else None
    if u.mode == "trivial" or t_i == t0:
        if isinstance(p, Projector):
            return p
        return Projector.trusted(pm)
    v = propagate(u, t0, t_i, pm.shape[0])
    out = Projector.trusted(dagger(v) @ pm @ v)
    if rank is not None and out.rank != rank:
        raise NumericalError(f"rank changed under translation ({rank} -> {out.rank})")
    return out


def translate_context(tc: TimedContext, u: Propagator, t0: float) -> tuple[Projector, ...]:
    return tuple(heisenberg_translate(a, u, tc.time, t0) for a in tc.context.atoms)


def check_times(tcs: Sequence[TimedContext]) -> None:
    if len(tcs) == 0:
        raise ValidationError("at least one timed context is required")
    for a, b in zip(tcs, tcs[1:]):
        if not a.time < b.time:
            raise ValidationError(f"context times must be strictly increasing ({a.time} then {b.time})")
    d = tcs[0].context.dim
    if any(tc.context.dim != d for tc in tcs):
        raise DimensionMismatchError("contexts have unequal dimensions")


@dataclass(frozen=True)
class NonCommutingPair:
    """Atoms (i, k_i) and (j, k_j) whose translations fail to commute."""

    i: int
    k_i: int
    j: int
    k_j: int
    norm: float
    marginal: bool


@dataclass(frozen=True)
class IncompatibleVerdict:
    """Answer of the builder when the contexts admit no generalized context.

    This is a result, not an error: the formalism assigns no joint
    probabilities to these contexts.
    """

    pairs: tuple[NonCommutingPair, ...]

    compatible = False

    @property
    def max_norm(self) -> float:
        return max(p.norm for p in self.pairs)

    @property
    def marginal(self) -> bool:
        return all(p.marginal for p in self.pairs)

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class GeneralizedContext:
    reference_time: float
    timed_contexts: tuple[TimedContext, ...]
    heisenberg_atoms: tuple[tuple[Projector, ...], ...]
    atoms: dict[MultiIndex, Projector]
    zero_atoms: frozenset[MultiIndex]

    compatible = True

    @property
    def dim(self) -> int:
        return self.timed_contexts[0].context.dim

    @property
    def n_times(self) -> int:
        return len(self.timed_contexts)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(tc.context.size for tc in self.timed_contexts)

    def indices(self) -> list[MultiIndex]:
        return list(self.atoms)

    def property(self, indices: Iterable[MultiIndex]) -> "GeneralizedProperty":
        return GeneralizedProperty(self, indices)

    def atom(self, k: MultiIndex) -> "GeneralizedProperty":
        return self.property([tuple(k)])

    def full(self) -> "GeneralizedProperty":
        return self.property(self.atoms)

    def empty(self) -> "GeneralizedProperty":
        return self.property(())

    def where(self, predicate: Callable[[MultiIndex], bool]) -> "GeneralizedProperty":
        return self.property(k for k in self.atoms if predicate(k))

    def at(self, i: int, ks: int | Iterable[int]) -> "GeneralizedProperty":
        """Property 'atom k_i of context i occurs', whatever happens at other times."""
        ks = {ks} if isinstance(ks, int) else set(ks)
        return self.where(lambda k: k[i] in ks)

    def __bool__(self) -> bool:
        return True

    def __repr__(self) -> str:
        return f"GeneralizedContext(dim={self.dim}, shape={self.shape}, zero_atoms={len(self.zero_atoms)})"


class GeneralizedProperty(LatticeElement):
    """Subset of the product index set of a GeneralizedContext."""

    def __init__(self, gcontext: GeneralizedContext, index_set: Iterable[MultiIndex]):
        idx = frozenset(tuple(int(x) for x in k) for k in index_set)
        bad = [k for k in idx if k not in gcontext.atoms]
        if bad:
            raise ValidationError(f"multi-indices {sorted(bad)} outside the generalized context")
        self.gcontext = gcontext
        self.index_set = idx

    @property
    def owner(self) -> GeneralizedContext:
        return self.gcontext

    def universe(self) -> frozenset:
        return frozenset(self.gcontext.atoms)

    def _new(self, indices: frozenset) -> "GeneralizedProperty":
        return GeneralizedProperty(self.gcontext, indices)

    @property
    def projector(self) -> Projector:
        g = self.gcontext
        m = np.zeros((g.dim, g.dim), dtype=complex)
        rank = 0
        for k in sorted(self.index_set):
            m = m + g.atoms[k].matrix
            rank += g.atoms[k].rank
        return Projector(_frozen(m), rank)

    def __repr__(self) -> str:
        return f"GeneralizedProperty({sorted(self.index_set)})"


def compatibility_pairs(heis: Sequence[Sequence[Projector]], tol: float = TOL) -> list[NonCommutingPair]:
    """Every pair of atoms from different times whose commutator exceeds tolerance."""
    bad = []
    for i, j in combinations(range(len(heis)), 2):
        for ki, a in enumerate(heis[i]):
            for kj, b in enumerate(heis[j]):
                norm = commutator_norm(a, b)
                thr = commutation_threshold(a, b, tol)
                if norm > thr:
                    bad.append(NonCommutingPair(i, ki, j, kj, norm, norm <= MARGINAL_FACTOR * thr))
    return bad


def build_generalized_context(
    t0: float,
    tcs: Sequence[TimedContext],
    u: Propagator,
    tol: float = TOL,
) -> GeneralizedContext | IncompatibleVerdict:
    """Translate ``tcs`` to ``t0`` and form the generalized context.

    Returns an IncompatibleVerdict listing every non-commuting atom
    pair when the translated atoms do not all commute. Only strict
    ordering of the context times is enforced; ``t0`` may lie anywhere.
    """
    tcs = tuple(tcs)
    check_times(tcs)
    heis = tuple(translate_context(tc, u, t0) for tc in tcs)
    bad = compatibility_pairs(heis, tol)
    if bad:
        return IncompatibleVerdict(tuple(bad))

    d = tcs[0].context.dim
    atoms: dict[MultiIndex, Projector] = {}
    zeros = set()
    for k in product(*(range(len(h)) for h in heis)):
        m = np.eye(d, dtype=complex)
        for i, ki in enumerate(k):
            m = m @ heis[i][ki].matrix
        p = Projector.trusted(m)
        atoms[k] = p
        if p.rank == 0:
            zeros.add(k)
    check_tol = 5 * tol * max(1, len(tcs))
    try:
        check_decomposition([p.matrix for p in atoms.values()], check_tol)
    except ContextError as exc:
        raise NumericalError(f"generalized atoms failed the decomposition check: {exc}") from exc
    return GeneralizedContext(float(t0), tcs, heis, atoms, frozenset(zeros))


def _check_member(gc: GeneralizedContext, *props: GeneralizedProperty) -> None:
    for p in props:
        if p.gcontext is not gc:
            raise ValidationError("property belongs to a different generalized context")


def generalized_probability(state: State, p: GeneralizedProperty) -> float:
    """Tr(rho_t0 Pi_p) with Pi_p the sum of the selected generalized atoms."""
    if state.dim != p.gcontext.dim:
        raise DimensionMismatchError(f"state dimension {state.dim} vs context dimension {p.gcontext.dim}")
    return trace_product(state, p.projector)


def generalized_conditional(
    state: State, a: GeneralizedProperty, b: GeneralizedProperty, tol: float = TOL
) -> float:
    """Pr(a and b) / Pr(b) inside one generalized context."""
    _check_member(a.gcontext, b)
    pb = generalized_probability(state, b)
    if pb <= tol:
        raise ZeroConditioningError(f"Pr(b) = {pb:.3g} <= {tol:.3g}", pb)
    return generalized_probability(state, a.meet(b)) / pb


def marginal_atom(gc: GeneralizedContext, i: int, k_i: int) -> np.ndarray:
    """Sum of generalized atoms with index k_i at position i."""
    return sum(p.matrix for k, p in gc.atoms.items() if k[i] == k_i)
