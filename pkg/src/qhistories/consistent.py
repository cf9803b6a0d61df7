"""Consistent histories: class operators and the decoherence functional.

Uses the medium-decoherence condition: a family is consistent for a
state when every off-diagonal entry D(a, b) = Tr(C_a rho C_b^dagger)
vanishes to within tolerance. Unlike the compatibility test of
generalized contexts, this condition depends on the state.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .contexts import State
from .errors import DimensionMismatchError, InconsistentFamilyError, ValidationError, ZeroConditioningError
from .histories import MultiIndex, TimedContext, check_times, translate_context
from .linalg import TOL, Projector, Propagator

Event = Union[Callable[[MultiIndex], bool], Iterable[MultiIndex]]


@dataclass(frozen=True, eq=False)
class HistoryFamily:
    reference_time: float
    timed_contexts: tuple[TimedContext, ...]
    propagator: Propagator
    heisenberg_atoms: tuple[tuple[Projector, ...], ...]

    @classmethod
    def build(cls, t0: float, tcs: Sequence[TimedContext], u: Propagator) -> "HistoryFamily":
        tcs = tuple(tcs)
        check_times(tcs)
        heis = tuple(translate_context(tc, u, t0) for tc in tcs)
        return cls(float(t0), tcs, u, heis)

    @property
    def dim(self) -> int:
        return self.timed_contexts[0].context.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(h) for h in self.heisenberg_atoms)

    def histories(self) -> list[MultiIndex]:
        return list(product(*(range(n) for n in self.shape)))


def class_operator(family: HistoryFamily, alpha: Sequence[int]) -> np.ndarray:
    """C_alpha = Pi_{n,0}^{k_n} ... Pi_{1,0}^{k_1} (latest time leftmost)."""
    alpha = tuple(alpha)
    if len(alpha) != len(family.shape) or any(not 0 <= k < n for k, n in zip(alpha, family.shape)):
        raise ValidationError(f"history {alpha} invalid for family of shape {family.shape}")
    c = np.eye(family.dim, dtype=complex)
    for atoms, k in zip(family.heisenberg_atoms, alpha):
        c = atoms[k].matrix @ c
    return c


@dataclass(frozen=True, eq=False)
class DecoherenceMatrix:
    histories: tuple[MultiIndex, ...]
    matrix: np.ndarray

    def __getitem__(self, pair: tuple[MultiIndex, MultiIndex]) -> complex:
        a, b = pair
        return complex(self.matrix[self._pos[tuple(a)], self._pos[tuple(b)]])

    @property
    def _pos(self) -> dict[MultiIndex, int]:
        return {h: n for n, h in enumerate(self.histories)}

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    def max_off_diagonal(self) -> tuple[float, tuple[MultiIndex, MultiIndex] | None]:
        off = np.abs(self.matrix - np.diag(np.diag(self.matrix)))
        if off.size <= 1:
            return 0.0, None
        a, b = np.unravel_index(int(np.argmax(off)), off.shape)
        return float(off[a, b]), (self.histories[a], self.histories[b])


def decoherence_functional(family: HistoryFamily, state: State) -> DecoherenceMatrix:
    if state.dim != family.dim:
        raise DimensionMismatchError(f"state dimension {state.dim} vs family dimension {family.dim}")
    hs = family.histories()
    cs = np.stack([class_operator(family, h) for h in hs])
    # D[a, b] = Tr(C_a rho C_b^dagger)
    d = np.einsum("aij,jk,bik->ab", cs, state.rho, cs.conj(), optimize=True)
    return DecoherenceMatrix(tuple(hs), d)


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    max_off_diagonal: float
    worst_pair: tuple[MultiIndex, MultiIndex] | None
    tolerance: float

    def __bool__(self) -> bool:
        return self.consistent


def is_consistent(family: HistoryFamily, state: State, tol: float = TOL) -> ConsistencyReport:
    """Medium decoherence: max |D(a, b)| over a != b at most ``tol``. Truthy iff consistent."""
    worst, pair = decoherence_functional(family, state).max_off_diagonal()
    return ConsistencyReport(worst <= tol, worst, pair, tol)


def _require_consistent(family: HistoryFamily, state: State, tol: float) -> DecoherenceMatrix:
    dm = decoherence_functional(family, state)
    worst, pair = dm.max_off_diagonal()
    if worst > tol:
        report = ConsistencyReport(False, worst, pair, tol)
        raise InconsistentFamilyError(
            f"family inconsistent for this state: |D{pair}| = {worst:.3g} > {tol:.3g}", report
        )
    return dm


def history_probability(family: HistoryFamily, state: State, alpha: Sequence[int], tol: float = TOL) -> float:
    """D(alpha, alpha); refused with InconsistentFamilyError unless the family is consistent."""
    dm = _require_consistent(family, state, tol)
    alpha = tuple(alpha)
    if alpha not in dm._pos:
        raise ValidationError(f"history {alpha} invalid for family of shape {family.shape}")
    return float(dm[alpha, alpha].real)


def event_set(family: HistoryFamily, event: Event) -> frozenset[MultiIndex]:
    if callable(event):
        return frozenset(h for h in family.histories() if event(h))
    out = frozenset(tuple(h) for h in event)
    valid = set(family.histories())
    bad = sorted(out - valid)
    if bad:
        raise ValidationError(f"histories {bad} invalid for family of shape {family.shape}")
    return out


def at(i: int, k: int) -> Callable[[MultiIndex], bool]:
    """Predicate: atom ``k`` of the context at position ``i`` occurs."""
    return lambda h: h[i] == k


def event_probability(family: HistoryFamily, state: State, event: Event, tol: float = TOL) -> float:
    dm = _require_consistent(family, state, tol)
    pos = dm._pos
    diag = dm.diagonal()
    return float(sum(diag[pos[h]] for h in event_set(family, event)))


def family_conditional(
    family: HistoryFamily, state: State, a: Event, b: Event, tol: float = TOL
) -> float:
    """Sum of D(h, h) over h in a and b, divided by the sum over h in b.

    ``a`` and ``b`` are predicates on multi-indices or explicit sets of
    them. The family must be consistent and Pr(b) must exceed ``tol``.
    """
    dm = _require_consistent(family, state, tol)
    pos = dm._pos
    diag = dm.diagonal()
    sa, sb = event_set(family, a), event_set(family, b)
    pb = float(sum(diag[pos[h]] for h in sb))
    if pb <= tol:
        raise ZeroConditioningError(f"Pr(b) = {pb:.3g} <= {tol:.3g}", pb)
    return float(sum(diag[pos[h]] for h in sa & sb)) / pb
