"""Single-time contexts, their property lattice and Born-rule probabilities."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ContextError,
    DimensionMismatchError,
    NonCommutingError,
    NumericalError,
    ValidationError,
    ZeroConditioningError,
)
from .linalg import (
    TOL,
    Projector,
    _frozen,
    as_cmatrix,
    as_cvector,
    commutation_threshold,
    commutator_norm,
    fro,
    hermiticity_residual,
    is_projector,
    matrix_of,
    subspace_leq,
)


@dataclass(frozen=True, eq=False)
class State:
    """Density operator: Hermitian, unit trace, positive semidefinite."""

    rho: np.ndarray

    @classmethod
    def from_density(cls, rho, tol: float = TOL) -> "State":
        a = as_cmatrix(rho, "density matrix")
        res = hermiticity_residual(a)
        if res > tol:
            raise ValidationError(f"density matrix not Hermitian (residual {res:.3g})", res)
        tr = complex(np.trace(a))
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"density matrix trace {tr.real!r} != 1", abs(tr - 1.0))
        lo = float(np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min())
        if lo < -tol:
            raise ValidationError(f"density matrix not positive (min eigenvalue {lo:.3g})", -lo)
        return cls(_frozen(a))

    @classmethod
    def pure(cls, psi, tol: float = TOL) -> "State":
        v = as_cvector(psi, "state vector")
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > tol:
            raise ValidationError(f"state vector norm {n!r} != 1", abs(n - 1.0))
        return cls(_frozen(np.outer(v, v.conj())))

    @classmethod
    def maximally_mixed(cls, d: int) -> "State":
        return cls(_frozen(np.eye(d) / d))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def conjugate(self, u: np.ndarray) -> "State":
        """The state U rho U^dagger."""
        return State(_frozen(u @ self.rho @ u.conj().T))


@dataclass(frozen=True, eq=False)
class Context:
    """A projective decomposition ``atoms`` with display ``labels``.

    Contexts compare by identity: two properties belong to the same
    lattice only if they reference the same Context object.
    """

    atoms: tuple[Projector, ...]
    labels: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.atoms[0].dim

    @property
    def size(self) -> int:
        return len(self.atoms)

    def property(self, indices: Iterable[int]) -> "Property":
        return Property(self, frozenset(indices))

    def atom(self, k: int) -> "Property":
        return self.property([k])

    def full(self) -> "Property":
        return self.property(range(self.size))

    def empty(self) -> "Property":
        return self.property(())

    def __repr__(self) -> str:
        return f"Context(dim={self.dim}, labels={list(self.labels)})"


def check_decomposition(mats: Sequence[np.ndarray], tol: float = TOL) -> None:
    """Raise ContextError unless ``mats`` sum to I and are pairwise orthogonal within ``tol``."""
    d = mats[0].shape[0]
    for k, m in enumerate(mats):
        if m.shape != (d, d):
            raise DimensionMismatchError(f"atom {k} has shape {m.shape}, expected {(d, d)}")
    for j, k in combinations(range(len(mats)), 2):
        res = fro(mats[j] @ mats[k])
        if res > tol:
            raise ContextError(f"atoms {j} and {k} are not orthogonal (residual {res:.3g})", (j, k), res)
    res = fro(sum(mats) - np.eye(d))
    if res > tol:
        raise ContextError(f"atoms do not sum to the identity (residual {res:.3g})", (), res)


def validate_context(atoms: Sequence, labels: Sequence[str] | None = None, tol: float = TOL) -> Context:
    """Check that ``atoms`` form a projective decomposition and wrap them.

    Each atom must be a nonzero projector; the atoms must be pairwise
    orthogonal and sum to the identity. Failures raise ContextError
    naming the offending index (pair) and the residual norm.
    """
    if len(atoms) == 0:
        raise ContextError("a context needs at least one atom")
    projs: list[Projector] = []
    for k, a in enumerate(atoms):
        if isinstance(a, Projector):
            p = a
            if not is_projector(p.matrix, tol):
                raise ContextError(f"atom {k} is not a projector", (k,))
        else:
            try:
                p = Projector.from_matrix(a, tol)
            except ValidationError as exc:
                raise ContextError(f"atom {k}: {exc}", (k,), exc.residual) from exc
        if p.rank == 0:
            raise ContextError(f"atom {k} is the zero projector", (k,), 0.0)
        projs.append(p)
    check_decomposition([p.matrix for p in projs], tol)
    if labels is None:
        labels = [str(k) for k in range(len(projs))]
    if len(labels) != len(projs):
        raise ContextError("one label per atom required")
    return Context(tuple(projs), tuple(labels))


class LatticeElement:
    """Index-set element of the Boolean lattice generated by a decomposition.

    Subclasses provide ``owner`` (the decomposition) and ``index_set``;
    lattice operations are set algebra on the index sets, which makes
    the lattice exactly distributive and orthocomplemented.
    """

    owner: object
    index_set: frozenset

    def universe(self) -> frozenset:
        raise NotImplementedError

    def _new(self, indices: frozenset):
        raise NotImplementedError

    def _same_owner(self, other: "LatticeElement") -> None:
        if type(self) is not type(other) or self.owner is not other.owner:
            raise ValidationError("lattice operands belong to different contexts")

    def complement(self):
        return self._new(self.universe() - self.index_set)

    def meet(self, other):
        self._same_owner(other)
        return self._new(self.index_set & other.index_set)

    def join(self, other):
        self._same_owner(other)
        return self._new(self.index_set | other.index_set)

    def leq(self, other) -> bool:
        self._same_owner(other)
        return self.index_set <= other.index_set

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.owner is other.owner
            and self.index_set == other.index_set
        )

    def __hash__(self) -> int:
        return hash((id(self.owner), self.index_set))

    __and__ = meet
    __or__ = join
    __invert__ = complement
    __le__ = leq


class Property(LatticeElement):
    """Property of one context, stored as a subset of its atom indices."""

    def __init__(self, context: Context, index_set: Iterable[int]):
        idx = frozenset(int(k) for k in index_set)
        bad = [k for k in idx if not 0 <= k < context.size]
        if bad:
            raise ValidationError(f"atom indices {sorted(bad)} outside 0..{context.size - 1}")
        self.context = context
        self.index_set = idx

    @property
    def owner(self) -> Context:
        return self.context

    def universe(self) -> frozenset:
        return frozenset(range(self.context.size))

    def _new(self, indices: frozenset) -> "Property":
        return Property(self.context, indices)

    @property
    def projector(self) -> Projector:
        return property_projector(self)

    def __repr__(self) -> str:
        names = [self.context.labels[k] for k in sorted(self.index_set)]
        return f"Property({names})"


def property_projector(p: Property) -> Projector:
    """Sum of the selected atoms; the empty property gives the zero projector."""
    ctx = p.context
    m = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    rank = 0
    for k in sorted(p.index_set):
        m = m + ctx.atoms[k].matrix
        rank += ctx.atoms[k].rank
    return Projector(_frozen(m), rank)


def complement(p: LatticeElement):
    return p.complement()


def meet(p: LatticeElement, q: LatticeElement):
    return p.meet(q)


def join(p: LatticeElement, q: LatticeElement):
    return p.join(q)


def leq(p: LatticeElement, q: LatticeElement) -> bool:
    return p.leq(q)


def _projector_matrix(p) -> np.ndarray:
    if isinstance(p, LatticeElement):
        return p.projector.matrix
    return matrix_of(p)


def trace_product(state: State, p) -> float:
    """Unclamped Tr(rho P)."""
    m = _projector_matrix(p)
    if m.shape != state.rho.shape:
        raise DimensionMismatchError(f"state is {state.rho.shape}, property is {m.shape}")
    return float(np.real(np.einsum("ij,ji->", state.rho, m)))


def born_probability(state: State, p) -> float:
    """Tr(rho P) for a Property, Projector or projector matrix.

    The value is returned unclamped; use :func:`clamp_probability` at
    the reporting boundary.
    """
    return trace_product(state, p)


def clamp_probability(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def conditioned_state(state: State, r, tol: float = TOL) -> State:
    """Pi_r rho Pi_r normalized by its trace."""
    rm = _projector_matrix(r)
    num = rm @ state.rho @ rm
    w = float(np.trace(num).real)
    if w <= tol:
        raise ZeroConditioningError(f"conditioning weight Tr(rho Pi_r) = {w:.3g} <= {tol:.3g}", w)
    return State(_frozen(num / w))


def conditional_probability(state: State, p, r, tol: float = TOL) -> float:
    """Pr(p | r) = Tr(rho Pi_p Pi_r) / Tr(rho Pi_r) for commuting p, r.

    Raises NonCommutingError when the conditional is undefined and
    ZeroConditioningError when Tr(rho Pi_r) <= tol.
    """
    pm, rm = _projector_matrix(p), _projector_matrix(r)
    if pm.shape != rm.shape or pm.shape != state.rho.shape:
        raise DimensionMismatchError("state and projectors must share one dimension")
    norm = commutator_norm(pm, rm)
    if norm > commutation_threshold(pm, rm, tol):
        raise NonCommutingError(f"[Pi_p, Pi_r] has norm {norm:.3g}; conditional undefined", norm)
    w = trace_product(state, rm)
    if w <= tol:
        raise ZeroConditioningError(f"conditioning weight Tr(rho Pi_r) = {w:.3g} <= {tol:.3g}", w)
    return float(np.real(np.einsum("ij,jk,ki->", state.rho, pm, rm))) / w


def is_contrary(p, q, tol: float = TOL) -> bool:
    """p <= not q, i.e. range(Pi_p) inside range(I - Pi_q).

    Cross-checked against the equivalent orthogonality Pi_p Pi_q =
    Pi_q Pi_p = 0; a disagreement means the inputs are not projectors
    to within ``tol`` and raises NumericalError.
    """
    pm, qm = _projector_matrix(p), _projector_matrix(q)
    if pm.shape != qm.shape:
        raise DimensionMismatchError(f"dimension mismatch: {pm.shape} vs {qm.shape}")
    contained = subspace_leq(pm, np.eye(pm.shape[0]) - qm, tol)
    orthogonal = fro(pm @ qm) <= tol and fro(qm @ pm) <= tol
    if contained != orthogonal:
        raise NumericalError("subspace inclusion and orthogonality disagree for contrary test")
    return contained
