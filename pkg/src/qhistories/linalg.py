"""Dense complex matrix kernel.

Projector predicates, commutators, the subspace order and unitary
propagation. All norms are Frobenius norms. The default tolerance
``TOL`` is small enough that double-precision roundoff for d up to a
few dozen stays orders of magnitude below it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    UnregisteredTimePairError,
    ValidationError,
)

TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a square, finite complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def as_cvector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1 or a.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def matrix_of(x) -> np.ndarray:
    """The bare matrix behind a Projector or array-like."""
    if isinstance(x, Projector):
        return x.matrix
    return np.asarray(x, dtype=complex)


def fro(a) -> float:
    return float(np.linalg.norm(a))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")


def hermiticity_residual(m) -> float:
    a = matrix_of(m)
    return fro(a - dagger(a))


def idempotency_residual(m) -> float:
    a = matrix_of(m)
    return fro(a @ a - a)


def is_projector(m, tol: float = TOL) -> bool:
    """True iff ``m`` is Hermitian and idempotent within ``tol``.

    Hermiticity is tested absolutely, idempotency relative to
    ``max(1, ||m||)`` so that products which vanish up to roundoff still
    count as the zero projector.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        return False
    if hermiticity_residual(a) > tol:
        return False
    return idempotency_residual(a) <= tol * max(1.0, fro(a))


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector with its rank.

    Build with :meth:`from_matrix` (validated) or the helpers
    :func:`projector_from_vectors`, :func:`ray`, :func:`identity`,
    :func:`zero`.
    """

    matrix: np.ndarray
    rank: int

    @classmethod
    def from_matrix(cls, m, tol: float = TOL) -> "Projector":
        a = as_cmatrix(m, "projector")
        herm = hermiticity_residual(a)
        if herm > tol:
            raise ValidationError(f"not Hermitian (residual {herm:.3g})", herm)
        idem = idempotency_residual(a)
        if idem > tol * max(1.0, fro(a)):
            raise ValidationError(f"not idempotent (residual {idem:.3g})", idem)
        tr = float(np.trace(a).real)
        if abs(tr - round(tr)) > max(tol, tol * a.shape[0]):
            raise ValidationError(f"trace {tr!r} is not an integer rank", abs(tr - round(tr)))
        return cls(_frozen(a), int(round(tr)))

    @classmethod
    def trusted(cls, m) -> "Projector":
        """Wrap a matrix known to be a projector up to roundoff (hermitized, not validated)."""
        a = hermitize(np.asarray(m, dtype=complex))
        return cls(_frozen(a), int(round(float(np.trace(a).real))))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "Projector":
        return Projector(_frozen(np.eye(self.dim) - self.matrix), self.dim - self.rank)

    def __repr__(self) -> str:
        return f"Projector(dim={self.dim}, rank={self.rank})"


def identity(d: int) -> Projector:
    return Projector(_frozen(np.eye(d)), d)


def zero(d: int) -> Projector:
    return Projector(_frozen(np.zeros((d, d))), 0)


def commutator(a, b) -> np.ndarray:
    a, b = matrix_of(a), matrix_of(b)
    _check_same_dim(a, b)
    return a @ b - b @ a


def commutator_norm(a, b) -> float:
    return fro(commutator(a, b))


def commutation_threshold(a, b, tol: float = TOL) -> float:
    return tol * max(1.0, fro(matrix_of(a)) * fro(matrix_of(b)))


def commutes(a, b, tol: float = TOL) -> bool:
    """``||AB - BA|| <= tol * max(1, ||A|| ||B||)``."""
    return commutator_norm(a, b) <= commutation_threshold(a, b, tol)


def subspace_leq(p, q, tol: float = TOL) -> bool:
    """Range of ``p`` contained in range of ``q``, tested as ``||QP - P|| <= tol``."""
    pm, qm = matrix_of(p), matrix_of(q)
    _check_same_dim(pm, qm)
    return fro(qm @ pm - pm) <= tol


def projector_from_vectors(vectors: Sequence, tol: float = TOL) -> Projector:
    """Orthogonal projector onto the span of ``vectors``.

    Modified Gram-Schmidt with one reorthogonalization pass; vectors
    whose residual norm falls to ``tol`` or below are dropped as
    linearly dependent.
    """
    if len(vectors) == 0:
        raise ValidationError("need at least one vector")
    vs = [as_cvector(v, f"vector {i}") for i, v in enumerate(vectors)]
    d = vs[0].size
    if any(v.size != d for v in vs):
        raise DimensionMismatchError("vectors have unequal dimensions")
    basis: list[np.ndarray] = []
    for v in vs:
        w = v.copy()
        for _ in range(2):
            for e in basis:
                w = w - np.vdot(e, w) * e
        n = np.linalg.norm(w)
        if n > tol:
            basis.append(w / n)
    if not basis:
        raise ValidationError("vectors span the zero subspace")
    b = np.column_stack(basis)
    return Projector(_frozen(hermitize(b @ dagger(b))), len(basis))


def ray(v, tol: float = TOL) -> Projector:
    """Rank-1 projector onto the line through ``v`` (normalized internally)."""
    return projector_from_vectors([v], tol)


@dataclass(frozen=True, eq=False)
class Propagator:
    """Time evolution U(t_to, t_from) with hbar = 1.

    Three modes: ``trivial`` (U = I), ``hamiltonian`` (time-independent
    H, exponentiated through its eigendecomposition) and ``explicit``
    (a table of unitaries for registered time pairs, composed along
    paths of registered and inverted pairs).
    """

    mode: str
    dim: int | None = None
    hamiltonian: np.ndarray | None = None
    explicit_unitaries: Mapping[tuple[float, float], np.ndarray] = field(default_factory=dict)
    _eigvals: np.ndarray | None = field(default=None, repr=False)
    _eigvecs: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def trivial(cls, dim: int | None = None) -> "Propagator":
        return cls("trivial", dim)

    @classmethod
    def from_hamiltonian(cls, h, tol: float = TOL) -> "Propagator":
        h = as_cmatrix(h, "hamiltonian")
        res = hermiticity_residual(h)
        if res > tol * max(1.0, fro(h)):
            raise ValidationError(f"hamiltonian not Hermitian (residual {res:.3g})", res)
        w, v = np.linalg.eigh(hermitize(h))
        return cls("hamiltonian", h.shape[0], _frozen(h), {}, w, _frozen(v))

    @classmethod
    def from_unitaries(cls, table: Mapping[tuple[float, float], object] | Iterable, tol: float = TOL) -> "Propagator":
        """``table`` maps ``(t_from, t_to)`` to U(t_to, t_from)."""
        items = table.items() if isinstance(table, Mapping) else table
        out: dict[tuple[float, float], np.ndarray] = {}
        dim = None
        for (t_from, t_to), u in items:
            u = as_cmatrix(u, f"unitary ({t_from}, {t_to})")
            if dim is None:
                dim = u.shape[0]
            elif u.shape[0] != dim:
                raise DimensionMismatchError("explicit unitaries have unequal dimensions")
            res = fro(dagger(u) @ u - np.eye(dim))
            if res > tol * max(1.0, np.sqrt(dim)):
                raise ValidationError(f"matrix for ({t_from}, {t_to}) not unitary (residual {res:.3g})", res)
            if t_from == t_to:
                res = fro(u - np.eye(dim))
                if res > tol:
                    raise ValidationError(f"U({t_from}, {t_from}) must be the identity (residual {res:.3g})", res)
            out[(float(t_from), float(t_to))] = _frozen(u)
        if not out:
            raise ValidationError("explicit propagator needs at least one unitary")
        return cls("explicit", dim, None, out)

    def __call__(self, t_from: float, t_to: float, dim: int | None = None) -> np.ndarray:
        return propagate(self, t_from, t_to, dim)

    def _explicit_path(self, t_from: float, t_to: float) -> np.ndarray:
        adj: dict[float, list[tuple[float, np.ndarray]]] = {}
        for (a, b), u in self.explicit_unitaries.items():
            adj.setdefault(a, []).append((b, u))
            adj.setdefault(b, []).append((a, dagger(u)))
        if t_from not in adj or t_to not in adj:
            raise UnregisteredTimePairError(f"no registered unitary connects t={t_from} to t={t_to}")
        prev: dict[float, tuple[float, np.ndarray] | None] = {t_from: None}
        queue = deque([t_from])
        while queue:
            t = queue.popleft()
            if t == t_to:
                break
            for nxt, u in sorted(adj[t], key=lambda e: e[0]):
                if nxt not in prev:
                    prev[nxt] = (t, u)
                    queue.append(nxt)
        if t_to not in prev:
            raise UnregisteredTimePairError(f"no registered unitary connects t={t_from} to t={t_to}")
        out = np.eye(self.dim, dtype=complex)
        t = t_to
        while prev[t] is not None:
            t_prev, u = prev[t]
            out = out @ u
            t = t_prev
        return out


def propagate(u: Propagator, t_from: float, t_to: float, dim: int | None = None) -> np.ndarray:
    """Return U(t_to, t_from) = exp(-i H (t_to - t_from))."""
    d = u.dim if u.dim is not None else dim
    if u.mode == "trivial":
        if d is None:
            raise ValidationError("trivial propagator needs a dimension")
        return np.eye(d, dtype=complex)
    if dim is not None and u.dim != dim:
        raise DimensionMismatchError(f"propagator dimension {u.dim} vs {dim}")
    if t_from == t_to:
        return np.eye(d, dtype=complex)
    if u.mode == "hamiltonian":
        phases = np.exp(-1j * u._eigvals * (t_to - t_from))
        return (u._eigvecs * phases) @ dagger(u._eigvecs)
    if u.mode == "explicit":
        return u._explicit_path(float(t_from), float(t_to))
    raise ValidationError(f"unknown propagator mode {u.mode!r}")
