"""Contrary retrodictions: consistent histories versus generalized contexts.

:func:`analyze_retrodiction` evaluates, for contrary properties p, q at
t1 and a property r at t2, the two retrodictions Pr(p@t1 | r@t2) and
Pr(q@t1 | r@t2), each in its own consistent family, and the
commutation checks a generalized context would need in order to hold
both at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import chain, combinations
from typing import Sequence

import numpy as np

from .consistent import HistoryFamily, family_conditional, is_consistent
from .contexts import Context, Property, State, is_contrary, validate_context
from .errors import ZeroConditioningError
from .histories import TimedContext, build_generalized_context, generalized_conditional, heisenberg_translate
from .linalg import TOL, Projector, Propagator, commutation_threshold, commutator_norm, matrix_of, ray
from .scenario_io import Scenario


class Conclusion(str, enum.Enum):
    CONTRARY_INFERENCE_IN_CH = "CONTRARY_INFERENCE_IN_CH"
    BLOCKED_BY_GC_INCOMPATIBILITY = "BLOCKED_BY_GC_INCOMPATIBILITY"
    BOTH_FRAMEWORKS_AGREE = "BOTH_FRAMEWORKS_AGREE"
    NOT_CONTRARY = "NOT_CONTRARY"


@dataclass(frozen=True)
class FamilyResult:
    """Retrodiction of one property inside its own consistent family."""

    name: str
    consistent: bool
    max_off_diagonal: float
    conditional: float | None
    status: str  # "ok", "inconsistent" or "zero-conditioning"


@dataclass(frozen=True)
class PairCheck:
    pair: str
    commutes: bool
    commutator_norm: float


@dataclass(frozen=True)
class GeneralizedFamilyResult:
    name: str
    compatible: bool
    max_commutator_norm: float
    conditional: float | None
    status: str  # "ok", "incompatible" or "zero-conditioning"


@dataclass(frozen=True)
class RetrodictionReport:
    scenario_id: str
    contrary: bool
    ch_results: tuple[FamilyResult, ...]
    gc_results: tuple[PairCheck, ...]
    gc_families: tuple[GeneralizedFamilyResult, ...]
    conclusion: Conclusion
    tolerance: float
    consistency_tolerance: float


def conclude(contrary: bool, ch_results: Sequence[FamilyResult], gc_results: Sequence[PairCheck], tol: float = TOL) -> Conclusion:
    """Conclusion as a pure function of the recorded verdicts."""
    if not contrary:
        return Conclusion.NOT_CONTRARY
    ch_inference = len(ch_results) > 0 and all(
        f.consistent and f.conditional is not None and f.conditional >= 1 - 10 * tol for f in ch_results
    )
    if not ch_inference:
        return Conclusion.BOTH_FRAMEWORKS_AGREE
    if all(g.commutes for g in gc_results):
        return Conclusion.CONTRARY_INFERENCE_IN_CH
    return Conclusion.BLOCKED_BY_GC_INCOMPATIBILITY


def binary_context(p: Projector, labels: tuple[str, str] = ("p", "not p"), tol: float = TOL) -> tuple[Context, frozenset[int]]:
    """Context {p, I - p} with zero atoms dropped, and the index set of p in it."""
    atoms, labs, idx = [], [], set()
    for n, (a, lab) in enumerate(zip((p, p.complement()), labels)):
        if a.rank > 0:
            if n == 0:
                idx.add(len(atoms))
            atoms.append(a)
            labs.append(lab)
    return validate_context(atoms, labs, tol), frozenset(idx)


def analyze_retrodiction(
    state: State,
    p: Projector,
    q: Projector,
    r: Projector,
    u: Propagator,
    t0: float,
    t1: float,
    t2: float,
    tol: float = TOL,
    consistency_tol: float | None = None,
    scenario_id: str = "",
) -> RetrodictionReport:
    ctol = tol if consistency_tol is None else consistency_tol
    if not t1 < t2:
        raise ValueError(f"need t1 < t2, got t1={t1}, t2={t2}")
    contrary = is_contrary(p, q, tol)
    if not contrary:
        return RetrodictionReport(scenario_id, False, (), (), (), Conclusion.NOT_CONTRARY, tol, ctol)

    r_ctx, r_idx = binary_context(r, ("r", "not r"), tol)
    ch, gcf = [], []
    for name, x in (("p", p), ("q", q)):
        x_ctx, x_idx = binary_context(x, (name, f"not {name}"), tol)
        tcs = [TimedContext(t1, x_ctx), TimedContext(t2, r_ctx)]

        family = HistoryFamily.build(t0, tcs, u)
        rep = is_consistent(family, state, ctol)
        cond, status = None, "inconsistent"
        if rep:
            try:
                cond = family_conditional(family, state, lambda h: h[0] in x_idx, lambda h: h[1] in r_idx, ctol)
                status = "ok"
            except ZeroConditioningError:
                status = "zero-conditioning"
        ch.append(FamilyResult(f"{name}-family", rep.consistent, rep.max_off_diagonal, cond, status))

        gc = build_generalized_context(t0, tcs, u, tol)
        if gc:
            try:
                gcond = generalized_conditional(state, gc.at(0, x_idx), gc.at(1, r_idx), tol)
                gstatus = "ok"
            except ZeroConditioningError:
                gcond, gstatus = None, "zero-conditioning"
            gcf.append(GeneralizedFamilyResult(f"{name}-family", True, 0.0, gcond, gstatus))
        else:
            gcf.append(GeneralizedFamilyResult(f"{name}-family", False, gc.max_norm, None, "incompatible"))

    p0 = heisenberg_translate(p, u, t1, t0)
    q0 = heisenberg_translate(q, u, t1, t0)
    r0 = heisenberg_translate(r, u, t2, t0)
    checks = []
    for label, a, b in (("p,r", p0, r0), ("q,r", q0, r0), ("p,q", p0, q0)):
        norm = commutator_norm(a, b)
        checks.append(PairCheck(label, norm <= commutation_threshold(a, b, tol), norm))

    conclusion = conclude(True, ch, checks, tol)
    return RetrodictionReport(scenario_id, True, tuple(ch), tuple(checks), tuple(gcf), conclusion, tol, ctol)


# --- three-box fixture ----------------------------------------------------

THREE_BOX_TIMES = (0.0, 1.0, 2.0)


def three_box_projectors() -> dict[str, Projector]:
    """p = box 1, q = box 2, r = post-selected ray (1, 1, -1)/sqrt(3)."""
    e = np.eye(3)
    return {
        "p": ray(e[0]),
        "q": ray(e[1]),
        "r": ray(np.array([1.0, 1.0, -1.0]) / np.sqrt(3.0)),
    }


def three_box_scenario() -> Scenario:
    """d = 3, psi = (1, 1, 1)/sqrt(3) at t0, p and q at t1, r at t2, no dynamics."""
    t0, t1, t2 = THREE_BOX_TIMES
    pr = three_box_projectors()
    p, q, r = pr["p"], pr["q"], pr["r"]
    box3 = ray(np.eye(3)[2])
    psi = np.ones(3, dtype=complex) / np.sqrt(3.0)
    contexts = (
        TimedContext(t1, validate_context([p, p.complement()], ["p", "not p"])),
        TimedContext(t1, validate_context([q, q.complement()], ["q", "not q"])),
        TimedContext(t2, validate_context([r, r.complement()], ["r", "not r"])),
        TimedContext(t1, validate_context([p, q, box3], ["box 1", "box 2", "box 3"])),
    )
    p_at_t1 = [[0, 0], [0, 1]]
    r_at_t2 = [[0, 0], [1, 0]]
    queries = (
        {"type": "retrodiction", "id": "contrary-retrodiction",
         "p": {"context": 0, "atoms": [0]}, "q": {"context": 1, "atoms": [0]}, "r": {"context": 2, "atoms": [0]}},
        {"type": "ch_probability", "id": "p-family", "contexts": [0, 2], "event": p_at_t1, "given": r_at_t2},
        {"type": "ch_probability", "id": "q-family", "contexts": [1, 2], "event": p_at_t1, "given": r_at_t2},
        {"type": "ch_probability", "id": "three-box-family", "contexts": [3, 2],
         "event": [[0, 0], [0, 1]], "given": [[0, 0], [1, 0], [2, 0]]},
        {"type": "gc_probability", "id": "p-family-gc", "contexts": [0, 2], "event": p_at_t1, "given": r_at_t2},
        {"type": "born", "id": "p-at-t1", "property": {"context": 0, "atoms": [0]}},
        {"type": "born", "id": "r-at-t2", "property": {"context": 2, "atoms": [0]}},
    )
    return Scenario(
        dimension=3,
        state=State.pure(psi),
        propagator=Propagator.trivial(3),
        reference_time=t0,
        contexts=contexts,
        queries=queries,
        name="three-box",
        description="Three-box retrodiction: contrary properties p (box 1) and q (box 2) at t1, post-selection r at t2.",
        state_vector=psi,
    )


def three_box_report(tol: float = TOL, consistency_tol: float | None = None) -> RetrodictionReport:
    t0, t1, t2 = THREE_BOX_TIMES
    pr = three_box_projectors()
    psi = np.ones(3, dtype=complex) / np.sqrt(3.0)
    return analyze_retrodiction(
        State.pure(psi), pr["p"], pr["q"], pr["r"], Propagator.trivial(3),
        t0, t1, t2, tol, consistency_tol, scenario_id="three-box",
    )


# --- contrary scan ----------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    pairs: tuple[tuple[Property, Property], ...]
    examined: int
    budget_exceeded: bool


def _nonempty_properties(ctx: Context) -> list[Property]:
    ks = range(ctx.size)
    subsets = chain.from_iterable(combinations(ks, n) for n in range(1, ctx.size + 1))
    return [ctx.property(s) for s in subsets]


def scan_contrary_pairs(contexts: Sequence[Context], tol: float = TOL, budget: int = 10_000) -> ScanResult:
    """All contrary pairs among nonempty properties of the given contexts.

    Pairs are unordered and listed in enumeration order (context, then
    subset size, then lexicographic). At most ``budget`` candidate pairs
    are examined; if more exist the result is flagged, not an error.
    """
    props = [p for ctx in contexts for p in _nonempty_properties(ctx)]
    mats = [p.projector for p in props]
    found = []
    examined = 0
    exceeded = False
    for a, b in combinations(range(len(props)), 2):
        if examined >= budget:
            exceeded = True
            break
        examined += 1
        if is_contrary(mats[a], mats[b], tol):
            found.append((props[a], props[b]))
    return ScanResult(tuple(found), examined, exceeded)


def conjugate_projector(p: Projector, w: np.ndarray) -> Projector:
    return Projector.trusted(w @ matrix_of(p) @ w.conj().T)
