"""Evaluate scenario queries into JSON-ready result dictionaries."""

from __future__ import annotations

from typing import Sequence

from .consistent import HistoryFamily, decoherence_functional, event_probability, family_conditional, is_consistent
from .contexts import Context, born_probability, clamp_probability, conditional_probability
from .errors import InconsistentFamilyError, NonCommutingError, ValidationError, ZeroConditioningError
from .histories import build_generalized_context, generalized_conditional, generalized_probability, heisenberg_translate
from .inference import analyze_retrodiction, scan_contrary_pairs
from .linalg import TOL, Projector, projector_from_vectors
from .scenario_io import Scenario, _matrix, _vector


def resolve_property(s: Scenario, ref: dict, tol: float = TOL) -> tuple[float, Projector]:
    """(time, Schroedinger projector) for a property reference."""
    if "context" in ref:
        tc = s.contexts[ref["context"]]
        return tc.time, tc.context.property(ref["atoms"]).projector
    d = s.dimension
    if "vectors" in ref:
        vs = [_vector(v, d, "") for v in ref["vectors"]]
        return float(ref["time"]), projector_from_vectors(vs, tol)
    return float(ref["time"]), Projector.from_matrix(_matrix(ref["matrix"], d, ""), tol)


def _heisenberg(s: Scenario, ref: dict, tol: float) -> Projector:
    t, p = resolve_property(s, ref, tol)
    return heisenberg_translate(p, s.propagator, t, s.reference_time)


def _pair_list(pairs) -> list[dict]:
    return [
        {"i": x.i, "k_i": x.k_i, "j": x.j, "k_j": x.k_j, "norm": x.norm, "marginal": x.marginal}
        for x in pairs
    ]


def select_contexts(s: Scenario, indices: Sequence[int] | None):
    if indices is None:
        indices = range(len(s.contexts))
    tcs = [s.contexts[i] for i in indices]
    return list(indices), tcs


def generalized_context_summary(s: Scenario, indices: Sequence[int] | None = None, tol: float = TOL) -> dict:
    idx, tcs = select_contexts(s, indices)
    gc = build_generalized_context(s.reference_time, tcs, s.propagator, tol)
    out: dict = {"contexts": idx, "compatible": bool(gc)}
    if not gc:
        out["max_commutator_norm"] = gc.max_norm
        out["marginal"] = gc.marginal
        out["non_commuting_pairs"] = _pair_list(gc.pairs)
        return out
    out["atoms"] = [
        {
            "index": list(k),
            "labels": [tc.context.labels[ki] for tc, ki in zip(tcs, k)],
            "rank": a.rank,
            "zero": k in gc.zero_atoms,
            "probability": clamp_probability(generalized_probability(s.state, gc.atom(k))),
        }
        for k, a in gc.atoms.items()
    ]
    return out


def consistency_summary(s: Scenario, indices: Sequence[int] | None = None, tol: float = TOL) -> dict:
    idx, tcs = select_contexts(s, indices)
    family = HistoryFamily.build(s.reference_time, tcs, s.propagator)
    rep = is_consistent(family, s.state, tol)
    dm = decoherence_functional(family, s.state)
    out = {
        "contexts": idx,
        "consistent": rep.consistent,
        "max_off_diagonal": rep.max_off_diagonal,
        "worst_pair": [list(h) for h in rep.worst_pair] if rep.worst_pair else None,
        "tolerance": tol,
    }
    if rep:
        out["histories"] = [
            {"index": list(h), "labels": [tc.context.labels[k] for tc, k in zip(tcs, h)],
             "probability": clamp_probability(dm[h, h].real)}
            for h in dm.histories
        ]
    return out


def evaluate_query(s: Scenario, q: dict, tol: float = TOL, consistency_tol: float | None = None) -> dict:
    ctol = tol if consistency_tol is None else consistency_tol
    kind = q["type"]
    out: dict = {"type": kind}
    if "id" in q:
        out["id"] = q["id"]

    if kind == "born":
        out["probability"] = clamp_probability(born_probability(s.state, _heisenberg(s, q["property"], tol)))

    elif kind == "conditional":
        p0 = _heisenberg(s, q["property"], tol)
        r0 = _heisenberg(s, q["given"], tol)
        try:
            out["probability"] = clamp_probability(conditional_probability(s.state, p0, r0, tol))
            out["verdict"] = "defined"
        except NonCommutingError as exc:
            out.update(probability=None, verdict="non-commuting", commutator_norm=exc.norm)
        except ZeroConditioningError as exc:
            out.update(probability=None, verdict="zero-conditioning", weight=exc.weight)

    elif kind == "gc_probability":
        _, tcs = select_contexts(s, q["contexts"])
        gc = build_generalized_context(s.reference_time, tcs, s.propagator, tol)
        out["contexts"] = list(q["contexts"])
        out["compatible"] = bool(gc)
        if not gc:
            out.update(probability=None, max_commutator_norm=gc.max_norm, non_commuting_pairs=_pair_list(gc.pairs))
        else:
            a = gc.property(map(tuple, q["event"]))
            if "given" in q:
                try:
                    out["probability"] = clamp_probability(
                        generalized_conditional(s.state, a, gc.property(map(tuple, q["given"])), tol))
                except ZeroConditioningError as exc:
                    out.update(probability=None, verdict="zero-conditioning", weight=exc.weight)
            else:
                out["probability"] = clamp_probability(generalized_probability(s.state, a))

    elif kind == "ch_probability":
        _, tcs = select_contexts(s, q["contexts"])
        family = HistoryFamily.build(s.reference_time, tcs, s.propagator)
        rep = is_consistent(family, s.state, ctol)
        out.update(
            contexts=list(q["contexts"]),
            consistent=rep.consistent,
            max_off_diagonal=rep.max_off_diagonal,
            worst_pair=[list(h) for h in rep.worst_pair] if rep.worst_pair else None,
        )
        event = [tuple(h) for h in q["event"]]
        try:
            if "given" in q:
                p = family_conditional(family, s.state, event, [tuple(h) for h in q["given"]], ctol)
            else:
                p = event_probability(family, s.state, event, ctol)
            out["probability"] = clamp_probability(p)
        except InconsistentFamilyError:
            out.update(probability=None, verdict="inconsistent")
        except ZeroConditioningError as exc:
            out.update(probability=None, verdict="zero-conditioning", weight=exc.weight)

    elif kind == "retrodiction":
        (t1, p), (tq, qq), (t2, r) = (resolve_property(s, q[k], tol) for k in "pqr")
        if t1 != tq:
            raise ValidationError(f"p and q must share one time (got {t1} and {tq})")
        if not t1 < t2:
            raise ValidationError(f"r must come after p and q (t1={t1}, t2={t2})")
        rep = analyze_retrodiction(
            s.state, p, qq, r, s.propagator, s.reference_time, t1, t2, tol, ctol,
            scenario_id=s.name,
        )
        out["report"] = rep
    else:
        raise ValidationError(f"unknown query type {kind!r}")
    return out


def born_table(s: Scenario) -> list[dict]:
    """Born probability of every atom of every context."""
    out = []
    for i, tc in enumerate(s.contexts):
        for k, lab in enumerate(tc.context.labels):
            p0 = heisenberg_translate(tc.context.atoms[k], s.propagator, tc.time, s.reference_time)
            out.append({"context": i, "atom": k, "label": lab, "time": tc.time,
                        "probability": clamp_probability(born_probability(s.state, p0))})
    return out


def scan_summary(contexts: Sequence[Context], tol: float = TOL, budget: int = 10_000) -> dict:
    res = scan_contrary_pairs(contexts, tol, budget)
    ids = {id(c): n for n, c in enumerate(contexts)}

    def describe(p):
        return {"context": ids[id(p.context)], "atoms": sorted(p.index_set),
                "labels": [p.context.labels[k] for k in sorted(p.index_set)]}

    return {
        "pairs": [{"p": describe(a), "q": describe(b)} for a, b in res.pairs],
        "examined": res.examined,
        "budget": budget,
        "budget_exceeded": res.budget_exceeded,
    }


__all__ = [
    "born_table",
    "consistency_summary",
    "evaluate_query",
    "generalized_context_summary",
    "resolve_property",
    "scan_summary",
]
