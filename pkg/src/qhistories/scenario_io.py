"""Scenario documents and deterministic JSON output.

A scenario bundles a dimension, an initial state at the reference
time, the dynamics, a list of timed contexts and a list of queries.
The structure is checked against ``data/scenario.schema.json``; every
matrix is then validated numerically. Errors carry a JSON pointer.

Output JSON is deterministic: sorted keys, complex numbers as
``[re, im]`` and floats printed with 17 significant digits, so that
``serialize(parse(serialize(x))) == serialize(x)`` byte for byte.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .contexts import State, validate_context
from .errors import ScenarioError, ValidationError
from .histories import TimedContext
from .linalg import TOL, Projector, Propagator, projector_from_vectors

SCHEMA_VERSION = "1"


@dataclass(frozen=True, eq=False)
class Scenario:
    dimension: int
    state: State
    propagator: Propagator
    reference_time: float
    contexts: tuple[TimedContext, ...]
    queries: tuple[dict, ...] = ()
    name: str = ""
    description: str = ""
    state_vector: np.ndarray | None = None
    schema_version: str = SCHEMA_VERSION

    def to_document(self) -> dict:
        return scenario_document(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return serialize_json(self.to_document()) == serialize_json(other.to_document())

    __hash__ = None


# --- deterministic JSON -------------------------------------------------


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    s = "%.17g" % x
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _emit(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for n, k in enumerate(keys):
            out.append(pad + json.dumps(str(k), ensure_ascii=False) + ": ")
            _emit(obj[k], indent, level + 1, out)
            out.append(",\n" if n < len(keys) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        # short scalar lists (complex pairs, index tuples) stay on one line
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj) and len(obj) <= 4:
            parts: list[str] = []
            for x in obj:
                _emit(x, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for n, x in enumerate(obj):
            out.append(pad)
            _emit(x, indent, level + 1, out)
            out.append(",\n" if n < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_jsonable(x: Any) -> Any:
    """Plain JSON tree from dataclasses, enums, numpy values, complex numbers and sets."""
    if isinstance(x, enum.Enum):
        return to_jsonable(x.value)
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if hasattr(x, "to_document"):
        return to_jsonable(x.to_document())
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: to_jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (frozenset, set)):
        return [to_jsonable(v) for v in sorted(x)]
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    raise TypeError(f"cannot convert {type(x).__name__} to JSON")


def serialize_json(obj: Any) -> str:
    out: list[str] = []
    _emit(to_jsonable(obj), 2, 0, out)
    return "".join(out) + "\n"


def serialize_report(report: Any) -> str:
    """Deterministic JSON text for a report, result list or scenario."""
    return serialize_json(report)


# --- scenario -> document -------------------------------------------------


def _cvec(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _cmat(m: np.ndarray) -> list:
    return [_cvec(row) for row in np.asarray(m, dtype=complex)]


def scenario_document(s: Scenario) -> dict:
    doc: dict[str, Any] = {
        "schema_version": s.schema_version,
        "dimension": s.dimension,
        "reference_time": float(s.reference_time),
    }
    if s.name:
        doc["name"] = s.name
    if s.description:
        doc["description"] = s.description
    if s.state_vector is not None:
        doc["state"] = {"vector": _cvec(s.state_vector)}
    else:
        doc["state"] = {"matrix": _cmat(s.state.rho)}
    u = s.propagator
    if u.mode == "trivial":
        doc["dynamics"] = {"type": "trivial"}
    elif u.mode == "hamiltonian":
        doc["dynamics"] = {"type": "hamiltonian", "matrix": _cmat(u.hamiltonian)}
    else:
        doc["dynamics"] = {
            "type": "explicit",
            "unitaries": [
                {"t_from": float(a), "t_to": float(b), "matrix": _cmat(m)}
                for (a, b), m in u.explicit_unitaries.items()
            ],
        }
    doc["contexts"] = [
        {
            "time": float(tc.time),
            "atoms": [
                {"label": lab, "matrix": _cmat(a.matrix)}
                for lab, a in zip(tc.context.labels, tc.context.atoms)
            ],
        }
        for tc in s.contexts
    ]
    doc["queries"] = [json.loads(json.dumps(q)) for q in s.queries]
    return doc


def serialize_scenario(s: Scenario) -> str:
    return serialize_json(scenario_document(s))


# --- document -> scenario -------------------------------------------------


@lru_cache(maxsize=1)
def scenario_schema() -> dict:
    text = resources.files("qhistories").joinpath("data/scenario.schema.json").read_text("utf-8")
    return json.loads(text)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _complex(x) -> complex:
    if isinstance(x, list):
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def _vector(x, d: int, path: str) -> np.ndarray:
    v = np.array([_complex(z) for z in x], dtype=complex)
    if v.size != d:
        raise ScenarioError(f"expected {d} entries, got {v.size}", path)
    if not np.all(np.isfinite(v)):
        raise ScenarioError("non-finite entry", path)
    return v


def _matrix(x, d: int, path: str) -> np.ndarray:
    if len(x) != d:
        raise ScenarioError(f"expected {d} rows, got {len(x)}", path)
    return np.array([_vector(row, d, f"{path}/{n}") for n, row in enumerate(x)], dtype=complex)


def _structural_check(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(scenario_schema())
    errors = list(validator.iter_errors(doc))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        # descend into oneOf branches for a more specific location
        while err.context:
            err = jsonschema.exceptions.best_match(err.context)
        raise ScenarioError(err.message, _pointer(err.absolute_path))


def _check_ref(ref: dict, contexts: tuple[TimedContext, ...], d: int, path: str, tol: float) -> None:
    if "context" in ref:
        c = ref["context"]
        if c >= len(contexts):
            raise ScenarioError(f"context index {c} out of range (have {len(contexts)})", f"{path}/context")
        n = contexts[c].context.size
        for j, k in enumerate(ref["atoms"]):
            if k >= n:
                raise ScenarioError(f"atom index {k} out of range (context {c} has {n})", f"{path}/atoms/{j}")
    elif "vectors" in ref:
        vs = [_vector(v, d, f"{path}/vectors/{j}") for j, v in enumerate(ref["vectors"])]
        try:
            projector_from_vectors(vs, tol)
        except ValidationError as exc:
            raise ScenarioError(str(exc), f"{path}/vectors", exc.residual) from exc
    else:
        m = _matrix(ref["matrix"], d, f"{path}/matrix")
        try:
            Projector.from_matrix(m, tol)
        except ValidationError as exc:
            raise ScenarioError(str(exc), f"{path}/matrix", exc.residual) from exc


def _check_event(event: list, shape: tuple[int, ...], path: str) -> None:
    for j, h in enumerate(event):
        if len(h) != len(shape):
            raise ScenarioError(f"history has {len(h)} entries, family has {len(shape)} times", f"{path}/{j}")
        for i, (k, n) in enumerate(zip(h, shape)):
            if k >= n:
                raise ScenarioError(f"atom index {k} out of range (context has {n})", f"{path}/{j}/{i}")


def _check_query(q: dict, contexts: tuple[TimedContext, ...], d: int, path: str, tol: float) -> None:
    kind = q["type"]
    if kind == "born":
        _check_ref(q["property"], contexts, d, f"{path}/property", tol)
    elif kind == "conditional":
        _check_ref(q["property"], contexts, d, f"{path}/property", tol)
        _check_ref(q["given"], contexts, d, f"{path}/given", tol)
    elif kind in ("gc_probability", "ch_probability"):
        for j, c in enumerate(q["contexts"]):
            if c >= len(contexts):
                raise ScenarioError(f"context index {c} out of range (have {len(contexts)})", f"{path}/contexts/{j}")
        times = [contexts[c].time for c in q["contexts"]]
        if any(not a < b for a, b in zip(times, times[1:])):
            raise ScenarioError("selected contexts must have strictly increasing times", f"{path}/contexts")
        shape = tuple(contexts[c].context.size for c in q["contexts"])
        _check_event(q["event"], shape, f"{path}/event")
        if "given" in q:
            _check_event(q["given"], shape, f"{path}/given")
    elif kind == "retrodiction":
        for key in "pqr":
            _check_ref(q[key], contexts, d, f"{path}/{key}", tol)


def parse_document(doc: Any, tol: float = TOL) -> Scenario:
    """Validate a decoded JSON document and build the Scenario."""
    _structural_check(doc)
    d = doc["dimension"]

    st = doc["state"]
    vec = None
    try:
        if "vector" in st:
            vec = _vector(st["vector"], d, "/state/vector")
            state = State.pure(vec, tol)
        else:
            state = State.from_density(_matrix(st["matrix"], d, "/state/matrix"), tol)
    except ScenarioError:
        raise
    except ValidationError as exc:
        raise ScenarioError(str(exc), "/state", exc.residual) from exc

    dyn = doc["dynamics"]
    try:
        if dyn["type"] == "trivial":
            u = Propagator.trivial(d)
        elif dyn["type"] == "hamiltonian":
            u = Propagator.from_hamiltonian(_matrix(dyn["matrix"], d, "/dynamics/matrix"), tol)
        else:
            table = [
                ((e["t_from"], e["t_to"]), _matrix(e["matrix"], d, f"/dynamics/unitaries/{n}/matrix"))
                for n, e in enumerate(dyn["unitaries"])
            ]
            u = Propagator.from_unitaries(table, tol)
    except ScenarioError:
        raise
    except ValidationError as exc:
        raise ScenarioError(str(exc), "/dynamics", exc.residual) from exc

    contexts = []
    for i, c in enumerate(doc["contexts"]):
        base = f"/contexts/{i}/atoms"
        atoms, labels = [], []
        for k, a in enumerate(c["atoms"]):
            try:
                if "vectors" in a:
                    vs = [_vector(v, d, f"{base}/{k}/vectors/{j}") for j, v in enumerate(a["vectors"])]
                    atoms.append(projector_from_vectors(vs, tol))
                else:
                    atoms.append(Projector.from_matrix(_matrix(a["matrix"], d, f"{base}/{k}/matrix"), tol))
            except ScenarioError:
                raise
            except ValidationError as exc:
                raise ScenarioError(str(exc), f"{base}/{k}", exc.residual) from exc
            labels.append(a.get("label", str(k)))
        try:
            ctx = validate_context(atoms, labels, tol)
        except ValidationError as exc:
            idx = getattr(exc, "indices", ())
            path = f"{base}/{idx[0]}" if len(idx) == 1 else base
            raise ScenarioError(str(exc), path, exc.residual) from exc
        contexts.append(TimedContext(float(c["time"]), ctx))
    contexts = tuple(contexts)

    queries = tuple(doc.get("queries", []))
    for n, q in enumerate(queries):
        _check_query(q, contexts, d, f"/queries/{n}", tol)

    return Scenario(
        dimension=d,
        state=state,
        propagator=u,
        reference_time=float(doc["reference_time"]),
        contexts=contexts,
        queries=tuple(json.loads(json.dumps(q)) for q in queries),
        name=doc.get("name", ""),
        description=doc.get("description", ""),
        state_vector=vec,
    )


def parse_scenario(text: str | bytes, tol: float = TOL) -> Scenario:
    """Parse a UTF-8 JSON scenario document.

    Raises ScenarioError with a JSON-pointer path for syntax errors,
    schema violations and numerical validator failures.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "/") from exc
    return parse_document(doc, tol)


def load_scenario(path, tol: float = TOL) -> Scenario:
    with open(path, "rb") as fh:
        return parse_scenario(fh.read(), tol)


def load_fixture(name: str, tol: float = TOL) -> Scenario:
    """A scenario shipped in the package data directory, e.g. ``'three_box'``."""
    text = resources.files("qhistories").joinpath(f"data/{name}.json").read_text("utf-8")
    return parse_scenario(text, tol)


__all__ = [
    "Scenario",
    "load_fixture",
    "load_scenario",
    "parse_document",
    "parse_scenario",
    "scenario_document",
    "serialize_json",
    "serialize_report",
    "serialize_scenario",
    "to_jsonable",
]
