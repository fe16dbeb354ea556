"""Model file format (JSON), state files, OBJ and CSV export."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import analysis, optimizer
from .model import (CABLE, STRUT, LinearMember, Model, ModelError, Node, PlainArea,
                    PowerArea, PowerLength, SpringLength, TriElement, validate,
                    ElementFunctional)

MODEL_VERSION = "tensiform/1"
STATE_VERSION = "tensiform-state/1"

CSV_HEADER = "member_id,role,L,n,q,w2,w4,lambda"


class ModelLoadError(ModelError):
    """Malformed or invalid model file; carries every problem found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid model file:\n  " + "\n  ".join(self.problems))


_VARIANT_NAMES = {
    PowerLength: "power_length",
    SpringLength: "spring_length",
    PowerArea: "power_area",
    PlainArea: "plain_area",
}


def _functional_to_dict(f: ElementFunctional) -> dict:
    if isinstance(f, PowerLength):
        params = {"w": f.w, "p": f.p}
    elif isinstance(f, SpringLength):
        params = {"k": f.k, "rest_length": f.rest_length}
    elif isinstance(f, PowerArea):
        params = {"w": f.w, "p": f.p}
    elif isinstance(f, PlainArea):
        params = {}
    else:
        raise TypeError(f"unknown functional {f!r}")
    return {"variant": _VARIANT_NAMES[type(f)], "params": params}


def _functional_from_dict(entry: dict, problems: list[str]) -> ElementFunctional | None:
    variant = entry.get("variant")
    params = entry.get("params", {})
    try:
        if variant == "power_length":
            return PowerLength(w=float(params["w"]), p=int(params.get("p", 2)))
        if variant == "spring_length":
            return SpringLength(k=float(params["k"]),
                                rest_length=float(params.get("rest_length", 0.0)))
        if variant == "power_area":
            return PowerArea(w=float(params["w"]), p=int(params.get("p", 2)))
        if variant == "plain_area":
            return PlainArea()
    except (KeyError, TypeError, ValueError) as err:
        problems.append(f"functional {entry.get('id')}: bad parameters ({err})")
        return None
    problems.append(f"functional {entry.get('id')}: unknown variant {variant!r}")
    return None


def model_to_dict(model: Model) -> dict:
    """Serialize to the versioned model-file structure with a shared functional table.

    Functionals are deduplicated by object identity, not by value: members
    sharing one functional object form an editable group, and two groups with
    equal parameters stay distinct through a round trip.
    """
    table: dict[int, int] = {}
    entries: list[ElementFunctional] = []

    def fid(f: ElementFunctional) -> int:
        key = id(f)
        if key not in table:
            table[key] = len(entries)
            entries.append(f)
        return table[key]

    members = []
    for m in model.members:
        entry = {"id": int(m.id), "endpoints": [int(v) for v in m.endpoints],
                 "role": m.role}
        if m.role == STRUT:
            entry["prescribed_length"] = float(m.prescribed_length)
        else:
            entry["functional_id"] = fid(m.functional)
        members.append(entry)
    elements = [{"id": int(e.id), "vertices": [int(v) for v in e.vertices],
                 "functional_id": fid(e.functional)} for e in model.elements]
    functionals = [dict(id=i, **_functional_to_dict(f)) for i, f in enumerate(entries)]
    return {
        "version": MODEL_VERSION,
        "nodes": [{"id": int(n.id), "xyz": [float(v) for v in n.position],
                   "fixed": bool(n.fixed)} for n in model.nodes],
        "functionals": functionals,
        "members": members,
        "elements": elements,
    }


def model_from_dict(data: dict) -> Model:
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ModelLoadError(["top level must be a JSON object"])
    version = data.get("version")
    if version != MODEL_VERSION:
        raise ModelLoadError([f"unknown version tag {version!r}, expected {MODEL_VERSION!r}"])

    functionals: dict[int, ElementFunctional] = {}
    for entry in data.get("functionals", []):
        f = _functional_from_dict(entry, problems)
        if f is not None:
            functionals[int(entry["id"])] = f

    nodes = []
    for entry in data.get("nodes", []):
        try:
            nodes.append(Node(id=int(entry["id"]),
                              position=np.array(entry["xyz"], dtype=float),
                              fixed=bool(entry.get("fixed", False))))
        except (KeyError, TypeError, ValueError) as err:
            problems.append(f"node entry {entry!r}: {err}")

    members = []
    for entry in data.get("members", []):
        try:
            role = entry.get("role", CABLE)
            endpoints = tuple(int(v) for v in entry["endpoints"])
            if role == STRUT:
                members.append(LinearMember(id=int(entry["id"]), endpoints=endpoints,
                                            role=STRUT,
                                            prescribed_length=float(entry["prescribed_length"])))
            else:
                fid = int(entry["functional_id"])
                if fid not in functionals:
                    problems.append(f"member {entry.get('id')}: functional_id {fid} "
                                    "not in the functional table")
                    continue
                members.append(LinearMember(id=int(entry["id"]), endpoints=endpoints,
                                            role=CABLE, functional=functionals[fid]))
        except (KeyError, TypeError, ValueError) as err:
            problems.append(f"member entry {entry!r}: {err}")

    elements = []
    for entry in data.get("elements", []):
        try:
            fid = int(entry["functional_id"])
            if fid not in functionals:
                problems.append(f"element {entry.get('id')}: functional_id {fid} "
                                "not in the functional table")
                continue
            elements.append(TriElement(id=int(entry["id"]),
                                       vertices=tuple(int(v) for v in entry["vertices"]),
                                       functional=functionals[fid]))
        except (KeyError, TypeError, ValueError) as err:
            problems.append(f"element entry {entry!r}: {err}")

    if problems:
        raise ModelLoadError(problems)
    model = Model(nodes=nodes, members=members, elements=elements)
    violations = validate(model)
    if violations:
        raise ModelLoadError(violations)
    return model


def load_model(source) -> Model:
    """Load and validate a model from a path, JSON string/bytes, or parsed dict."""
    if isinstance(source, dict):
        return model_from_dict(source)
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, Path) or (isinstance(source, str)
                                      and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = str(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelLoadError([f"malformed JSON: {err}"]) from err
    return model_from_dict(data)


def save_model(model: Model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


# --- solve state files ------------------------------------------------------

def state_to_dict(model: Model, state: optimizer.ConvergedState, mode: str = "formfind",
                  seed: int | None = None, trace_points: int = 200) -> dict:
    trace = state.trace
    if trace.shape[0] > trace_points:
        idx = np.unique(np.round(np.linspace(0, trace.shape[0] - 1, trace_points)).astype(int))
        trace = trace[idx]
    return {
        "version": STATE_VERSION,
        "mode": mode,
        "seed": seed,
        "model": model_to_dict(model),
        "converged": bool(state.converged),
        "energy": float(state.energy),
        "iterations": int(state.iterations),
        "residual_norm": float(state.residual_norm),
        "constraint_violation": float(state.constraint_violation),
        "coords": [float(v) for v in state.coords],
        "forces": {
            "member_forces": [float(v) for v in state.forces.member_forces],
            "element_stresses": [float(v) for v in state.forces.element_stresses],
            "strut_multipliers": [float(v) for v in state.forces.strut_multipliers],
        },
        "trace": [[float(e), float(r)] for e, r in trace],
    }


def load_state(path) -> tuple[Model, dict]:
    data = json.loads(Path(path).read_text())
    if data.get("version") != STATE_VERSION:
        raise ModelLoadError([f"unknown state version {data.get('version')!r}"])
    return model_from_dict(data["model"]), data


# --- geometry and report export ---------------------------------------------

def export_obj(model: Model, coords=None, path=None) -> str:
    """Wavefront OBJ: v per node (id order), l per member, f per triangle, 1-based."""
    positions = model.full_positions(coords) if coords is not None else model.positions
    lines = []
    for p in positions:
        lines.append(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}")
    for m in model.members:
        lines.append(f"l {m.endpoints[0] + 1} {m.endpoints[1] + 1}")
    for e in model.elements:
        a, b, c = e.vertices
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def export_report_csv(report: analysis.EquilibriumReport, path=None) -> str:
    """Member table with the documented column schema and a residual footer."""
    def cell(value) -> str:
        return "" if value is None else repr(float(value))

    lines = [CSV_HEADER]
    for row in report.members:
        lines.append(",".join([
            str(row.member_id), row.role, cell(row.length),
            cell(row.force) if row.role == CABLE else "",
            cell(row.q), cell(row.w2), cell(row.w4),
            cell(row.force) if row.role == STRUT else "",
        ]))
    lines.append(f"# residual_inf,{report.residual_inf!r}")
    lines.append(f"# residual_rel,{report.residual_rel!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
