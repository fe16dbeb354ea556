"""Post-solve diagnostics: equilibrium residuals, force densities, comparisons."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import functionals, optimizer
from .functionals import GeneralizedForces
from .geometry import member_lengths, triangle_areas
from .model import (CABLE, Model, PlainArea, PowerArea, ElementFunctional,
                    LENGTH_FUNCTIONALS)


@dataclass
class MemberRow:
    member_id: int
    role: str
    length: float
    force: float          # cable tension n, or strut multiplier lambda
    q: float              # force / length
    w2: float | None      # n / (2 L), cables only
    w4: float | None      # n / (4 L^3), cables only


@dataclass
class EquilibriumReport:
    node_residuals: np.ndarray  # (n_free, 3)
    residual_inf: float
    residual_rel: float  # infinity norm scaled by the mean member force
    members: list[MemberRow]
    force_scale: float


def equilibrium_residual(model: Model, coords: np.ndarray,
                         forces: GeneralizedForces) -> EquilibriumReport:
    """Assemble sum(n grad L) + sum(sigma grad S) + sum(lambda grad L) over free dofs."""
    grad, _ = functionals.total_gradient(model, coords)
    _, A = functionals.strut_gradient_matrix(model, coords)
    lambdas = forces.strut_multipliers
    residual = grad + A.T @ lambdas if lambdas.size else grad

    node_residuals = residual.reshape(-1, 3)
    inf = float(np.max(np.abs(residual), initial=0.0))
    mags = np.concatenate([np.abs(forces.member_forces), np.abs(lambdas)])
    scale = float(np.mean(mags)) if mags.size else 1.0
    rel = inf / scale if scale > 0 else inf

    positions = model.full_positions(coords)
    lengths = member_lengths(positions, model.edge_array)
    rows: list[MemberRow] = []
    cable_no = 0
    strut_no = 0
    for idx, member in enumerate(model.members):
        L = float(lengths[idx])
        if member.role == CABLE:
            n = float(forces.member_forces[cable_no])
            cable_no += 1
            rows.append(MemberRow(member.id, member.role, L, n, n / L,
                                  n / (2.0 * L), n / (4.0 * L ** 3)))
        else:
            lam = float(lambdas[strut_no]) if lambdas.size else float("nan")
            strut_no += 1
            rows.append(MemberRow(member.id, member.role, L, lam, lam / L, None, None))

    return EquilibriumReport(node_residuals=node_residuals, residual_inf=inf,
                             residual_rel=rel, members=rows,
                             force_scale=max(1.0, scale))


@dataclass
class ExtendedDensities:
    cable_ids: np.ndarray
    q: np.ndarray   # n / L
    w2: np.ndarray  # n / (2 L)
    w4: np.ndarray  # n / (4 L^3)


def extended_force_densities(model: Model, state: optimizer.ConvergedState) -> ExtendedDensities:
    """All three density flavors for every cable at the converged coordinates."""
    edges = model.cable_edge_array
    positions = model.full_positions(state.coords)
    lengths = member_lengths(positions, edges)
    if np.any(lengths <= 1e-12):
        from .geometry import DegenerateGeometry
        bad = int(np.argmin(lengths))
        raise DegenerateGeometry(f"member {model.cables[bad].id}: zero length, "
                                 "force densities undefined")
    n = state.forces.member_forces
    return ExtendedDensities(
        cable_ids=np.array([m.id for m in model.cables], dtype=np.int64),
        q=n / lengths,
        w2=n / (2.0 * lengths),
        w4=n / (4.0 * lengths ** 3),
    )


def virtual_work_check(model: Model, coords: np.ndarray, forces: GeneralizedForces,
                       seed: int = 0, samples: int = 10) -> float:
    """Worst relative virtual work over random constraint-tangent variations.

    At equilibrium the element-wise sum n*dL + sigma*dS + lambda*dL vanishes
    for every tangent dx; the return value is max |dw| / (|forces| * |dx|).
    """
    dof = model.dof_map
    rng = np.random.default_rng(seed)
    _, A = functionals.strut_gradient_matrix(model, coords)
    positions = model.full_positions(coords)

    cedges = model.cable_edge_array
    clengths = member_lengths(positions, cedges)
    cunits = (functionals.member_vectors(positions, cedges)
              / clengths[:, None]) if cedges.size else np.zeros((0, 3))
    areas, blocks = (np.zeros(0), np.zeros((0, 3, 3)))
    if model.tri_array.size:
        from .geometry import triangle_area_gradient_blocks
        areas, blocks = triangle_area_gradient_blocks(positions, model.tri_array)

    force_norm = float(np.linalg.norm(np.concatenate([
        forces.member_forces, forces.element_stresses, forces.strut_multipliers])))
    offsets = dof.node_offset

    def member_variation(edges, units, dx):
        if edges.size == 0:
            return np.zeros(0)
        out = np.zeros(edges.shape[0])
        for k in range(edges.shape[0]):
            i, j = edges[k]
            di = dx[offsets[i]:offsets[i] + 3] if offsets[i] >= 0 else np.zeros(3)
            dj = dx[offsets[j]:offsets[j] + 3] if offsets[j] >= 0 else np.zeros(3)
            out[k] = float(units[k] @ (dj - di))
        return out

    worst = 0.0
    for _ in range(samples):
        dx = rng.standard_normal(dof.n)
        if A.shape[0]:
            lam, _, _ = optimizer._fit_multipliers(A, dx)
            dx = dx + A.T @ lam  # remove the constraint-normal component
        norm_dx = float(np.linalg.norm(dx))
        if norm_dx == 0.0:
            continue

        dL = member_variation(cedges, cunits, dx)
        dw = float(forces.member_forces @ dL) if dL.size else 0.0
        if model.tri_array.size:
            dS = np.zeros(len(model.elements))
            for k in range(model.tri_array.shape[0]):
                for v in range(3):
                    node = model.tri_array[k, v]
                    if offsets[node] >= 0:
                        dS[k] += float(blocks[k, v] @ dx[offsets[node]:offsets[node] + 3])
            dw += float(forces.element_stresses @ dS)
        sedges = model.strut_edge_array
        if sedges.size:
            slengths = member_lengths(positions, sedges)
            sunits = functionals.member_vectors(positions, sedges) / slengths[:, None]
            dw += float(forces.strut_multipliers @ member_variation(sedges, sunits, dx))

        denom = max(force_norm, 1e-300) * norm_dx
        worst = max(worst, abs(dw) / denom)
    return worst


@dataclass
class ComparisonRow:
    label: str
    converged: bool
    energy: float
    iterations: int
    total_length: float
    total_area: float
    area_mean: float
    area_variance: float
    area_cv: float
    area_histogram: tuple[np.ndarray, np.ndarray]  # (counts, bin edges)
    error: str | None = None
    state: optimizer.ConvergedState | None = None


def _with_functional(model: Model, f: ElementFunctional) -> Model:
    """Copy the model with every cable (length f) or every triangle (area f) reassigned."""
    if isinstance(f, LENGTH_FUNCTIONALS):
        members = [dataclasses.replace(m, functional=f) if m.role == CABLE else m
                   for m in model.members]
        return Model(nodes=model.nodes, members=members, elements=model.elements)
    elements = [dataclasses.replace(e, functional=f) for e in model.elements]
    return Model(nodes=model.nodes, members=model.members, elements=elements)


def functional_label(f: ElementFunctional) -> str:
    if isinstance(f, PlainArea):
        return "sum S"
    if isinstance(f, PowerArea):
        return f"sum {f.w:g} S^{f.p}"
    name = type(f).__name__
    if hasattr(f, "p"):
        return f"sum {f.w:g} L^{f.p}"
    return name


def compare_functionals(model: Model, functionals_list, options=None) -> list[ComparisonRow]:
    """One constrained solve per functional under a shared seed.

    Each entry is either an ElementFunctional or a (label, functional) pair.
    Per-row failures are recorded in the row; the run continues.
    """
    options = options or optimizer.SolveOptions()
    rows: list[ComparisonRow] = []
    for entry in functionals_list:
        label, f = entry if isinstance(entry, tuple) else (functional_label(entry), entry)
        variant = _with_functional(model, f)
        try:
            state = optimizer.minimize_constrained(variant, options)
        except Exception as err:  # record and continue with the other rows
            rows.append(ComparisonRow(label, False, float("nan"), 0, float("nan"),
                                      float("nan"), float("nan"), float("nan"),
                                      float("nan"), (np.zeros(0), np.zeros(0)),
                                      error=str(err)))
            continue
        positions = variant.full_positions(state.coords)
        lengths = member_lengths(positions, variant.cable_edge_array)
        areas = triangle_areas(positions, variant.tri_array)
        mean = float(np.mean(areas)) if areas.size else 0.0
        var = float(np.var(areas)) if areas.size else 0.0
        counts, edges = np.histogram(areas, bins=10) if areas.size else (np.zeros(0), np.zeros(0))
        rows.append(ComparisonRow(
            label=label,
            converged=state.converged,
            energy=state.energy,
            iterations=state.iterations,
            total_length=float(np.sum(lengths)),
            total_area=float(np.sum(areas)),
            area_mean=mean,
            area_variance=var,
            area_cv=float(np.sqrt(var) / mean) if mean > 0 else 0.0,
            area_histogram=(counts, edges),
            state=state,
        ))
    return rows
