"""Element functional catalog and assembly of the total energy and gradient.

Every cable contributes an energy pi(L) and every triangle an energy pi(S);
the total gradient over the free coordinates is the sum of the generalized
forces n = d(pi)/dL and sigma = d(pi)/dS times the corresponding measure
gradients. Strut constraint terms are deliberately excluded here: the
optimizer owns them and recovers their multipliers separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from weakref import WeakKeyDictionary

import numpy as np

from .geometry import (DegenerateGeometry, EPS_AREA, EPS_LENGTH, member_lengths,
                       member_vectors, triangle_area_gradient_blocks, triangle_areas)
from .model import (Model, PlainArea, PowerArea, PowerLength, SpringLength,
                    ElementFunctional)


@dataclass
class GeneralizedForces:
    """Self-stress candidate set: cable forces, element stresses, strut multipliers."""

    member_forces: np.ndarray      # per cable, n_j
    element_stresses: np.ndarray   # per triangle, sigma_k
    strut_multipliers: np.ndarray  # per strut, lambda_k (zero until recovered)


def element_energy(functional: ElementFunctional, measure: float) -> float:
    """Energy pi(measure) of a single catalog entry."""
    if isinstance(functional, PowerLength):
        return functional.w * measure ** functional.p
    if isinstance(functional, SpringLength):
        return 0.5 * functional.k * (measure - functional.rest_length) ** 2
    if isinstance(functional, PowerArea):
        return functional.w * measure ** functional.p
    if isinstance(functional, PlainArea):
        return float(measure)
    raise TypeError(f"unknown functional {functional!r}")


def element_force(functional: ElementFunctional, measure: float) -> float:
    """Generalized force d(pi)/d(measure) of a single catalog entry."""
    if isinstance(functional, PowerLength):
        return functional.p * functional.w * measure ** (functional.p - 1)
    if isinstance(functional, SpringLength):
        return functional.k * (measure - functional.rest_length)
    if isinstance(functional, PowerArea):
        return functional.p * functional.w * measure ** (functional.p - 1)
    if isinstance(functional, PlainArea):
        return 1.0
    raise TypeError(f"unknown functional {functional!r}")


@dataclass
class _Tables:
    """Per-model parameter arrays so assembly runs vectorized."""

    cable_edges: np.ndarray
    cable_ids: np.ndarray
    pl_rows: np.ndarray   # indices into cables with PowerLength
    pl_w: np.ndarray
    pl_p: np.ndarray
    sl_rows: np.ndarray   # indices into cables with SpringLength
    sl_k: np.ndarray
    sl_rest: np.ndarray
    tris: np.ndarray
    element_ids: np.ndarray
    pa_rows: np.ndarray   # indices into elements with PowerArea
    pa_w: np.ndarray
    pa_p: np.ndarray
    plain_rows: np.ndarray
    pl_p_values: tuple    # distinct powers, precomputed for the difference path
    pa_p_values: tuple
    strut_edges: np.ndarray
    strut_rows_i: np.ndarray  # struts whose first endpoint is free
    strut_cols_i: np.ndarray  # dof offset of that endpoint
    strut_rows_j: np.ndarray
    strut_cols_j: np.ndarray
    struts_disjoint: bool     # no node shared by two struts


_table_cache: "WeakKeyDictionary[Model, _Tables]" = WeakKeyDictionary()


def _tables(model: Model) -> _Tables:
    cached = _table_cache.get(model)
    if cached is not None:
        return cached

    cables = model.cables
    pl_rows, pl_w, pl_p = [], [], []
    sl_rows, sl_k, sl_rest = [], [], []
    for row, member in enumerate(cables):
        f = member.functional
        if isinstance(f, PowerLength):
            pl_rows.append(row)
            pl_w.append(f.w)
            pl_p.append(f.p)
        elif isinstance(f, SpringLength):
            sl_rows.append(row)
            sl_k.append(f.k)
            sl_rest.append(f.rest_length)
        else:
            raise TypeError(f"member {member.id}: unsupported cable functional {f!r}")

    pa_rows, pa_w, pa_p, plain_rows = [], [], [], []
    for row, element in enumerate(model.elements):
        f = element.functional
        if isinstance(f, PowerArea):
            pa_rows.append(row)
            pa_w.append(f.w)
            pa_p.append(f.p)
        elif isinstance(f, PlainArea):
            plain_rows.append(row)
        else:
            raise TypeError(f"element {element.id}: unsupported element functional {f!r}")

    strut_edges = model.strut_edge_array
    offsets = model.dof_map.node_offset
    oi = offsets[strut_edges[:, 0]] if strut_edges.size else np.zeros(0, dtype=np.int64)
    oj = offsets[strut_edges[:, 1]] if strut_edges.size else np.zeros(0, dtype=np.int64)
    free_i = np.flatnonzero(oi >= 0)
    free_j = np.flatnonzero(oj >= 0)

    tables = _Tables(
        cable_edges=model.cable_edge_array,
        cable_ids=np.array([m.id for m in cables], dtype=np.int64),
        pl_rows=np.array(pl_rows, dtype=np.int64),
        pl_w=np.array(pl_w, dtype=float),
        pl_p=np.array(pl_p, dtype=float),
        sl_rows=np.array(sl_rows, dtype=np.int64),
        sl_k=np.array(sl_k, dtype=float),
        sl_rest=np.array(sl_rest, dtype=float),
        tris=model.tri_array,
        element_ids=np.array([e.id for e in model.elements], dtype=np.int64),
        pa_rows=np.array(pa_rows, dtype=np.int64),
        pa_w=np.array(pa_w, dtype=float),
        pa_p=np.array(pa_p, dtype=float),
        plain_rows=np.array(plain_rows, dtype=np.int64),
        pl_p_values=tuple(sorted(set(pl_p))),
        pa_p_values=tuple(sorted(set(pa_p))),
        strut_edges=strut_edges,
        strut_rows_i=free_i,
        strut_cols_i=oi[free_i],
        strut_rows_j=free_j,
        strut_cols_j=oj[free_j],
        struts_disjoint=np.unique(strut_edges).size == strut_edges.size,
    )
    _table_cache[model] = tables
    return tables


def _cable_forces(t: _Tables, lengths: np.ndarray) -> np.ndarray:
    n = np.zeros(lengths.shape[0])
    if t.pl_rows.size:
        L = lengths[t.pl_rows]
        n[t.pl_rows] = t.pl_p * t.pl_w * L ** (t.pl_p - 1.0)
    if t.sl_rows.size:
        n[t.sl_rows] = t.sl_k * (lengths[t.sl_rows] - t.sl_rest)
    return n


def _element_stresses(t: _Tables, areas: np.ndarray) -> np.ndarray:
    sigma = np.zeros(areas.shape[0])
    if t.pa_rows.size:
        S = areas[t.pa_rows]
        sigma[t.pa_rows] = t.pa_p * t.pa_w * S ** (t.pa_p - 1.0)
    if t.plain_rows.size:
        sigma[t.plain_rows] = 1.0
    return sigma


def total_energy(model: Model, coords: np.ndarray) -> float:
    """Sum of cable and triangle element energies at the given free coordinates."""
    t = _tables(model)
    positions = model.full_positions(coords)
    energy = 0.0
    if t.cable_edges.size:
        lengths = member_lengths(positions, t.cable_edges)
        if t.pl_rows.size:
            energy += float(np.sum(t.pl_w * lengths[t.pl_rows] ** t.pl_p))
        if t.sl_rows.size:
            energy += float(np.sum(0.5 * t.sl_k * (lengths[t.sl_rows] - t.sl_rest) ** 2))
    if t.tris.size:
        areas = triangle_areas(positions, t.tris)
        if t.pa_rows.size:
            energy += float(np.sum(t.pa_w * areas[t.pa_rows] ** t.pa_p))
        if t.plain_rows.size:
            energy += float(np.sum(areas[t.plain_rows]))
    return energy


def _power_sum(new: np.ndarray, old: np.ndarray, powers: np.ndarray,
               p_values) -> np.ndarray:
    """sum_{i=0}^{p-1} new**i * old**(p-1-i), so new**p - old**p = (new-old) * this."""
    out = np.zeros_like(new)
    for p in p_values:
        p = int(p)
        rows = powers == p
        a, b = old[rows], new[rows]
        acc = a ** (p - 1)
        for i in range(1, p):
            acc = acc + b ** i * a ** (p - 1 - i)
        out[rows] = acc
    return out


def _measure_delta(sq_diff: np.ndarray, new: np.ndarray, old: np.ndarray) -> np.ndarray:
    """new - old given the exactly-computed difference of their squares."""
    denom = new + old
    return np.where(denom > 0.0, sq_diff / np.where(denom > 0, denom, 1.0), 0.0)


def trial_energy(model: Model, coords: np.ndarray,
                 trial_coords: np.ndarray) -> tuple[float, float]:
    """Energy at trial_coords plus the exact decrease from coords.

    The difference is assembled from factored per-element terms, so it stays
    meaningful far below the cancellation floor of total_energy(new) -
    total_energy(old); line searches rely on that near convergence.
    """
    t = _tables(model)
    P_old = model.full_positions(coords)
    P_new = model.full_positions(trial_coords)
    # Per-node displacements are exact floats (Sterbenz); edge displacement
    # differences must come from these, not from subtracting two rounded
    # edge vectors, or rounding noise drowns the true step.
    shift = P_new - P_old
    energy_new = 0.0
    delta = 0.0

    if t.cable_edges.size:
        d_old = member_vectors(P_old, t.cable_edges)
        d_new = member_vectors(P_new, t.cable_edges)
        sq_old = np.einsum("ij,ij->i", d_old, d_old)
        sq_new = np.einsum("ij,ij->i", d_new, d_new)
        # (new^2 - old^2) factored through the displacement, no cancellation
        move = shift[t.cable_edges[:, 1]] - shift[t.cable_edges[:, 0]]
        sq_diff = np.einsum("ij,ij->i", move, d_new + d_old)
        L_old = np.sqrt(sq_old)
        L_new = np.sqrt(sq_new)
        dL = _measure_delta(sq_diff, L_new, L_old)
        if t.pl_rows.size:
            rows = t.pl_rows
            energy_new += float(np.sum(t.pl_w * L_new[rows] ** t.pl_p))
            delta += float(np.sum(t.pl_w * dL[rows]
                                  * _power_sum(L_new[rows], L_old[rows], t.pl_p,
                                               t.pl_p_values)))
        if t.sl_rows.size:
            rows = t.sl_rows
            energy_new += float(np.sum(0.5 * t.sl_k * (L_new[rows] - t.sl_rest) ** 2))
            delta += float(np.sum(0.5 * t.sl_k * dL[rows]
                                  * ((L_new[rows] - t.sl_rest) + (L_old[rows] - t.sl_rest))))

    if t.tris.size:
        p_old, q_old, r_old = (P_old[t.tris[:, v]] for v in range(3))
        p_new, q_new, r_new = (P_new[t.tris[:, v]] for v in range(3))
        a_old, b_old = q_old - p_old, r_old - p_old
        a_new, b_new = q_new - p_new, r_new - p_new
        N_old = np.cross(a_old, b_old)
        N_new = np.cross(a_new, b_new)
        # N_new - N_old expanded bilinearly to keep the difference exact
        da = shift[t.tris[:, 1]] - shift[t.tris[:, 0]]
        db = shift[t.tris[:, 2]] - shift[t.tris[:, 0]]
        dN = np.cross(da, b_new) + np.cross(a_old, db)
        nsq_old = np.einsum("ij,ij->i", N_old, N_old)
        nsq_diff = np.einsum("ij,ij->i", dN, N_new + N_old)
        S_old = 0.5 * np.sqrt(nsq_old)
        S_new = triangle_areas(P_new, t.tris)
        dS = 0.25 * _measure_delta(nsq_diff, S_new, S_old)
        if t.pa_rows.size:
            rows = t.pa_rows
            energy_new += float(np.sum(t.pa_w * S_new[rows] ** t.pa_p))
            delta += float(np.sum(t.pa_w * dS[rows]
                                  * _power_sum(S_new[rows], S_old[rows], t.pa_p,
                                               t.pa_p_values)))
        if t.plain_rows.size:
            rows = t.plain_rows
            energy_new += float(np.sum(S_new[rows]))
            delta += float(np.sum(dS[rows]))

    return energy_new, delta


def scatter_member_forces(grad3: np.ndarray, positions: np.ndarray,
                          edges: np.ndarray, forces: np.ndarray,
                          lengths: np.ndarray) -> None:
    """Accumulate force * grad(L) into a (N,3) gradient array."""
    if edges.size == 0:
        return
    coef = forces / lengths
    contrib = coef[:, None] * member_vectors(positions, edges)
    np.add.at(grad3, edges[:, 1], contrib)
    np.add.at(grad3, edges[:, 0], -contrib)


def scatter_element_stresses(grad3: np.ndarray, tris: np.ndarray,
                             stresses: np.ndarray, blocks: np.ndarray) -> None:
    """Accumulate sigma * grad(S) into a (N,3) gradient array from precomputed blocks."""
    if tris.size == 0:
        return
    weighted = stresses[:, None, None] * blocks
    for v in range(3):
        np.add.at(grad3, tris[:, v], weighted[:, v, :])


def _check_cable_lengths(t: _Tables, lengths: np.ndarray) -> None:
    bad = np.flatnonzero(lengths <= EPS_LENGTH)
    if bad.size:
        raise DegenerateGeometry(
            f"member {int(t.cable_ids[bad[0]])}: length {lengths[bad[0]]:.3e} "
            f"below {EPS_LENGTH:.0e}")


def _check_element_areas(t: _Tables, areas: np.ndarray) -> None:
    bad = np.flatnonzero(areas <= EPS_AREA)
    if bad.size:
        raise DegenerateGeometry(
            f"element {int(t.element_ids[bad[0]])}: area {areas[bad[0]]:.3e} "
            f"below {EPS_AREA:.0e}")


def total_gradient(model: Model, coords: np.ndarray) -> tuple[np.ndarray, GeneralizedForces]:
    """Gradient of total_energy over the free coordinates.

    Also returns the generalized forces used in the assembly (cable n and
    triangle sigma); strut multipliers come back zeroed because constraint
    terms are the optimizer's responsibility.
    """
    t = _tables(model)
    dof = model.dof_map
    positions = model.full_positions(coords)
    grad3 = np.zeros_like(positions)

    lengths = member_lengths(positions, t.cable_edges)
    _check_cable_lengths(t, lengths)
    n = _cable_forces(t, lengths)
    scatter_member_forces(grad3, positions, t.cable_edges, n, lengths)

    areas, blocks = triangle_area_gradient_blocks(positions, t.tris)
    _check_element_areas(t, areas)
    sigma = _element_stresses(t, areas)
    scatter_element_stresses(grad3, t.tris, sigma, blocks)

    forces = GeneralizedForces(
        member_forces=n,
        element_stresses=sigma,
        strut_multipliers=np.zeros(len(model.struts)),
    )
    return grad3[dof.free_nodes].reshape(-1), forces


def force_scale(forces: GeneralizedForces) -> float:
    """Mean absolute generalized force, floored at 1, used to scale tolerances."""
    mags = np.concatenate([np.abs(forces.member_forces), np.abs(forces.element_stresses)])
    if mags.size == 0:
        return 1.0
    return max(1.0, float(np.mean(mags)))


def strut_gradient_matrix(model: Model, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strut lengths and the (r, n) matrix whose rows are grad(L_k) over free dofs."""
    t = _tables(model)
    dof = model.dof_map
    edges = t.strut_edges
    r = edges.shape[0]
    A = np.zeros((r, dof.n))
    if r == 0:
        return np.zeros(0), A
    positions = model.full_positions(coords)
    lengths = member_lengths(positions, edges)
    bad = np.flatnonzero(lengths <= EPS_LENGTH)
    if bad.size:
        strut_ids = [m.id for m in model.struts]
        raise DegenerateGeometry(f"member {strut_ids[int(bad[0])]}: strut length "
                                 f"{lengths[bad[0]]:.3e} below {EPS_LENGTH:.0e}")
    units = member_vectors(positions, edges) / lengths[:, None]
    axes = np.arange(3)
    if t.strut_rows_i.size:
        A[t.strut_rows_i[:, None], t.strut_cols_i[:, None] + axes] = -units[t.strut_rows_i]
    if t.strut_rows_j.size:
        A[t.strut_rows_j[:, None], t.strut_cols_j[:, None] + axes] = units[t.strut_rows_j]
    return lengths, A
