"""Structural data model for prestressed form-finding.

A model is a set of nodes (free or fixed), linear members (tension cables
carrying an element functional, or compression struts carrying a prescribed
length), and triangular membrane elements. Models are immutable after
construction and safe to share read-only across parallel solver jobs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

CABLE = "cable"
STRUT = "strut"

# Integer powers accepted by the power-law functionals.
MIN_POWER = 1
MAX_POWER = 8


class ModelError(ValueError):
    """Raised for structurally invalid models."""


@dataclass(frozen=True)
class PowerLength:
    """Cable energy w * L**p. With p = 2 the weight is half a force density."""

    w: float
    p: int = 2


@dataclass(frozen=True)
class SpringLength:
    """Cable energy 0.5 * k * (L - rest_length)**2.

    A soft virtual spring: the member force k*(L - rest_length) may turn
    negative, which diagnostics report but solvers do not forbid.
    """

    k: float
    rest_length: float = 0.0


@dataclass(frozen=True)
class PowerArea:
    """Triangle energy w * S**p. With p = 2 the weight is half a surface stress density."""

    w: float
    p: int = 2


@dataclass(frozen=True)
class PlainArea:
    """Triangle energy S itself: stationary points are minimal surfaces."""


ElementFunctional = PowerLength | SpringLength | PowerArea | PlainArea

LENGTH_FUNCTIONALS = (PowerLength, SpringLength)
AREA_FUNCTIONALS = (PowerArea, PlainArea)


@dataclass(frozen=True)
class Node:
    id: int
    position: np.ndarray  # (3,)
    fixed: bool = False


@dataclass(frozen=True)
class LinearMember:
    """Cable (with functional) or strut (with prescribed_length)."""

    id: int
    endpoints: tuple[int, int]
    role: str = CABLE
    functional: ElementFunctional | None = None
    prescribed_length: float | None = None


@dataclass(frozen=True)
class TriElement:
    id: int
    vertices: tuple[int, int, int]
    functional: ElementFunctional


@dataclass(frozen=True)
class DofMap:
    """Bijection between free-node (node, axis) pairs and indices 0..n-1.

    Fixed-node coordinates are excluded; they are substituted directly from
    the node table whenever geometry is evaluated.
    """

    free_nodes: np.ndarray  # ascending ids of free nodes
    node_offset: np.ndarray  # (num_nodes,) dof index of the node's x component, -1 if fixed
    n: int

    def index(self, node_id: int, axis: int) -> int:
        off = int(self.node_offset[node_id])
        if off < 0:
            raise ModelError(f"node {node_id} is fixed and has no dof")
        return off + axis

    def pack(self, positions: np.ndarray) -> np.ndarray:
        """Extract the flat free-coordinate vector from full (N,3) positions."""
        return positions[self.free_nodes].reshape(-1).copy()

    def unpack(self, coords: np.ndarray, base_positions: np.ndarray) -> np.ndarray:
        """Merge flat free coordinates with the prescribed fixed positions."""
        coords = np.asarray(coords, dtype=float)
        if coords.size != self.n:
            raise ModelError(f"expected {self.n} coordinates, got {coords.size}")
        out = base_positions.copy()
        out[self.free_nodes] = coords.reshape(-1, 3)
        return out


def build_dof_map(model: "Model") -> DofMap:
    """Number the free coordinates; fixed nodes are left out entirely."""
    free = np.flatnonzero(~model.fixed_mask)
    if free.size == 0:
        raise ModelError("fully fixed model: no free nodes to solve for")
    offsets = np.full(model.num_nodes, -1, dtype=np.int64)
    offsets[free] = 3 * np.arange(free.size)
    return DofMap(free_nodes=free, node_offset=offsets, n=3 * free.size)


@dataclass(eq=False)
class Model:
    nodes: list[Node]
    members: list[LinearMember]
    elements: list[TriElement] = field(default_factory=list)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def positions(self) -> np.ndarray:
        pos = np.array([n.position for n in self.nodes], dtype=float).reshape(-1, 3)
        pos.flags.writeable = False
        return pos

    @cached_property
    def fixed_mask(self) -> np.ndarray:
        mask = np.array([n.fixed for n in self.nodes], dtype=bool)
        mask.flags.writeable = False
        return mask

    @cached_property
    def cables(self) -> list[LinearMember]:
        return [m for m in self.members if m.role == CABLE]

    @cached_property
    def struts(self) -> list[LinearMember]:
        return [m for m in self.members if m.role == STRUT]

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.array([m.endpoints for m in self.members], dtype=np.int64).reshape(-1, 2)

    @cached_property
    def cable_edge_array(self) -> np.ndarray:
        return np.array([m.endpoints for m in self.cables], dtype=np.int64).reshape(-1, 2)

    @cached_property
    def strut_edge_array(self) -> np.ndarray:
        return np.array([m.endpoints for m in self.struts], dtype=np.int64).reshape(-1, 2)

    @cached_property
    def strut_lengths_bar(self) -> np.ndarray:
        return np.array([m.prescribed_length for m in self.struts], dtype=float)

    @cached_property
    def tri_array(self) -> np.ndarray:
        return np.array([e.vertices for e in self.elements], dtype=np.int64).reshape(-1, 3)

    @cached_property
    def dof_map(self) -> DofMap:
        return build_dof_map(self)

    def free_coords(self) -> np.ndarray:
        """Flat vector of the free-node coordinates stored in the model."""
        return self.dof_map.pack(self.positions)

    def full_positions(self, coords: np.ndarray) -> np.ndarray:
        return self.dof_map.unpack(coords, self.positions)


def _check_functional(violations: list[str], owner: str, f: ElementFunctional | None,
                      expect_area: bool) -> None:
    if f is None:
        violations.append(f"{owner}: missing functional")
        return
    if expect_area and not isinstance(f, AREA_FUNCTIONALS):
        violations.append(f"{owner}: expected an area functional, got {type(f).__name__}")
        return
    if not expect_area and not isinstance(f, LENGTH_FUNCTIONALS):
        violations.append(f"{owner}: expected a length functional, got {type(f).__name__}")
        return
    if isinstance(f, (PowerLength, PowerArea)):
        if not np.isfinite(f.w) or f.w <= 0:
            violations.append(f"{owner}: weight must be finite and > 0, got {f.w}")
        if not isinstance(f.p, (int, np.integer)) or not MIN_POWER <= f.p <= MAX_POWER:
            violations.append(f"{owner}: power must be an integer in "
                              f"[{MIN_POWER}, {MAX_POWER}], got {f.p}")
    elif isinstance(f, SpringLength):
        if not np.isfinite(f.k) or f.k <= 0:
            violations.append(f"{owner}: stiffness must be finite and > 0, got {f.k}")
        if not np.isfinite(f.rest_length) or f.rest_length < 0:
            violations.append(f"{owner}: rest length must be finite and >= 0, "
                              f"got {f.rest_length}")


def validate(model: Model) -> list[str]:
    """Check every structural invariant; return one message per violation.

    Diagnostic only: never raises, and an empty list means the model is sound.
    """
    violations: list[str] = []
    n = model.num_nodes
    if n == 0:
        return ["model has no nodes"]

    ids = [node.id for node in model.nodes]
    if ids != list(range(n)):
        violations.append(f"node ids must be dense 0..{n - 1}, got {ids[:8]}...")
    for node in model.nodes:
        pos = np.asarray(node.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            violations.append(f"node {node.id}: position must be a finite 3-vector")
    if all(node.fixed for node in model.nodes):
        violations.append("model has no free nodes")

    seen_member_ids: set[int] = set()
    for m in model.members:
        name = f"member {m.id}"
        if m.id in seen_member_ids:
            violations.append(f"{name}: duplicate member id")
        seen_member_ids.add(m.id)
        i, j = m.endpoints
        if not (0 <= i < n and 0 <= j < n):
            violations.append(f"{name}: endpoint out of range {m.endpoints}")
            continue
        if i == j:
            violations.append(f"{name}: endpoints must be distinct, got {m.endpoints}")
        if m.role == CABLE:
            _check_functional(violations, name, m.functional, expect_area=False)
        elif m.role == STRUT:
            lb = m.prescribed_length
            if lb is None or not np.isfinite(lb) or lb <= 0:
                violations.append(f"{name}: strut prescribed length must be > 0, got {lb}")
        else:
            violations.append(f"{name}: unknown role {m.role!r}")

    seen_element_ids: set[int] = set()
    for e in model.elements:
        name = f"element {e.id}"
        if e.id in seen_element_ids:
            violations.append(f"{name}: duplicate element id")
        seen_element_ids.add(e.id)
        a, b, c = e.vertices
        if not all(0 <= v < n for v in e.vertices):
            violations.append(f"{name}: vertex out of range {e.vertices}")
            continue
        if len({a, b, c}) != 3:
            violations.append(f"{name}: vertices must be pairwise distinct, got {e.vertices}")
        _check_functional(violations, name, e.functional, expect_area=True)

    return violations
