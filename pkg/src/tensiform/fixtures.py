"""Programmatic generators for the benchmark structures.

Every generator is deterministic and returns a model that passes validate().
Two larger instances (the 220-cable net and the Tanzbrunnen-style suspended
membrane) ship as stored model files next to this module.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .model import (CABLE, STRUT, LinearMember, Model, Node, PlainArea,
                    PowerArea, PowerLength, TriElement, ElementFunctional)


def _node(i, x, y, z, fixed=False) -> Node:
    return Node(id=i, position=np.array([x, y, z], dtype=float), fixed=fixed)


def make_x_tensegrity(weights=(1.0, 1.0, 1.0, 1.0),
                      strut_lengths=(np.sqrt(2.0), np.sqrt(2.0)),
                      power: int = 4) -> Model:
    """Planar 4-cable / 2-strut tensegrity, all nodes free.

    Member order is fixed: cables (0,2), (0,3), (1,2), (1,3) carrying the four
    weights, then the crossing struts (0,1) and (2,3). Initial geometry is a
    square scaled so the struts (the diagonals) match their prescribed lengths.
    """
    w1, w2, w3, w4 = (float(w) for w in weights)
    l5, l6 = (float(v) for v in strut_lengths)
    side = l5 / np.sqrt(2.0)
    nodes = [
        _node(0, 0.0, 0.0, 0.0),
        _node(1, side, side, 0.0),
        _node(2, side, 0.0, 0.0),
        _node(3, 0.0, side, 0.0),
    ]
    members = [
        LinearMember(0, (0, 2), CABLE, functional=PowerLength(w1, power)),
        LinearMember(1, (0, 3), CABLE, functional=PowerLength(w2, power)),
        LinearMember(2, (1, 2), CABLE, functional=PowerLength(w3, power)),
        LinearMember(3, (1, 3), CABLE, functional=PowerLength(w4, power)),
        LinearMember(4, (0, 1), STRUT, prescribed_length=l5),
        LinearMember(5, (2, 3), STRUT, prescribed_length=l6),
    ]
    return Model(nodes=nodes, members=members)


def make_simplex(lbar: float = 10.0, w: float = 1.0, power: int = 4) -> Model:
    """Triangular prism tensegrity: 9 cables, 3 struts joining two twisted triangles.

    The cable orbits (bottom ring, top ring, saddles) each share one functional
    entry, so weight studies can drive the three groups independently; the
    defaults keep them equal.
    """
    if lbar <= 0:
        raise ValueError(f"prescribed strut length must be > 0, got {lbar}")
    radius = 0.35 * lbar
    height = 0.7 * lbar
    twist = np.pi / 6.0
    nodes = []
    for k in range(3):
        angle = 2.0 * np.pi * k / 3.0
        nodes.append(_node(k, radius * np.cos(angle), radius * np.sin(angle), 0.0))
    for k in range(3):
        angle = 2.0 * np.pi * k / 3.0 + twist
        nodes.append(_node(3 + k, radius * np.cos(angle), radius * np.sin(angle), height))

    orbits = [PowerLength(w, power), PowerLength(w, power), PowerLength(w, power)]
    cables = [(0, 1), (1, 2), (2, 0),          # bottom triangle
              (3, 4), (4, 5), (5, 3),          # top triangle
              (0, 3), (1, 4), (2, 5)]          # saddle diagonals
    struts = [(0, 4), (1, 5), (2, 3)]          # one-step twist
    members = [LinearMember(i, e, CABLE, functional=orbits[i // 3])
               for i, e in enumerate(cables)]
    members += [LinearMember(9 + i, e, STRUT, prescribed_length=float(lbar))
                for i, e in enumerate(struts)]
    return Model(nodes=nodes, members=members)


def make_strut20(connection: int, w1: float = 1.0, w2: float = 2.0,
                 lbar: float = 10.0) -> Model:
    """20-strut / 80-cable ring family; connection index 1..9 picks the cable offsets.

    Node numbering runs sequentially along the struts (strut k joins nodes
    2k and 2k+1). Cable group one connects node i to i + 2c, group two to
    i + 2c + 1, both modulo 40.
    """
    if not 1 <= connection <= 9:
        raise ValueError(f"connection index must be in 1..9, got {connection}")
    nodes = []
    for k in range(20):
        angle = 2.0 * np.pi * k / 20.0
        nodes.append(_node(2 * k, 8.0 * np.cos(angle), 8.0 * np.sin(angle), 0.0))
        nodes.append(_node(2 * k + 1, 8.0 * np.cos(angle + 0.3),
                           8.0 * np.sin(angle + 0.3), 6.0))

    f1 = PowerLength(w1, 4)
    f2 = PowerLength(w2, 4)
    members = []
    for i in range(40):
        members.append(LinearMember(i, (i, (i + 2 * connection) % 40), CABLE,
                                    functional=f1))
    for i in range(40):
        members.append(LinearMember(40 + i, (i, (i + 2 * connection + 1) % 40), CABLE,
                                    functional=f2))
    for k in range(20):
        members.append(LinearMember(80 + k, (2 * k, 2 * k + 1), STRUT,
                                    prescribed_length=float(lbar)))
    return Model(nodes=nodes, members=members)


_CUBOCT_FACES = [
    [(1, 1, 0), (1, 0, 1), (1, -1, 0), (1, 0, -1)],
    [(-1, 1, 0), (-1, 0, 1), (-1, -1, 0), (-1, 0, -1)],
    [(1, 1, 0), (0, 1, 1), (-1, 1, 0), (0, 1, -1)],
    [(1, -1, 0), (0, -1, 1), (-1, -1, 0), (0, -1, -1)],
    [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)],
    [(1, 0, -1), (0, 1, -1), (-1, 0, -1), (0, -1, -1)],
]

_CUBOCT_STRUTS = [
    ((1, 1, 0), (-1, -1, 0)),
    ((1, -1, 0), (-1, 1, 0)),
    ((1, 0, 1), (-1, 0, -1)),
    ((1, 0, -1), (-1, 0, 1)),
    ((0, 1, 1), (0, -1, -1)),
    ((0, 1, -1), (0, -1, 1)),
]


def make_cuboctahedron_membrane(w_cable: float = 2.0, w_membrane: float = 1.0,
                                lbar: float = 10.0, segments: int = 8) -> Model:
    """Cuboctahedron with its 6 square faces as membranes and 6 diagonal struts.

    The 24 edge curves are discretized into `segments` linear cable elements
    each and every square face into 2 * segments**2 triangles; grid nodes
    shared between an edge and its face are stitched by position.
    """
    scale = lbar / (2.0 * np.sqrt(2.0))
    registry: dict[tuple, int] = {}
    nodes: list[Node] = []

    def node_id(point: np.ndarray) -> int:
        key = tuple(np.round(point, 9))
        if key not in registry:
            registry[key] = len(nodes)
            nodes.append(_node(len(nodes), *point))
        return registry[key]

    def lerp(a, b, t):
        return (1.0 - t) * a + t * b

    corners = {v: scale * np.array(v, dtype=float) for face in _CUBOCT_FACES for v in face}

    # Edge curves: union of the square-face boundaries (each edge borders
    # exactly one square; the triangular faces stay open).
    edges = []
    seen = set()
    for face in _CUBOCT_FACES:
        for a, b in zip(face, face[1:] + face[:1]):
            key = frozenset((a, b))
            if key not in seen:
                seen.add(key)
                edges.append((a, b))

    members: list[LinearMember] = []
    f_cable = PowerLength(w_cable, 4)
    for a, b in edges:
        pa, pb = corners[a], corners[b]
        ids = [node_id(lerp(pa, pb, t / segments)) for t in range(segments + 1)]
        for s in range(segments):
            members.append(LinearMember(len(members), (ids[s], ids[s + 1]), CABLE,
                                        functional=f_cable))

    elements: list[TriElement] = []
    f_mem = PowerArea(w_membrane, 2)
    for face in _CUBOCT_FACES:
        c0, c1, c2, c3 = (corners[v] for v in face)
        grid = np.empty((segments + 1, segments + 1), dtype=int)
        for i in range(segments + 1):
            for j in range(segments + 1):
                u, v = i / segments, j / segments
                point = ((1 - u) * (1 - v) * c0 + u * (1 - v) * c1
                         + u * v * c2 + (1 - u) * v * c3)
                grid[i, j] = node_id(point)
        for i in range(segments):
            for j in range(segments):
                a, b = grid[i, j], grid[i + 1, j]
                c, d = grid[i + 1, j + 1], grid[i, j + 1]
                if (i + j) % 2 == 0:
                    tris = [(a, b, c), (a, c, d)]
                else:
                    tris = [(a, b, d), (b, c, d)]
                for t in tris:
                    elements.append(TriElement(len(elements), t, functional=f_mem))

    for a, b in _CUBOCT_STRUTS:
        members.append(LinearMember(len(members), (node_id(corners[a]), node_id(corners[b])),
                                    STRUT, prescribed_length=float(lbar)))
    return Model(nodes=nodes, members=members, elements=elements)


def make_ring_membrane(h: float, n_radial: int = 12, n_hoop: int = 32,
                       radius: float = 5.0,
                       functional: ElementFunctional | None = None) -> Model:
    """Triangulated cylinder between two fixed rings a height h apart."""
    if h <= 0:
        raise ValueError(f"ring separation must be > 0, got {h}")
    functional = functional if functional is not None else PlainArea()
    nodes = []
    for i in range(n_radial + 1):
        z = -0.5 * h + h * i / n_radial
        boundary = i == 0 or i == n_radial
        for j in range(n_hoop):
            angle = 2.0 * np.pi * j / n_hoop
            nodes.append(_node(len(nodes), radius * np.cos(angle),
                               radius * np.sin(angle), z, fixed=boundary))

    def nid(i, j):
        return i * n_hoop + (j % n_hoop)

    elements = []
    for i in range(n_radial):
        for j in range(n_hoop):
            a, b = nid(i, j), nid(i, j + 1)
            c, d = nid(i + 1, j + 1), nid(i + 1, j)
            if (i + j) % 2 == 0:
                tris = [(a, b, c), (a, c, d)]
            else:
                tris = [(a, b, d), (b, c, d)]
            for t in tris:
                elements.append(TriElement(len(elements), t, functional=functional))
    return Model(nodes=nodes, members=[], elements=elements)


def make_net(rows: int, cols: int, fixed=None, spacing: float = 1.0,
             w: float = 0.5, power: int = 2) -> Model:
    """Rectangular grid of cables; `fixed` lists node ids (default: the 4 corners)."""
    if rows < 2 or cols < 2:
        raise ValueError("net needs at least a 2x2 grid")
    if fixed is None:
        fixed = [0, cols - 1, (rows - 1) * cols, rows * cols - 1]
    fixed = set(int(i) for i in fixed)
    nodes = []
    for i in range(rows):
        for j in range(cols):
            nid = i * cols + j
            nodes.append(_node(nid, j * spacing, i * spacing, 0.0, fixed=nid in fixed))
    f = PowerLength(w, power)
    members = []
    for i in range(rows):
        for j in range(cols):
            nid = i * cols + j
            if j + 1 < cols:
                members.append(LinearMember(len(members), (nid, nid + 1), CABLE,
                                            functional=f))
            if i + 1 < rows:
                members.append(LinearMember(len(members), (nid, nid + cols), CABLE,
                                            functional=f))
    return Model(nodes=nodes, members=members)


def make_net220() -> Model:
    """The 220-cable net with 5 fixed nodes: an 11x11 grid, corners pinned at
    the base plane and the center node held high as a mast point."""
    center = 5 * 11 + 5
    model = make_net(11, 11, fixed=[0, 10, 110, 120, center], w=0.5, power=2)
    nodes = list(model.nodes)
    high = nodes[center]
    nodes[center] = Node(id=high.id,
                         position=np.array([high.position[0], high.position[1], 4.0]),
                         fixed=True)
    return Model(nodes=nodes, members=model.members, elements=model.elements)


def make_tanzbrunnen() -> Model:
    """Suspended-membrane study: a scalloped circular membrane with 8 fixed
    anchors on the rim and a central mast strut from a fixed base."""
    n_hoop = 16
    rim_r, mid_r, inner_r = 10.0, 6.6, 3.3
    nodes = []
    for j in range(n_hoop):  # rim: even nodes are anchors
        angle = 2.0 * np.pi * j / n_hoop
        nodes.append(_node(len(nodes), rim_r * np.cos(angle), rim_r * np.sin(angle),
                           0.0, fixed=(j % 2 == 0)))
    for radius, z in ((mid_r, 1.5), (inner_r, 3.0)):
        for j in range(n_hoop):
            angle = 2.0 * np.pi * j / n_hoop
            nodes.append(_node(len(nodes), radius * np.cos(angle),
                               radius * np.sin(angle), z))
    center = len(nodes)
    nodes.append(_node(center, 0.0, 0.0, 4.5))
    base = len(nodes)
    nodes.append(_node(base, 0.0, 0.0, 0.0, fixed=True))

    f_cable = PowerLength(2.0, 4)
    members = [LinearMember(i, (i, (i + 1) % n_hoop), CABLE, functional=f_cable)
               for i in range(n_hoop)]
    members.append(LinearMember(n_hoop, (base, center), STRUT, prescribed_length=6.0))

    f_mem = PowerArea(1.0, 2)
    elements = []

    def ring(base_idx, j):
        return base_idx + (j % n_hoop)

    for band in range(2):  # rim->mid, mid->inner
        lo, hi = band * n_hoop, (band + 1) * n_hoop
        for j in range(n_hoop):
            a, b = ring(lo, j), ring(lo, j + 1)
            c, d = ring(hi, j + 1), ring(hi, j)
            elements.append(TriElement(len(elements), (a, b, c), functional=f_mem))
            elements.append(TriElement(len(elements), (a, c, d), functional=f_mem))
    inner = 2 * n_hoop
    for j in range(n_hoop):  # fan to the mast head
        elements.append(TriElement(len(elements),
                                   (ring(inner, j), ring(inner, j + 1), center),
                                   functional=f_mem))
    return Model(nodes=nodes, members=members, elements=elements)


def load_stored(name: str) -> Model:
    """Load one of the stored fixture files shipped with the package."""
    from .fileio import model_from_dict
    data = resources.files("tensiform.data").joinpath(f"{name}.json").read_text()
    return model_from_dict(json.loads(data))


def _registry():
    return {
        "x-tensegrity": dict(
            factory=lambda p: make_x_tensegrity(
                weights=(p.get("w1", 1.0), p.get("w2", 1.0), p.get("w3", 1.0),
                         p.get("w4", 1.0)),
                strut_lengths=(p.get("lbar", np.sqrt(2.0)), p.get("lbar", np.sqrt(2.0))),
                power=int(p.get("power", 4))),
            description="4-cable / 2-strut planar tensegrity, all nodes free",
            params={"w1": 1.0, "w2": 1.0, "w3": 1.0, "w4": 1.0,
                    "lbar": float(np.sqrt(2.0)), "power": 4},
        ),
        "simplex": dict(
            factory=lambda p: make_simplex(lbar=p.get("lbar", 10.0), w=p.get("w", 1.0),
                                           power=int(p.get("power", 4))),
            description="9-cable / 3-strut prism tensegrity",
            params={"lbar": 10.0, "w": 1.0, "power": 4},
        ),
        "strut20": dict(
            factory=lambda p: make_strut20(connection=int(p.get("connection", 1)),
                                           w1=p.get("w1", 1.0), w2=p.get("w2", 2.0),
                                           lbar=p.get("lbar", 10.0)),
            description="80-cable / 20-strut ring, connection patterns C1..C9",
            params={"connection": 1, "w1": 1.0, "w2": 2.0, "lbar": 10.0},
        ),
        "cuboctahedron": dict(
            factory=lambda p: make_cuboctahedron_membrane(
                w_cable=p.get("w_cable", 2.0), w_membrane=p.get("w_membrane", 1.0),
                lbar=p.get("lbar", 10.0)),
            description="24 edge cables, 6 square membranes, 6 diagonal struts",
            params={"w_cable": 2.0, "w_membrane": 1.0, "lbar": 10.0},
        ),
        "ring": dict(
            factory=lambda p: make_ring_membrane(
                h=p.get("h", 4.0), n_radial=int(p.get("n_radial", 12)),
                n_hoop=int(p.get("n_hoop", 32)), radius=p.get("radius", 5.0)),
            description="membrane spanning two fixed rings (soap-film test case)",
            params={"h": 4.0, "n_radial": 12, "n_hoop": 32, "radius": 5.0},
        ),
        "net": dict(
            factory=lambda p: make_net(rows=int(p.get("rows", 10)),
                                       cols=int(p.get("cols", 10))),
            description="rectangular cable net with fixed corners",
            params={"rows": 10, "cols": 10},
        ),
        "net220": dict(
            factory=lambda p: load_stored("net220"),
            description="stored 220-cable net with 5 fixed nodes",
            params={},
        ),
        "tanzbrunnen": dict(
            factory=lambda p: load_stored("tanzbrunnen"),
            description="stored suspended-membrane study with mast strut",
            params={},
        ),
    }


def fixture_names() -> list[str]:
    return sorted(_registry().keys())


def fixture_info(name: str) -> dict:
    reg = _registry()
    if name not in reg:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(reg))}")
    entry = reg[name]
    return {"name": name, "description": entry["description"], "params": entry["params"]}


def build_fixture(name: str, params: dict | None = None) -> Model:
    reg = _registry()
    if name not in reg:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(reg))}")
    return reg[name]["factory"](params or {})
