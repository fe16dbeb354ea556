"""Shared test helpers: finite-difference oracles and random model builders."""

import numpy as np
import pytest

from tensiform import Model, Node, LinearMember, TriElement
from tensiform.model import CABLE, STRUT, PowerLength, PowerArea, PlainArea, SpringLength
from tensiform import functionals


def central_difference(f, x, step):
    """Central finite-difference gradient of a scalar function of a flat vector."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        forward = x.copy()
        backward = x.copy()
        forward[i] += step
        backward[i] -= step
        grad[i] = (f(forward) - f(backward)) / (2.0 * step)
    return grad


def random_cable_triangle_model(rng, n_nodes=8, n_fixed=2, n_cables=10, n_tris=4):
    """Random well-separated model mixing every functional variant."""
    positions = rng.uniform(-3.0, 3.0, (n_nodes, 3))
    nodes = [Node(i, positions[i], fixed=i < n_fixed) for i in range(n_nodes)]

    catalog = [PowerLength(float(rng.uniform(0.5, 2.0)), int(rng.integers(1, 5))),
               SpringLength(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.0, 1.0)))]
    members = []
    seen = set()
    while len(members) < n_cables:
        i, j = rng.choice(n_nodes, size=2, replace=False)
        key = (min(i, j), max(i, j))
        if key in seen:
            continue
        seen.add(key)
        members.append(LinearMember(len(members), (int(i), int(j)), CABLE,
                                    functional=catalog[int(rng.integers(0, len(catalog)))]))

    area_catalog = [PowerArea(float(rng.uniform(0.5, 2.0)), int(rng.integers(1, 3))),
                    PlainArea()]
    elements = []
    seen_tris = set()
    while len(elements) < n_tris:
        tri = tuple(int(v) for v in rng.choice(n_nodes, size=3, replace=False))
        key = tuple(sorted(tri))
        if key in seen_tris:
            continue
        seen_tris.add(key)
        elements.append(TriElement(len(elements), tri,
                                   functional=area_catalog[int(rng.integers(0, 2))]))

    return Model(nodes=nodes, members=members, elements=elements)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
