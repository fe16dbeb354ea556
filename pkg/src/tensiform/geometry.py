"""Closed-form member lengths, triangle areas, and their analytic gradients.

The length gradient of a member is a pair of opposite unit vectors attached
to its ends; the area gradient of a triangle is one in-plane vector per
vertex, each orthogonal to the triangle normal. Both break down at zero
measure, so gradient calls guard against degenerate inputs instead of
returning garbage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below these measures a gradient direction is numerically meaningless.
EPS_LENGTH = 1e-12
EPS_AREA = 1e-12


class DegenerateGeometry(ValueError):
    """Gradient requested for a (near-)zero length or area."""


@dataclass(frozen=True)
class LengthGradient:
    """d(length)/d(endpoint coordinates); p_block and q_block are unit vectors."""

    p_block: np.ndarray
    q_block: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.p_block, self.q_block])


@dataclass(frozen=True)
class AreaGradient:
    """d(area)/d(vertex coordinates); one in-plane 3-vector per vertex."""

    p_block: np.ndarray
    q_block: np.ndarray
    r_block: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.p_block, self.q_block, self.r_block])


def member_length(p, q) -> float:
    """Euclidean distance between the two ends."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return float(np.linalg.norm(d))


def member_length_gradient(p, q) -> LengthGradient:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    length = float(np.linalg.norm(d))
    if length <= EPS_LENGTH:
        raise DegenerateGeometry(f"member length {length:.3e} below {EPS_LENGTH:.0e}; "
                                 "length gradient undefined")
    u = d / length
    return LengthGradient(p_block=-u, q_block=u)


def triangle_area(p, q, r) -> float:
    """Half the cross-product norm; degenerate triangles return 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    normal = np.cross(q - p, r - p)
    return 0.5 * float(np.linalg.norm(normal))


def triangle_area_gradient(p, q, r) -> AreaGradient:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    normal = np.cross(q - p, r - p)
    two_area = float(np.linalg.norm(normal))
    if 0.5 * two_area <= EPS_AREA:
        raise DegenerateGeometry(f"triangle area {0.5 * two_area:.3e} below {EPS_AREA:.0e}; "
                                 "area gradient undefined")
    unit = normal / two_area
    # Each vertex block is half the unit normal crossed with the opposite edge.
    return AreaGradient(
        p_block=0.5 * np.cross(unit, r - q),
        q_block=0.5 * np.cross(unit, p - r),
        r_block=0.5 * np.cross(unit, q - p),
    )


# --- Vectorized forms used by the assembly loops ---------------------------

def member_lengths(positions: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Lengths of all members given (N,3) positions and (m,2) endpoint ids."""
    if edges.size == 0:
        return np.zeros(0)
    d = positions[edges[:, 1]] - positions[edges[:, 0]]
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def member_vectors(positions: np.ndarray, edges: np.ndarray) -> np.ndarray:
    if edges.size == 0:
        return np.zeros((0, 3))
    return positions[edges[:, 1]] - positions[edges[:, 0]]


def triangle_areas(positions: np.ndarray, tris: np.ndarray) -> np.ndarray:
    if tris.size == 0:
        return np.zeros(0)
    p = positions[tris[:, 0]]
    normal = np.cross(positions[tris[:, 1]] - p, positions[tris[:, 2]] - p)
    return 0.5 * np.sqrt(np.einsum("ij,ij->i", normal, normal))


def triangle_area_gradient_blocks(positions: np.ndarray, tris: np.ndarray):
    """Areas and per-vertex gradient blocks, shape (t,) and (t, 3, 3).

    blocks[:, v, :] is the gradient with respect to vertex v of each triangle.
    Degenerate triangles yield zero blocks; callers decide whether that is an
    error (see the assembly in functionals).
    """
    if tris.size == 0:
        return np.zeros(0), np.zeros((0, 3, 3))
    p = positions[tris[:, 0]]
    q = positions[tris[:, 1]]
    r = positions[tris[:, 2]]
    normal = np.cross(q - p, r - p)
    two_area = np.sqrt(np.einsum("ij,ij->i", normal, normal))
    areas = 0.5 * two_area
    safe = np.where(two_area > 0.0, two_area, 1.0)
    unit = normal / safe[:, None]
    blocks = np.empty((tris.shape[0], 3, 3))
    blocks[:, 0, :] = 0.5 * np.cross(unit, r - q)
    blocks[:, 1, :] = 0.5 * np.cross(unit, p - r)
    blocks[:, 2, :] = 0.5 * np.cross(unit, q - p)
    blocks[two_area == 0.0] = 0.0
    return areas, blocks
