"""Small mesh constructors used by the tests and the demos."""
from __future__ import annotations

import math

import numpy as np

from .polyhedral import SimplicialImmersion

__all__ = [
    "tetrahedron", "cube_surface", "icosahedron", "torus_mesh",
    "random_convex_sphere", "subdivide_midpoint", "simplex4_boundary",
]


def tetrahedron() -> SimplicialImmersion:
    """Regular tetrahedron inscribed in the cube [-1, 1]^3."""
    vertices = [
        (1.0, 1.0, 1.0), (1.0, -1.0, -1.0),
        (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0),
    ]
    faces = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    return SimplicialImmersion(vertices, faces)


def cube_surface() -> SimplicialImmersion:
    """Unit cube boundary, each square face split into two triangles."""
    vertices = [(x, y, z) for x in (0.0, 1.0)
                for y in (0.0, 1.0) for z in (0.0, 1.0)]
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),  # x = 0, x = 1
        (0, 4, 5, 1), (2, 3, 7, 6),  # y = 0, y = 1
        (0, 2, 6, 4), (1, 5, 7, 3),  # z = 0, z = 1
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append((a, b, c))
        faces.append((a, c, d))
    return SimplicialImmersion(vertices, faces)


def icosahedron() -> SimplicialImmersion:
    """Regular icosahedron on the golden-rectangle vertices."""
    g = (1.0 + math.sqrt(5.0)) / 2.0
    vertices = [
        (-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0),
        (0, -1, g), (0, 1, g), (0, -1, -g), (0, 1, -g),
        (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return SimplicialImmersion(vertices, faces)


def torus_mesh(major_segments: int = 24, minor_segments: int = 12,
               major_radius: float = 2.0,
               minor_radius: float = 0.5) -> SimplicialImmersion:
    """Structured triangulation of a torus of revolution."""
    if major_segments < 3 or minor_segments < 3:
        raise ValueError("need at least 3 segments around each circle")
    vertices = []
    for i in range(major_segments):
        u = 2.0 * math.pi * i / major_segments
        for j in range(minor_segments):
            v = 2.0 * math.pi * j / minor_segments
            rad = major_radius + minor_radius * math.cos(v)
            vertices.append((rad * math.cos(u), rad * math.sin(u),
                             minor_radius * math.sin(v)))
    faces = []
    for i in range(major_segments):
        for j in range(minor_segments):
            a = i * minor_segments + j
            b = ((i + 1) % major_segments) * minor_segments + j
            a1 = i * minor_segments + (j + 1) % minor_segments
            b1 = ((i + 1) % major_segments) * minor_segments \
                + (j + 1) % minor_segments
            faces.append((a, b, a1))
            faces.append((b, b1, a1))
    return SimplicialImmersion(vertices, faces)


def random_convex_sphere(num_vertices: int = 102,
                         seed: int = 0) -> SimplicialImmersion:
    """Convex triangulated sphere on random unit vectors.

    A convex hull of n points in general position has 2n - 4 triangles.
    """
    from scipy.spatial import ConvexHull

    rng = np.random.default_rng(seed)
    points = rng.standard_normal((num_vertices, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    hull = ConvexHull(points)
    return SimplicialImmersion(points, [tuple(s) for s in hull.simplices])


def subdivide_midpoint(mesh: SimplicialImmersion) -> SimplicialImmersion:
    """Split every triangle into four at the edge midpoints.

    Midpoints are not projected anywhere, so the new vertices are flat.
    """
    if mesh.dim != 2:
        raise ValueError("midpoint subdivision needs a triangle mesh")
    vertices = [tuple(v) for v in mesh.vertices]
    midpoint_ids = {}

    def midpoint(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        if key not in midpoint_ids:
            midpoint_ids[key] = len(vertices)
            vertices.append(tuple((mesh.vertices[a] + mesh.vertices[b])
                                  / 2.0))
        return midpoint_ids[key]

    faces = []
    for a, b, c in mesh.simplices:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc),
                      (ab, bc, ca)])
    return SimplicialImmersion(vertices, faces)


def simplex4_boundary() -> SimplicialImmersion:
    """Boundary of the regular 4-simplex: five tetrahedra in R^4."""
    a = (1.0 + math.sqrt(5.0)) / 4.0
    vertices = [(a, a, a, a)]
    for i in range(4):
        e = [0.0, 0.0, 0.0, 0.0]
        e[i] = 1.0
        vertices.append(tuple(e))
    cells = [tuple(j for j in range(5) if j != i) for i in range(5)]
    return SimplicialImmersion(vertices, cells)
