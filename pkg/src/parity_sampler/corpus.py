"""Named small graphs and lattice generators used by tests and the CLI."""
from __future__ import annotations

import itertools
import re

from .graph import Graph, GraphError, build_graph


def triangle() -> Graph:
    return build_graph(3, [(0, 1), (1, 2), (2, 0)])


def path(k: int) -> Graph:
    """Path on ``k`` vertices (``k - 1`` edges)."""
    if k < 1:
        raise GraphError("path needs at least one vertex")
    return build_graph(k, [(i, i + 1) for i in range(k - 1)])


def cycle(k: int) -> Graph:
    if k < 3:
        raise GraphError("cycle needs at least three vertices")
    return build_graph(k, [(i, (i + 1) % k) for i in range(k)])


def complete(k: int) -> Graph:
    return build_graph(k, list(itertools.combinations(range(k), 2)))


def k4_minus_edge() -> Graph:
    return build_graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])


def two_triangles() -> Graph:
    return build_graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])


def doubled_edge() -> Graph:
    """Triangle with edge (0, 1) doubled."""
    return build_graph(3, [(0, 1), (0, 1), (1, 2), (2, 0)])


def self_loop() -> Graph:
    """Triangle with a loop at 0 and a pendant edge (2, 3)."""
    return build_graph(4, [(0, 1), (1, 2), (2, 0), (0, 0), (2, 3)])


def grid(m: int, n: int) -> Graph:
    """Unwired box [-m, m] x [-n, n] of the square lattice."""
    from .lattice import build_box
    return build_box(m, n, wired=False).graph


def wired_grid(m: int, n: int) -> Graph:
    from .lattice import build_box
    return build_box(m, n, wired=True).graph


def triangular_rhombus(n: int) -> Graph:
    from .lattice import triangular_rhombus as tri
    return tri(n)


SMALL_CORPUS = {
    "triangle": triangle,
    "path-3": lambda: path(3),
    "cycle-4": lambda: cycle(4),
    "k4": lambda: complete(4),
    "k4-e": k4_minus_edge,
    "two-triangles": two_triangles,
    "doubled-edge": doubled_edge,
    "self-loop": self_loop,
}

_PATTERNS = [
    (r"path-(\d+)", lambda a: path(int(a[0]))),
    (r"cycle-(\d+)", lambda a: cycle(int(a[0]))),
    (r"k(\d+)", lambda a: complete(int(a[0]))),
    (r"grid-(\d+)-(\d+)", lambda a: grid(int(a[0]), int(a[1]))),
    (r"wired-grid-(\d+)-(\d+)", lambda a: wired_grid(int(a[0]), int(a[1]))),
    (r"triangular-rhombus-(\d+)", lambda a: triangular_rhombus(int(a[0]))),
]


def named_graph(name: str) -> Graph:
    """Resolve a generator name such as ``k4``, ``cycle-5`` or ``wired-grid-2-2``."""
    key = name.strip().lower()
    if key in SMALL_CORPUS:
        return SMALL_CORPUS[key]()
    for pat, make in _PATTERNS:
        mt = re.fullmatch(pat, key)
        if mt:
            return make(mt.groups())
    raise GraphError(f"unknown graph name {name!r}")
