"""Combinatorial data of extremal continua: PT-graphs and nested partitions.

A solution continuum is a planar tree.  Walking around it once visits every
edge twice, and the extremal map sends two arcs of the unit circle of equal
length onto the two sides of each edge.  The arcs form a *properly nested
partition*: the circle is tiled by intervals that come in pairs of equal
length, no pair separates another, and at least one pair is adjacent.

Arcs are measured in turns (the circle has length 1).
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

TOL = 1e-12

UNEQUAL = "unequal"
GAPPED = "gapped"
OVERLAP = "overlap"
CROSSING = "crossing"
NO_ADJACENT = "no_adjacent"
MARKED = "marked_not_adjacent"
VIOLATIONS = (UNEQUAL, GAPPED, OVERLAP, CROSSING, NO_ADJACENT, MARKED)


@dataclass(frozen=True)
class Arc:
    """Half-open arc ``[start, start + length)`` of the circle, in turns."""

    start: float
    length: float

    @classmethod
    def between(cls, a: float, b: float) -> "Arc":
        length = (b - a) % 1.0
        if length == 0.0 and b != a:
            length = 1.0
        return cls(a % 1.0, length)

    @property
    def end(self) -> float:
        return self.start + self.length


@dataclass(frozen=True)
class NestedPartition:
    pairs: Tuple[Tuple[Arc, Arc], ...]
    marked_pair: int = 0

    @classmethod
    def from_endpoints(cls, pairs, marked_pair: int = 0) -> "NestedPartition":
        """Build from ``[((a0, a1), (b0, b1)), ...]`` endpoint angles in turns."""
        return cls(tuple((Arc.between(*I), Arc.between(*J)) for I, J in pairs), marked_pair)

    def arcs(self) -> List[Tuple[Arc, int]]:
        """All arcs with their pair index, in counterclockwise order from angle 0."""
        out = [(arc, k) for k, pr in enumerate(self.pairs) for arc in pr]
        out.sort(key=lambda t: t[0].start)
        return out


@dataclass
class PartitionReport:
    ok: bool
    violation: Optional[str] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def _cyclic_between(x: int, a: int, b: int) -> bool:
    """Whether position x lies strictly between a and b going up from a (a < b)."""
    return a < x < b


def validate_partition(p: NestedPartition, tol: float = TOL) -> PartitionReport:
    """Check the partition invariants in order and report the first violation."""
    if not p.pairs:
        return PartitionReport(False, GAPPED, "no intervals")
    for k, (I, J) in enumerate(p.pairs):
        if abs(I.length - J.length) > tol:
            return PartitionReport(False, UNEQUAL, f"pair {k}: {I.length:.15g} vs {J.length:.15g}")
    arcs = p.arcs()
    total = sum(a.length for a, _ in arcs)
    for i, (arc, _) in enumerate(arcs):
        nxt = arcs[(i + 1) % len(arcs)][0]
        gap = (nxt.start - arc.end + 0.5) % 1.0 - 0.5
        if len(arcs) == 1:
            gap = 1.0 - arc.length
        if gap > tol:
            return PartitionReport(False, GAPPED, f"gap of {gap:.3g} turns after {arc.end % 1.0:.15g}")
        if gap < -tol:
            return PartitionReport(False, OVERLAP, f"overlap of {-gap:.3g} turns at {nxt.start:.15g}")
    if abs(total - 1.0) > tol * len(arcs):
        kind = GAPPED if total < 1.0 else OVERLAP
        return PartitionReport(False, kind, f"intervals cover {total:.15g} turns")
    pos: Dict[int, List[int]] = defaultdict(list)
    for i, (_, k) in enumerate(arcs):
        pos[k].append(i)
    keys = sorted(pos)
    for u in range(len(keys)):
        a, b = pos[keys[u]]
        for v in range(u + 1, len(keys)):
            c, d = pos[keys[v]]
            if _cyclic_between(c, a, b) != _cyclic_between(d, a, b):
                return PartitionReport(False, CROSSING, f"pairs {keys[u]} and {keys[v]} separate each other")
    n = len(arcs)

    def adjacent(k):
        a, b = pos[k]
        return (b - a) % n == 1 or (a - b) % n == 1

    if not any(adjacent(k) for k in keys):
        return PartitionReport(False, NO_ADJACENT, "no pair of adjacent intervals")
    if p.marked_pair not in pos or not adjacent(p.marked_pair):
        return PartitionReport(False, MARKED, f"marked pair {p.marked_pair} is not adjacent")
    return PartitionReport(True)


# --------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class PTGraph:
    """Planar tree with positive edge lengths summing to 1/2 and a marked leaf."""

    vertices: Tuple[complex, ...]
    edges: Tuple[Tuple[int, int, float], ...]
    marked_vertex: int = 0

    def degrees(self) -> List[int]:
        deg = [0] * len(self.vertices)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def check_graph(g: PTGraph, tol: float = TOL) -> None:
    """Raise ``ValueError`` unless ``g`` satisfies the PT-graph invariants."""
    n = len(g.vertices)
    if n < 2:
        raise ValueError("a PT-graph has at least one edge")
    if len(g.edges) != n - 1:
        raise ValueError("a tree on n vertices has n - 1 edges")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, length in g.edges:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"invalid edge ({i}, {j})")
        if not length > 0:
            raise ValueError("edge lengths must be positive")
        ri, rj = find(i), find(j)
        if ri == rj:
            raise ValueError("the graph contains a cycle")
        parent[ri] = rj
    deg = g.degrees()
    if 2 in deg:
        raise ValueError("there are no nodes of order 2 in a PT-graph")
    total = sum(e[2] for e in g.edges)
    if abs(total - 0.5) > tol:
        raise ValueError(f"edge lengths add up to {total!r}, not 1/2")
    if deg[g.marked_vertex] != 1:
        raise ValueError("the marked vertex must be a leaf")


def partition_from_graph(g: PTGraph) -> NestedPartition:
    """Boundary walk of the tree; the two passes along each edge form a pair.

    The walk starts at the marked leaf and always turns to the next edge
    counterclockwise, so the pair of the marked leaf's edge is adjacent.
    """
    check_graph(g)
    nbrs: Dict[int, List[Tuple[float, int, float]]] = defaultdict(list)
    for i, j, length in g.edges:
        d = g.vertices[j] - g.vertices[i]
        nbrs[i].append((math.atan2(d.imag, d.real), j, length))
        nbrs[j].append((math.atan2(-d.imag, -d.real), i, length))
    for v in nbrs:
        nbrs[v].sort()
    start = g.marked_vertex
    u, (_, v, length) = start, nbrs[start][0]
    seen: Dict[frozenset, int] = {}
    arcs: List[Tuple[Arc, int]] = []
    pos = 0.0
    for _ in range(2 * len(g.edges)):
        key = frozenset((u, v))
        arc = Arc(pos, length)
        pos += length
        if key in seen:
            arcs.append((arc, seen[key]))
        else:
            seen[key] = len(seen)
            arcs.append((arc, seen[key]))
        # arrive at v from u: next edge clockwise from the reversed direction
        ring = nbrs[v]
        back = next(k for k, t in enumerate(ring) if t[1] == u)
        _, w, length = ring[(back - 1) % len(ring)]
        u, v = v, w
    pairs: List[List[Arc]] = [[] for _ in seen]
    for arc, k in arcs:
        pairs[k].append(arc)
    marked = seen[frozenset((start, nbrs[start][0][1]))]
    return NestedPartition(tuple((p[0], p[1]) for p in pairs), marked)


# --------------------------------------------------------------------------
# partitions of solved maps


_ALPHA = re.compile(r"alpha(\d+)$")
_BETA = re.compile(r"beta(\d+)(?:_(\d+))?$")


def vertex_of(angle_name: str) -> str:
    """Vertex of the continuum named by an angle: ``alpha2 -> a2``, ``beta1_3 -> b1``."""
    m = _ALPHA.match(angle_name)
    if m:
        return f"a{m.group(1)}"
    m = _BETA.match(angle_name)
    if m:
        return f"b{m.group(1)}" if m.group(2) else "b"
    raise ValueError(f"not an angle name: {angle_name!r}")


def partition_from_angles(word: Sequence[str], angles: Dict[str, float]) -> NestedPartition:
    """Partition of the circle cut at the angles of a solved boundary word.

    The leaf at angle 0 is the point mapped to the marked vertex; arcs are
    paired when they cover the same edge of the continuum.
    """
    names = ["inf"] + [vertex_of(w) for w in word] + ["inf"]
    cuts = [0.0] + [angles[w] / (2 * math.pi) for w in word] + [1.0]
    slots: Dict[frozenset, List[Arc]] = defaultdict(list)
    order: List[frozenset] = []
    for k in range(len(cuts) - 1):
        key = frozenset((names[k], names[k + 1]))
        if key not in slots:
            order.append(key)
        slots[key].append(Arc(cuts[k], cuts[k + 1] - cuts[k]))
    bad = [sorted(k) for k in order if len(slots[k]) != 2]
    if bad:
        raise ValueError(f"edges {bad} are not visited exactly twice")
    marked = order.index(frozenset((names[0], names[1])))
    return NestedPartition(tuple((slots[k][0], slots[k][1]) for k in order), marked)


def partition_to_json(p: NestedPartition) -> dict:
    return {"pairs": [[[I.start, I.end], [J.start, J.end]] for I, J in p.pairs],
            "marked_pair": p.marked_pair}


def partition_from_json(data: dict) -> NestedPartition:
    try:
        pairs = [((float(I[0]), float(I[1])), (float(J[0]), float(J[1]))) for I, J in data["pairs"]]
        marked = int(data.get("marked_pair", 0))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValueError(f"malformed partition: {exc}") from exc
    return NestedPartition.from_endpoints(pairs, marked)
