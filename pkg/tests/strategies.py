"""Hypothesis strategies for circle partitions and PT-graphs."""

import cmath
import math

from hypothesis import strategies as st

from ptcap.partitions import Arc, NestedPartition, PTGraph


@st.composite
def dyck_labels(draw, max_pairs=8):
    """Pair labels of a random non-crossing matching, in circle order."""
    n = draw(st.integers(1, max_pairs))
    opens = closes = 0
    stack, labels, nxt = [], [], 0
    while closes < n:
        can_open = opens < n
        can_close = bool(stack)
        if can_open and (not can_close or draw(st.booleans())):
            stack.append(nxt)
            labels.append(nxt)
            nxt += 1
            opens += 1
        else:
            labels.append(stack.pop())
            closes += 1
    return labels


def build(labels, weights, offset=0.0, marked=None):
    """Lay out arcs in label order; pair k gets two arcs of length weights[k]."""
    total = 2 * sum(weights)
    pos = offset
    arcs = {}
    for lab in labels:
        L = weights[lab] / total
        arcs.setdefault(lab, []).append(Arc(pos % 1.0, L))
        pos += L
    if marked is None:
        marked = adjacent_pairs(labels)[0]
    return NestedPartition(tuple((arcs[k][0], arcs[k][1]) for k in sorted(arcs)), marked)


def adjacent_pairs(labels):
    n = len(labels)
    return sorted({labels[i] for i in range(n) if labels[i] == labels[(i + 1) % n]})


weights_for = lambda n: st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)


@st.composite
def laminar_partitions(draw):
    labels = draw(dyck_labels())
    n = max(labels) + 1
    w = draw(weights_for(n))
    offset = draw(st.floats(0.0, 0.999))
    marked = draw(st.sampled_from(adjacent_pairs(labels)))
    return build(labels, w, offset, marked)


@st.composite
def crossing_partitions(draw):
    labels = draw(dyck_labels(max_pairs=5))
    n = max(labels) + 1
    cut = draw(st.integers(0, len(labels)))
    labels = labels[:cut] + [n, n + 1, n, n + 1] + labels[cut:]
    w = draw(weights_for(n + 2))
    return build(labels, w, draw(st.floats(0.0, 0.999)), marked=None) if adjacent_pairs(labels) \
        else build(labels + [n + 2, n + 2], w + [0.3], 0.0)


@st.composite
def unequal_partitions(draw):
    p = draw(laminar_partitions())
    k = draw(st.integers(0, len(p.pairs) - 1))
    I, J = p.pairs[k]
    delta = draw(st.floats(1e-6, 0.5)) * I.length
    pairs = list(p.pairs)
    pairs[k] = (Arc(I.start, I.length + delta), J)
    return NestedPartition(tuple(pairs), p.marked_pair)


@st.composite
def gapped_partitions(draw):
    p = draw(laminar_partitions())
    k = draw(st.integers(0, len(p.pairs) - 1))
    I, J = p.pairs[k]
    shrink = draw(st.floats(1e-6, 0.5)) * I.length
    pairs = list(p.pairs)
    pairs[k] = (Arc(I.start, I.length - shrink), Arc(J.start, J.length - shrink))
    return NestedPartition(tuple(pairs), p.marked_pair)


@st.composite
def pt_graphs(draw, max_splits=5):
    """Random planar trees without degree-2 vertices, edge lengths summing to 1/2."""
    verts = [0j]
    edges = []
    for k in range(3):
        verts.append(cmath.exp(2j * math.pi * k / 3))
        edges.append([0, k + 1])
    leaves = [1, 2, 3]
    for _ in range(draw(st.integers(0, max_splits))):
        leaf = leaves.pop(draw(st.integers(0, len(leaves) - 1)))
        parent = next(i for i, j in edges if j == leaf)
        base = verts[leaf] - verts[parent]
        base /= abs(base)
        m = draw(st.integers(2, 3))
        for c in range(m):
            ang = (c + 1) / (m + 1) * math.pi - math.pi / 2
            verts.append(verts[leaf] + 0.5 * base * cmath.exp(1j * ang))
            edges.append([leaf, len(verts) - 1])
            leaves.append(len(verts) - 1)
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=len(edges), max_size=len(edges)))
    scale = 0.5 / sum(raw)
    lengths = [r * scale for r in raw]
    lengths[-1] = 0.5 - sum(lengths[:-1])
    marked = draw(st.sampled_from(leaves))
    return PTGraph(tuple(verts), tuple((i, j, L) for (i, j), L in zip(edges, lengths)), marked)
