"""Local refinement of polygonal meshes.

Marked polygons are split by joining each edge midpoint to the element
centroid, yielding one quadrilateral subcell per non-hanging vertex.  A
hanging vertex is joined directly to the centroid instead of bisecting its
two incident edges, which keeps subcells well shaped.  To guarantee that no
straight segment ever carries more than one hanging node, the marked set is
first closed: any neighbour that already has a hanging node on an edge of
the refinement set is refined as well.  Unrefined neighbours of refined
elements are extended with the new edge midpoints so the vertex cycles stay
a conforming complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .mesh_core import (
    InvalidIndexError,
    MeshError,
    MeshTopology,
    _as_nodes,
    build_topology,
    hanging_mask,
    point_strictly_inside,
)

VERTEX, EDGE_MID, CENTROID = 0, 1, 2


class CentroidNotInteriorError(MeshError):
    """An element cannot be subdivided because its centroid is not interior."""


class Conn(NamedTuple):
    """Staging index over vertices, edge midpoints and element centroids.

    Tuple ordering equals the flat encoding order (vertices, then edge
    midpoints, then centroids), so sorting ``Conn`` values is the same as
    sorting their encoded integers.
    """

    kind: int
    idx: int

    def encode(self, num_nodes: int, num_edges: int) -> int:
        if self.kind == VERTEX:
            return self.idx
        if self.kind == EDGE_MID:
            return num_nodes + self.idx
        return num_nodes + num_edges + self.idx


def vertex(i: int) -> Conn:
    return Conn(VERTEX, int(i))


def edge_mid(k: int) -> Conn:
    return Conn(EDGE_MID, int(k))


def centroid_of(t: int) -> Conn:
    return Conn(CENTROID, int(t))


@dataclass
class RefinementPlan:
    """All staging computed for one refinement pass.

    ``staged`` maps each element of the refinement set to its subcell
    cycles (in ``Conn`` indices, already extended with cut-edge midpoints)
    and ``neighbor_cycles`` holds the extended cycles of unrefined
    neighbours.
    """

    marked: list
    additional: list
    cut_edges: np.ndarray
    staged: dict
    neighbor_cycles: dict


def _canonical_marked(marked, num_elements: int) -> list:
    out = sorted({int(i) for i in marked})
    if out and (out[0] < 0 or out[-1] >= num_elements):
        raise InvalidIndexError("marked element index out of range")
    return out


def _elem_hanging(nodes, elements, iel: int, tol) -> np.ndarray:
    return hanging_mask(nodes[np.asarray(elements[iel], dtype=np.int64)], tol)


def _nontrivial_local_edges(mask: np.ndarray) -> np.ndarray:
    """Flags for local edges with at least one hanging endpoint."""
    return mask | np.roll(mask, -1)


def closure_marked_set(nodes, elements, topology: MeshTopology, marked, tol: float | None = None) -> set:
    """Additional elements that must be refined together with ``marked``.

    Starting from the marked set, any neighbour owning a nontrivial edge
    (an edge with a hanging endpoint) that is also an edge of the current
    refinement set is added, until the set stops growing.  Returns only the
    added elements.
    """
    nodes = _as_nodes(nodes)
    marked = _canonical_marked(marked, len(elements))
    in_set = np.zeros(len(elements), dtype=bool)
    in_set[marked] = True
    edge_in_set = np.zeros(topology.num_edges, dtype=bool)
    for i in marked:
        edge_in_set[topology.elem2edge[i]] = True

    new = list(marked)
    while new:
        candidates = sorted({int(j) for i in new for j in topology.neighbor[i] if not in_set[j]})
        added = []
        for j in candidates:
            mask = _elem_hanging(nodes, elements, j, tol)
            if not mask.any():
                continue
            e2e = topology.elem2edge[j]
            nontrivial = e2e[_nontrivial_local_edges(mask)]
            if edge_in_set[nontrivial].any():
                added.append(j)
        for j in added:
            in_set[j] = True
            edge_in_set[topology.elem2edge[j]] = True
        new = added
    return set(np.flatnonzero(in_set)) - set(marked)


def subdivide_element(element_index: int, nodes, elements, topology: MeshTopology,
                      tol: float | None = None):
    """Subcells of one element, expressed in ``Conn`` indices.

    Returns ``(subcells, edge_rows)``.  Each subcell is
    ``[mid-or-hanging of previous edge, vertex, mid-or-hanging of next edge,
    centroid]``; for a nontrivial edge the hanging vertex stands in for the
    midpoint.  ``edge_rows`` records, per subcell side, the parent edge
    index when that side spans an entire nontrivial edge (``None``
    elsewhere) so the extension stage can later insert midpoints cut by
    other refined elements.
    """
    nodes = _as_nodes(nodes)
    cyc = np.asarray(elements[element_index], dtype=np.int64)
    n = len(cyc)
    verts = nodes[cyc]
    if not point_strictly_inside(topology.centroid[element_index], verts):
        raise CentroidNotInteriorError(f"element {element_index}: centroid not interior")
    mask = hanging_mask(verts, tol)
    edges = topology.elem2edge[element_index]

    mids = [edge_mid(edges[j]) for j in range(n)]
    for j in np.flatnonzero(mask):
        mids[(j - 1) % n] = vertex(cyc[j])
    for j in np.flatnonzero(mask):
        mids[j] = vertex(cyc[j])

    nontrivial = _nontrivial_local_edges(mask)
    rows_src = [int(edges[j]) if nontrivial[j] else None for j in range(n)]

    cen = centroid_of(element_index)
    subcells, edge_rows = [], []
    for j in range(n):
        if mask[j]:
            continue
        subcells.append([mids[(j - 1) % n], vertex(cyc[j]), mids[j], cen])
        edge_rows.append([rows_src[(j - 1) % n], rows_src[j], None, None])
    return subcells, edge_rows


def compute_cut_edges(nodes, elements, topology: MeshTopology, refinement_set: Iterable,
                      tol: float | None = None) -> np.ndarray:
    """Trivial edges of the refinement set, i.e. the edges that get midpoints."""
    nodes = _as_nodes(nodes)
    cut = np.zeros(topology.num_edges, dtype=bool)
    for iel in sorted({int(i) for i in refinement_set}):
        mask = _elem_hanging(nodes, elements, iel, tol)
        cut[topology.elem2edge[iel][~_nontrivial_local_edges(mask)]] = True
    return np.flatnonzero(cut)


def _extend_cycle(cycle, edge_row, cut_set: set):
    out = []
    for conn, e in zip(cycle, edge_row):
        out.append(conn)
        if e is not None and e in cut_set:
            out.append(edge_mid(e))
    return out


def extend_elements(nodes, elements, topology: MeshTopology, refinement_set: Iterable,
                    cut_edges, staged):
    """Insert cut-edge midpoints into neighbours and staged subcells.

    ``staged`` is a sequence of ``(cycle, edge_row)`` pairs.  Returns
    ``(neighbor_cycles, staged_cycles)`` where ``neighbor_cycles`` maps each
    unrefined neighbour of the refinement set to its extended cycle and
    ``staged_cycles`` are the (possibly extended) staged subcell cycles in
    input order.  Subcells whose rows carry no cut edge pass through
    unchanged.
    """
    refset = {int(i) for i in refinement_set}
    cut_set = {int(k) for k in np.asarray(cut_edges).ravel()}
    neighbors = sorted({int(j) for i in sorted(refset) for j in topology.neighbor[i]} - refset)
    neighbor_cycles = {}
    for j in neighbors:
        cycle = [vertex(v) for v in elements[j]]
        neighbor_cycles[j] = _extend_cycle(cycle, [int(e) for e in topology.elem2edge[j]], cut_set)
    staged_cycles = [_extend_cycle(cycle, row, cut_set) for cycle, row in staged]
    return neighbor_cycles, staged_cycles


def partition_marked(nodes, elements, topology: MeshTopology, marked, tol: float | None = None) -> dict:
    """Subdivide each marked element; returns ``{index: (subcells, edge_rows)}``."""
    return {i: subdivide_element(i, nodes, elements, topology, tol)
            for i in _canonical_marked(marked, len(elements))}


def plan_refinement(nodes, elements, topology: MeshTopology, marked,
                    tol: float | None = None) -> RefinementPlan:
    """Stage a full refinement pass without touching the input mesh."""
    nodes = _as_nodes(nodes)
    marked = _canonical_marked(marked, len(elements))
    additional = sorted(closure_marked_set(nodes, elements, topology, marked, tol))
    refset = sorted(set(marked) | set(additional))

    staged_raw = {i: subdivide_element(i, nodes, elements, topology, tol) for i in refset}
    cut = compute_cut_edges(nodes, elements, topology, refset, tol)

    flat, owners = [], []
    for i in refset:
        cells, rows = staged_raw[i]
        flat.extend(zip(cells, rows))
        owners.extend([i] * len(cells))
    neighbor_cycles, extended = extend_elements(nodes, elements, topology, refset, cut, flat)

    staged = {i: [] for i in refset}
    for i, cycle in zip(owners, extended):
        staged[i].append(cycle)
    return RefinementPlan(marked, additional, cut, staged, neighbor_cycles)


def assemble_refined_mesh(nodes, elements, topology: MeshTopology, plan: RefinementPlan):
    """Materialize a staged refinement into a new ``(nodes, elements)`` pair.

    Each refined element's slot receives its first subcell; the remaining
    subcells are appended (additional elements first, then marked ones).
    Connection indices are decoded by appending cut-edge midpoints and
    refinement-set centroids to the node table, then compacted in encoding
    order.
    """
    nodes = _as_nodes(nodes)
    table = []
    for i in range(len(elements)):
        if i in plan.staged:
            table.append(plan.staged[i][0])
        elif i in plan.neighbor_cycles:
            table.append(plan.neighbor_cycles[i])
        else:
            table.append([vertex(v) for v in elements[i]])
    for i in plan.additional:
        table.extend(plan.staged[i][1:])
    for i in plan.marked:
        table.extend(plan.staged[i][1:])

    used = sorted({conn for cycle in table for conn in cycle})
    index = {conn: t for t, conn in enumerate(used)}
    coords = np.empty((len(used), 2))
    for t, conn in enumerate(used):
        if conn.kind == VERTEX:
            coords[t] = nodes[conn.idx]
        elif conn.kind == EDGE_MID:
            a, b = topology.edge[conn.idx]
            coords[t] = 0.5 * (nodes[a] + nodes[b])
        else:
            coords[t] = topology.centroid[conn.idx]
    new_elements = [[index[conn] for conn in cycle] for cycle in table]
    return coords, new_elements


def refine(nodes, elements, marked, tol: float | None = None):
    """Refine ``marked`` elements (plus closure) and return the new mesh.

    The output cycles again list every boundary node of every element, each
    straight segment carries at most one hanging node, and total area is
    preserved.  An empty marked set returns the input unchanged.
    """
    nodes = _as_nodes(nodes)
    elements = [list(map(int, c)) for c in elements]
    marked = _canonical_marked(marked, len(elements))
    if not marked:
        return nodes.copy(), elements
    topology = build_topology(nodes, elements)
    plan = plan_refinement(nodes, elements, topology, marked, tol)
    return assemble_refined_mesh(nodes, elements, topology, plan)
