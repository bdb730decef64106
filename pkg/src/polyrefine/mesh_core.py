"""Polygonal mesh data model: derived topology, geometry and validity checks.

A mesh is a pair ``(nodes, elements)``.  ``nodes`` is an ``(N, 2)`` float
array of vertex coordinates; ``elements`` is a list of vertex-index cycles,
one per polygon, oriented counterclockwise.  A vertex that sits flat on the
straight boundary segment of an element (a hanging node) is listed in the
cycle of every element whose boundary contains it, so the mesh is always a
conforming polygonal complex even when hanging nodes are present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = float(np.finfo(float).eps)

# relative tolerance (times element diameter) used to flag hanging nodes
HANGING_TOL_REL = 1e-10


class MeshError(Exception):
    """Base class for mesh construction errors."""


class InvalidIndexError(MeshError):
    """An element references a vertex index outside the node table."""


class TooDenseError(MeshError):
    """Element diameters have shrunk below the representable resolution."""


class NonManifoldEdgeError(MeshError):
    """An edge is shared by more than two elements."""


class DegeneratePolygonError(MeshError):
    """A polygon has (numerically) vanishing area."""


@dataclass(frozen=True)
class MeshTopology:
    """Derived connectivity and per-element geometry of a polygonal mesh.

    Attributes
    ----------
    edge : (NE, 2) int array
        Unique vertex pairs with ``edge[k, 0] < edge[k, 1]``, sorted
        lexicographically.
    elem2edge : list of int arrays
        For element ``i``, entry ``j`` is the global index of the edge
        joining local vertices ``j`` and ``j+1`` (cyclic).
    edge2elem : (NE, 2) int array
        The two elements incident to each edge; both entries equal for
        boundary edges.
    neighbor : list of int arrays
        For element ``i``, entry ``j`` is the element across local edge
        ``j`` (the element itself across boundary edges).
    centroid : (NT, 2) float array
    diameter : (NT,) float array
        Maximum pairwise vertex distance per element.
    """

    edge: np.ndarray
    elem2edge: list
    edge2elem: np.ndarray
    neighbor: list
    centroid: np.ndarray
    diameter: np.ndarray

    @property
    def num_edges(self) -> int:
        return len(self.edge)

    def boundary_edge_mask(self) -> np.ndarray:
        return self.edge2elem[:, 0] == self.edge2elem[:, 1]


@dataclass(frozen=True)
class Violation:
    kind: str
    where: object
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "0 violations"
        lines = [f"{len(self.violations)} violations"]
        lines += [str(v) for v in self.violations]
        return "\n".join(lines)


def _as_nodes(nodes) -> np.ndarray:
    arr = np.asarray(nodes, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("node table must have shape (N, 2)")
    return arr


def _cycle_arrays(elements):
    """Concatenated cycles plus the index arrays needed for cyclic shifts."""
    lengths = np.array([len(c) for c in elements], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    conc = np.concatenate([np.asarray(c, dtype=np.int64) for c in elements])
    nxt = np.arange(1, conc.size + 1)
    nxt[offsets[1:] - 1] = offsets[:-1]
    return lengths, offsets, conc, nxt


def polygon_area(vertices) -> float:
    """Unsigned polygon area by the shoelace formula."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    w = np.roll(v, -1, axis=0)
    area = 0.5 * abs(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))
    d = element_diameter(v)
    if area < 1e-14 * d * d:
        raise DegeneratePolygonError(f"area {area:.3e} below degeneracy threshold")
    return float(area)


def polygon_signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    w = np.roll(v, -1, axis=0)
    return float(0.5 * np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def polygon_centroid(vertices) -> np.ndarray:
    """Area-weighted centroid of a simple polygon."""
    v = np.asarray(vertices, dtype=float)
    w = np.roll(v, -1, axis=0)
    cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    a2 = np.sum(cr)  # twice the signed area
    d = element_diameter(v)
    if abs(a2) < 2e-14 * d * d:
        raise DegeneratePolygonError("centroid of a degenerate polygon")
    return np.sum((v + w) * cr[:, None], axis=0) / (3.0 * a2)


def element_diameter(vertices) -> float:
    """Maximum pairwise vertex distance."""
    v = np.asarray(vertices, dtype=float)
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


def _polygon_tables(nodes, elements):
    """Vectorized signed areas, centroids and diameters of all elements."""
    nodes = _as_nodes(nodes)
    lengths, offsets, conc, nxt = _cycle_arrays(elements)
    p0 = nodes[conc]
    p1 = nodes[conc[nxt]]
    cr = p0[:, 0] * p1[:, 1] - p1[:, 0] * p0[:, 1]
    red = offsets[:-1]
    area2 = np.add.reduceat(cr, red)
    sx = np.add.reduceat((p0[:, 0] + p1[:, 0]) * cr, red)
    sy = np.add.reduceat((p0[:, 1] + p1[:, 1]) * cr, red)

    diam = np.empty(len(elements))
    for L in np.unique(lengths):
        idx = np.flatnonzero(lengths == L)
        vm = nodes[np.stack([conc[offsets[i]:offsets[i] + L] for i in idx])]
        diff = vm[:, :, None, :] - vm[:, None, :, :]
        diam[idx] = np.sqrt(np.max(np.sum(diff * diff, axis=-1), axis=(1, 2)))

    bad = np.abs(area2) < 2e-14 * diam * diam
    if bad.any():
        raise DegeneratePolygonError(f"element {int(np.flatnonzero(bad)[0])} has vanishing area")
    centroid = np.column_stack([sx, sy]) / (3.0 * area2)[:, None]
    return 0.5 * area2, centroid, diam


def mesh_area(nodes, elements) -> float:
    """Total unsigned area of all elements."""
    signed, _, _ = _polygon_tables(nodes, elements)
    return float(np.sum(np.abs(signed)))


def build_topology(nodes, elements) -> MeshTopology:
    """Derive edge table, adjacency maps and per-element geometry.

    Raises
    ------
    InvalidIndexError
        If an element references a vertex outside the node table.
    NonManifoldEdgeError
        If an edge is shared by more than two elements.
    TooDenseError
        If the smallest element diameter falls below ``4 * machine eps``.
    """
    nodes = _as_nodes(nodes)
    NT = len(elements)
    if NT == 0:
        raise ValueError("element table is empty")
    lengths, offsets, conc, nxt = _cycle_arrays(elements)
    if conc.size == 0 or conc.min() < 0 or conc.max() >= len(nodes):
        raise InvalidIndexError("element vertex index out of range")

    total = np.sort(np.column_stack([conc, conc[nxt]]), axis=1)
    edge, first, inv = np.unique(total, axis=0, return_index=True, return_inverse=True)
    inv = inv.ravel()
    counts = np.bincount(inv, minlength=len(edge))
    if (counts > 2).any():
        k = int(np.flatnonzero(counts > 2)[0])
        raise NonManifoldEdgeError(f"edge {tuple(edge[k])} shared by {int(counts[k])} elements")

    owners = np.repeat(np.arange(NT, dtype=np.int64), lengths)
    last = np.empty(len(edge), dtype=np.int64)
    last[inv] = np.arange(inv.size)
    edge2elem = np.column_stack([owners[first], owners[last]])

    elem2edge = [inv[offsets[i]:offsets[i + 1]] for i in range(NT)]
    neighbor = []
    for i in range(NT):
        ia = edge2elem[elem2edge[i], 0].copy()
        ib = edge2elem[elem2edge[i], 1]
        swap = ia == i
        ia[swap] = ib[swap]
        neighbor.append(ia)

    _, centroid, diameter = _polygon_tables(nodes, elements)
    if diameter.min() < 4.0 * EPS:
        raise TooDenseError("the mesh is too dense")
    return MeshTopology(edge, elem2edge, edge2elem, neighbor, centroid, diameter)


def hanging_mask(vertices, tol: float | None = None) -> np.ndarray:
    """Boolean flags marking vertices that are midpoints of their cycle neighbours."""
    v = np.asarray(vertices, dtype=float)
    if tol is None:
        tol = HANGING_TOL_REL * element_diameter(v)
    err = np.linalg.norm(v - 0.5 * (np.roll(v, 1, axis=0) + np.roll(v, -1, axis=0)), axis=1)
    return err < tol


def detect_hanging_nodes(element_index: int, nodes, elements, tol: float | None = None) -> np.ndarray:
    """Per-vertex hanging flags for one element.

    A vertex counts as hanging when it lies within ``tol`` of the midpoint
    of its two cycle neighbours; ``tol`` defaults to ``1e-10`` times the
    element diameter.
    """
    nodes = _as_nodes(nodes)
    return hanging_mask(nodes[np.asarray(elements[element_index], dtype=np.int64)], tol)


def point_strictly_inside(point, vertices, tol: float | None = None) -> bool:
    """Crossing-number test requiring clearance ``tol`` from the boundary."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(point, dtype=float)
    if tol is None:
        tol = 1e-12 * element_diameter(v)
    a = v
    b = np.roll(v, -1, axis=0)
    ab = b - a
    ap = p - a
    L2 = np.sum(ab * ab, axis=1)
    t = np.clip(np.sum(ap * ab, axis=1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    closest = a + t[:, None] * ab
    if np.min(np.linalg.norm(closest - p, axis=1)) <= tol:
        return False
    cond = (a[:, 1] > p[1]) != (b[:, 1] > p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = a[:, 0] + (p[1] - a[:, 1]) * ab[:, 0] / ab[:, 1]
    return bool(np.count_nonzero(cond & (p[0] < xi)) % 2 == 1)


_PAIR_CACHE: dict = {}


def _nonadjacent_pairs(n: int) -> np.ndarray:
    if n not in _PAIR_CACHE:
        _PAIR_CACHE[n] = np.array(
            [(i, j) for i in range(n) for j in range(i + 2, n) if not (i == 0 and j == n - 1)],
            dtype=np.int64,
        ).reshape(-1, 2)
    return _PAIR_CACHE[n]


def _simple_flags(V: np.ndarray, diam: np.ndarray) -> np.ndarray:
    """Simplicity test for a stack of same-size polygons (M, L, 2)."""
    M, L, _ = V.shape
    ok = np.ones(M, dtype=bool)
    A = V
    Bv = np.roll(V, -1, axis=1)
    eps = (1e-12 * diam * diam)[:, None]
    pairs = _nonadjacent_pairs(L)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        a1, b1, a2, b2 = A[:, i], Bv[:, i], A[:, j], Bv[:, j]

        def cr(o, p, q):
            return (p[..., 0] - o[..., 0]) * (q[..., 1] - o[..., 1]) \
                 - (p[..., 1] - o[..., 1]) * (q[..., 0] - o[..., 0])

        d1, d2 = cr(a2, b2, a1), cr(a2, b2, b1)
        d3, d4 = cr(a1, b1, a2), cr(a1, b1, b2)
        proper = (((d1 > eps) & (d2 < -eps)) | ((d1 < -eps) & (d2 > eps))) & \
                 (((d3 > eps) & (d4 < -eps)) | ((d3 < -eps) & (d4 > eps)))
        bad = proper
        coll = (np.abs(d1) <= eps) & (np.abs(d2) <= eps) & (np.abs(d3) <= eps) & (np.abs(d4) <= eps)
        if coll.any():
            # collinear pairs: flag genuine 1-D interval overlap
            u = b1 - a1
            ulen2 = np.maximum((u * u).sum(-1), 1e-300)
            ta = ((a2 - a1) * u).sum(-1)
            tb = ((b2 - a1) * u).sum(-1)
            overlap = np.minimum(np.maximum(ta, tb), ulen2) - np.maximum(np.minimum(ta, tb), 0.0)
            bad = bad | (coll & (overlap > 1e-9 * ulen2))
        ok &= ~bad.any(axis=1)
    # a vertex touching a non-incident side pinches the boundary
    a = A[:, None, :, :]
    ab = (Bv - A)[:, None, :, :]
    p = V[:, :, None, :]
    L2 = np.maximum((ab * ab).sum(-1), 1e-300)
    t = ((p - a) * ab).sum(-1) / L2
    proj = a + np.clip(t, 0.0, 1.0)[..., None] * ab
    dist2 = ((p - proj) ** 2).sum(-1)
    k = np.arange(L)
    incident = np.zeros((L, L), dtype=bool)
    incident[k, k] = True
    incident[k, (k - 1) % L] = True
    touch = (dist2 < ((1e-12 * diam) ** 2)[:, None, None]) & \
            (t > 1e-9) & (t < 1 - 1e-9) & ~incident[None, :, :]
    ok &= ~touch.any(axis=(1, 2))
    return ok


def _inside_flags(V: np.ndarray, diam: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Strict point-in-polygon for one test point per stacked polygon."""
    a = V
    b = np.roll(V, -1, axis=1)
    ab = b - a
    p = points[:, None, :]
    L2 = np.maximum((ab * ab).sum(-1), 1e-300)
    t = np.clip(((p - a) * ab).sum(-1) / L2, 0.0, 1.0)
    proj = a + t[..., None] * ab
    dist2 = ((p - proj) ** 2).sum(-1)
    near = dist2.min(axis=1) <= (1e-12 * diam) ** 2
    cond = (a[..., 1] > points[:, None, 1]) != (b[..., 1] > points[:, None, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = a[..., 0] + (points[:, None, 1] - a[..., 1]) * ab[..., 0] / ab[..., 1]
    crossings = np.count_nonzero(cond & (points[:, None, 0] < xi), axis=1)
    return ~near & (crossings % 2 == 1)


def _duplicate_node_pairs(nodes, tol):
    """Index pairs of nodes closer than ``tol`` (grid hashing, 4 shifted lattices)."""
    n = len(nodes)
    if n < 2:
        return []
    cell = 2.0 * tol
    found = set()
    for sx in (0.0, tol):
        for sy in (0.0, tol):
            keys = np.floor((nodes + [sx, sy]) / cell).astype(np.int64)
            order = np.lexsort((keys[:, 1], keys[:, 0]))
            ks = keys[order]
            same = np.all(ks[1:] == ks[:-1], axis=1)
            start = 0
            for brk in np.append(np.flatnonzero(~same) + 1, n):
                group = order[start:brk]
                if len(group) > 1:
                    for a in range(len(group)):
                        for b in range(a + 1, len(group)):
                            i, j = sorted((int(group[a]), int(group[b])))
                            if np.linalg.norm(nodes[i] - nodes[j]) < tol:
                                found.add((i, j))
                start = brk
    return sorted(found)


def validate_mesh(nodes, elements) -> ValidationReport:
    """Check node-table and element-table invariants.

    Violations are returned as data; nothing is raised.  An empty report
    means the mesh is refinable.
    """
    out = []
    try:
        nodes = _as_nodes(nodes)
    except ValueError as exc:
        return ValidationReport([Violation("node-table", None, str(exc))])

    finite = np.isfinite(nodes).all(axis=1)
    for i in np.flatnonzero(~finite):
        out.append(Violation("nonfinite-node", int(i), "coordinate is nan or inf"))
    if not finite.all():
        return ValidationReport(out)

    if len(nodes) >= 2:
        span = nodes.max(axis=0) - nodes.min(axis=0)
        bbox_diag = float(np.hypot(*span))
        tol = 1e-12 * bbox_diag if bbox_diag > 0 else 1e-300
        for i, j in _duplicate_node_pairs(nodes, tol):
            out.append(Violation("duplicate-nodes", (i, j), "nodes coincide"))

    N = len(nodes)
    geometric = []
    for i, cyc in enumerate(elements):
        cyc = list(cyc)
        if len(cyc) < 3:
            out.append(Violation("too-few-vertices", i, f"cycle has {len(cyc)} vertices"))
            continue
        if any((not isinstance(v, (int, np.integer))) or v < 0 or v >= N for v in cyc):
            out.append(Violation("invalid-index", i, "vertex index out of range"))
            continue
        if len(set(cyc)) != len(cyc):
            out.append(Violation("repeated-vertex", i, "cycle revisits a vertex"))
            continue
        geometric.append(i)

    lengths = np.array([len(elements[i]) for i in geometric], dtype=np.int64)
    for L in np.unique(lengths):
        idx = np.array(geometric, dtype=np.int64)[lengths == L]
        V = nodes[np.array([elements[i] for i in idx], dtype=np.int64)]
        w = np.roll(V, -1, axis=1)
        sa = 0.5 * np.sum(V[..., 0] * w[..., 1] - w[..., 0] * V[..., 1], axis=1)
        diff = V[:, :, None, :] - V[:, None, :, :]
        diam = np.sqrt(np.max(np.sum(diff * diff, axis=-1), axis=(1, 2)))
        live = np.ones(len(idx), dtype=bool)

        degenerate = np.abs(sa) < 1e-14 * diam * diam
        for i in idx[degenerate]:
            out.append(Violation("degenerate", int(i), "polygon area is numerically zero"))
        live &= ~degenerate
        clockwise = live & (sa < 0)
        for i in idx[clockwise]:
            out.append(Violation("orientation", int(i), "vertices are not counterclockwise"))
        live &= ~clockwise
        if not live.any():
            continue
        tangled = ~_simple_flags(V[live], diam[live])
        for i in idx[live][tangled]:
            out.append(Violation("self-intersection", int(i), "polygon is not simple"))
        keep = live.copy()
        keep[live] = ~tangled
        if not keep.any():
            continue
        cr = (V[..., 0] * w[..., 1] - w[..., 0] * V[..., 1])[keep]
        cen = np.stack(
            [((V + w)[keep, :, 0] * cr).sum(1), ((V + w)[keep, :, 1] * cr).sum(1)], axis=1
        ) / (6.0 * sa[keep])[:, None]
        outside = ~_inside_flags(V[keep], diam[keep], cen)
        for i in idx[keep][outside]:
            out.append(Violation("centroid-not-interior", int(i), "centroid is not strictly inside"))

    out.sort(key=lambda v: (v.where if isinstance(v.where, int) else -1, v.kind))
    return ValidationReport(out)


def check_conformity(nodes, elements, topology: MeshTopology | None = None) -> list:
    """Hanging-node conformity violations (empty list = conforming).

    Checks that (a) no straight boundary run of an element carries more
    than one interior node, (b) every hanging node is the exact midpoint of
    its collinear parent edge, and (c) no mesh node sits in the interior of
    an unmatched (topologically boundary) element side.
    """
    nodes = _as_nodes(nodes)
    out = []
    for i, cyc in enumerate(elements):
        idx = np.asarray(cyc, dtype=np.int64)
        v = nodes[idx]
        d = element_diameter(v)
        prev = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        chord = nxt - prev
        clen = np.linalg.norm(chord, axis=1)
        off = np.abs(chord[:, 0] * (v[:, 1] - prev[:, 1]) - chord[:, 1] * (v[:, 0] - prev[:, 0]))
        flat = (off < 1e-8 * d * np.where(clen > 0, clen, 1.0)) & \
               (np.sum((v - prev) * chord, axis=1) > 0) & \
               (np.sum((v - nxt) * -chord, axis=1) > 0)
        if np.any(flat & np.roll(flat, -1)):
            out.append(f"element {i}: two hanging nodes on one straight segment")
        mids = 0.5 * (prev + nxt)
        drift = np.linalg.norm(v - mids, axis=1)
        for j in np.flatnonzero(flat & ~np.roll(flat, 1) & ~np.roll(flat, -1)):
            if drift[j] > HANGING_TOL_REL * d:
                out.append(f"element {i}: hanging node {int(idx[j])} off the parent-edge midpoint")

    topo = topology if topology is not None else build_topology(nodes, elements)
    bmask = topo.boundary_edge_mask()
    if bmask.any():
        be = topo.edge[bmask]
        a = nodes[be[:, 0]]
        b = nodes[be[:, 1]]
        ab = b - a
        L2 = np.sum(ab * ab, axis=1)
        # parameter of every node along every unmatched side, clipped off the endpoints
        t = ((nodes[None, :, :] - a[:, None, :]) * ab[:, None, :]).sum(-1) / L2[:, None]
        proj = a[:, None, :] + t[..., None] * ab[:, None, :]
        dist = np.linalg.norm(nodes[None, :, :] - proj, axis=-1)
        margin = 1e-9
        hit = (t > margin) & (t < 1.0 - margin) & (dist < 1e-9 * np.sqrt(L2)[:, None])
        for k, j in zip(*np.nonzero(hit)):
            out.append(
                f"node {int(j)} lies inside unmatched side {tuple(int(x) for x in be[k])}"
            )
    return out


def structured_quad_mesh(nx: int, ny: int | None = None, origin=(0.0, 0.0), extent=(1.0, 1.0)):
    """Axis-aligned ``nx`` x ``ny`` grid of quadrilaterals (counterclockwise)."""
    if ny is None:
        ny = nx
    x0, y0 = origin
    w, h = extent
    xs = x0 + w * np.arange(nx + 1) / nx
    ys = y0 + h * np.arange(ny + 1) / ny
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    elements = []
    for iy in range(ny):
        for ix in range(nx):
            v00 = iy * (nx + 1) + ix
            elements.append([v00, v00 + 1, v00 + nx + 2, v00 + nx + 1])
    return nodes, elements
