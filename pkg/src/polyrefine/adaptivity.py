"""Error estimation, marking and the adaptive solve-estimate-mark-refine loop.

The per-element indicator is the standard residual-type quantity for the
lowest-order virtual element discretization,

    eta_K^2 = h_K^2 ||f||_{0,K}^2
            + S_K(u - Pi u, u - Pi u)
            + 1/2 * sum over interior edges e of K of h_e ||[d(Pi u)/dn]||_{0,e}^2,

with ``f`` integrated by one-point centroid quadrature, the identity-scaled
stabilization remainder of the solver, and normal jumps of the element-wise
affine projections across interior edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh_core import MeshTopology, _as_nodes, _cycle_arrays, build_topology
from .refinement import refine
from .vem_poisson import assemble, solve_dirichlet


def estimate(nodes, elements, topology: MeshTopology, u, f) -> np.ndarray:
    """Per-element residual indicators ``eta_K`` (nonnegative)."""
    nodes = _as_nodes(nodes)
    u = np.asarray(u, dtype=float)
    NT = len(elements)
    lengths, offsets, conc, nxt = _cycle_arrays(elements)
    red = offsets[:-1]
    p0 = nodes[conc]
    p1 = nodes[conc[nxt]]
    u0 = u[conc]
    u1 = u[conc[nxt]]

    area = 0.5 * np.add.reduceat(p0[:, 0] * p1[:, 1] - p1[:, 0] * p0[:, 1], red)
    # gradient of the elliptic projection from the boundary integral of u*n
    gx = np.add.reduceat(0.5 * (u0 + u1) * (p1[:, 1] - p0[:, 1]), red) / area
    gy = np.add.reduceat(-0.5 * (u0 + u1) * (p1[:, 0] - p0[:, 0]), red) / area

    # stabilization remainder: Pi u at vertex j is ubar + grad . (V_j - Vbar)
    inv_len = 1.0 / lengths
    ubar = np.add.reduceat(u0, red) * inv_len
    vbx = np.add.reduceat(p0[:, 0], red) * inv_len
    vby = np.add.reduceat(p0[:, 1], red) * inv_len
    rep = np.repeat(np.arange(NT), lengths)
    r = u0 - (ubar[rep] + gx[rep] * (p0[:, 0] - vbx[rep]) + gy[rep] * (p0[:, 1] - vby[rep]))
    eta2 = np.add.reduceat(r * r, red)

    h = topology.diameter
    fc = np.asarray(f(topology.centroid[:, 0], topology.centroid[:, 1]), dtype=float)
    eta2 += h * h * np.abs(area) * fc * fc

    interior = ~topology.boundary_edge_mask()
    if interior.any():
        e = topology.edge[interior]
        ab = nodes[e[:, 1]] - nodes[e[:, 0]]
        len2 = np.sum(ab * ab, axis=1)
        nhat = np.column_stack([ab[:, 1], -ab[:, 0]]) / np.sqrt(len2)[:, None]
        ia = topology.edge2elem[interior, 0]
        ib = topology.edge2elem[interior, 1]
        jump = (gx[ia] - gx[ib]) * nhat[:, 0] + (gy[ia] - gy[ib]) * nhat[:, 1]
        contrib = 0.5 * len2 * jump * jump  # h_e * |e| * jump^2, halved per side
        np.add.at(eta2, ia, contrib)
        np.add.at(eta2, ib, contrib)
    return np.sqrt(eta2)


def total_indicator(eta) -> float:
    return float(np.linalg.norm(np.asarray(eta, dtype=float)))


def dorfler_mark(eta, theta: float) -> np.ndarray:
    """Minimal prefix of elements (by descending indicator) holding a
    ``theta`` fraction of the total squared indicator.

    Ties are broken toward lower element indices; elements with zero
    indicator are never marked.  Returns sorted element indices.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.size == 0:
        raise ValueError("indicator vector is empty")
    if not (0.0 < theta <= 1.0):
        raise ValueError("marking parameter must lie in (0, 1]")
    if (eta < 0).any() or not np.isfinite(eta).all():
        raise ValueError("indicators must be finite and nonnegative")
    eta2 = eta * eta
    total = float(eta2.sum())
    if total == 0.0:
        return np.empty(0, dtype=np.int64)
    order = np.argsort(-eta2, kind="stable")
    npos = int(np.count_nonzero(eta2))
    order = order[:npos]
    csum = np.cumsum(eta2[order])
    k = min(int(np.searchsorted(csum, theta * total, side="left")), npos - 1)
    return np.sort(order[:k + 1])


@dataclass(frozen=True)
class StepRecord:
    """Mesh and estimator statistics after ``step`` refinements."""

    step: int
    num_nodes: int
    num_elements: int
    total_eta: float
    marked_count: int


@dataclass
class AdaptiveRun:
    records: list
    nodes: np.ndarray
    elements: list
    solution: np.ndarray


def adaptive_loop(nodes, elements, f, g, theta: float = 0.4, max_steps: int = 30,
                  dof_cap: int | None = None, on_step=None) -> AdaptiveRun:
    """Iterate solve -> estimate -> mark -> refine.

    One record is appended per visited mesh (the entry for step ``k``
    describes the mesh after ``k`` refinements, with the number of elements
    marked on it).  The loop stops after ``max_steps`` refinements, when the
    node count reaches ``dof_cap``, or when nothing is marked.  Marking is
    suppressed once the total indicator falls to the round-off floor
    (1e-12 of the discrete energy norm), which is where further refinement
    cannot improve the solution.
    """
    nodes = _as_nodes(nodes).copy()
    elements = [list(map(int, c)) for c in elements]
    records = []
    step = 0
    while True:
        topology = build_topology(nodes, elements)
        system = assemble(nodes, elements, topology, f)
        u = solve_dirichlet(system, g)
        eta = estimate(nodes, elements, topology, u, f)
        total = total_indicator(eta)
        energy = float(np.sqrt(max(u @ (system.matrix @ u), 0.0)))
        if total <= 1e-12 * max(energy, 1.0):
            marked = np.empty(0, dtype=np.int64)
        else:
            marked = dorfler_mark(eta, theta)
        records.append(StepRecord(step, len(nodes), len(elements), total, len(marked)))
        if on_step is not None:
            on_step(step, nodes, elements, u, eta, marked)
        if step >= max_steps or len(marked) == 0 or (dof_cap is not None and len(nodes) >= dof_cap):
            break
        nodes, elements = refine(nodes, elements, marked)
        step += 1
    return AdaptiveRun(records, nodes, elements, u)
