"""Deterministic SVG rendering of meshes and vertex fields."""

from __future__ import annotations

import numpy as np

from .mesh_core import _as_nodes


def _fmt(v: float) -> str:
    return f"{v:.8g}"


def _ramp(t: float) -> str:
    """Linear blue-to-red ramp."""
    r = int(round(255 * t))
    return f"#{r:02x}00{255 - r:02x}"


def render_svg(nodes, elements, path, values=None) -> None:
    """Write one SVG polygon per element.

    With ``values`` (one scalar per vertex) each polygon is filled by the
    mean of its vertex values through a linear color ramp.  The viewport is
    the mesh bounding box with a 2% margin; strokes are 0.2% of the box
    diagonal.  Output bytes depend only on the inputs.
    """
    nodes = _as_nodes(nodes)
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    margin = 0.02 * span
    x0, y0 = lo - margin
    w, h = span + 2 * margin
    stroke = 0.002 * float(np.hypot(w, h))
    # flip vertically inside the box so y grows upward in the image
    ysum = (lo[1] - margin[1]) + (hi[1] + margin[1])

    fills = None
    if values is not None:
        values = np.asarray(values, dtype=float)
        if len(values) != len(nodes):
            raise ValueError("need one value per vertex")
        per_elem = np.array([values[np.asarray(c)].mean() for c in elements])
        vmin, vmax = float(per_elem.min()), float(per_elem.max())
        den = vmax - vmin if vmax > vmin else 1.0
        fills = [(v - vmin) / den for v in per_elem]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">',
        f'<g stroke="#000000" stroke-width="{_fmt(stroke)}" stroke-linejoin="round">',
    ]
    for i, cycle in enumerate(elements):
        pts = " ".join(f"{_fmt(nodes[v, 0])},{_fmt(ysum - nodes[v, 1])}" for v in cycle)
        fill = _ramp(fills[i]) if fills is not None else "none"
        out.append(f'<polygon points="{pts}" fill="{fill}"/>')
    out += ["</g>", "</svg>"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
