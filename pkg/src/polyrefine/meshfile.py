"""Reading and writing the native structured-text mesh format.

A mesh file looks like::

    polymesh 1
    nodes 4
    0.0 0.0
    1.0 0.0
    1.0 1.0
    0.0 1.0
    elements 1
    0 1 2 3

Indices are 0-based and coordinates are written with shortest round-trip
precision, so ``load_mesh(save_mesh(...))`` reproduces the mesh exactly.
"""

from __future__ import annotations

import numpy as np

from .mesh_core import MeshError, ValidationReport, validate_mesh

FORMAT_NAME = "polymesh"
FORMAT_VERSION = 1


class MeshParseError(MeshError):
    """The file is not a well-formed mesh document."""


class MeshValidationError(MeshError):
    """The file parsed but describes an invalid mesh."""

    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


def read_mesh_file(path):
    """Parse a mesh file without validating the mesh it describes."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    pos = 0

    def take(expect: str):
        nonlocal pos
        if pos >= len(lines):
            raise MeshParseError(f"unexpected end of file, expected '{expect}'")
        parts = lines[pos].split()
        pos += 1
        if parts[0] != expect:
            raise MeshParseError(f"line {pos}: expected '{expect}', got '{parts[0]}'")
        return parts[1:]

    head = take(FORMAT_NAME)
    if len(head) != 1 or head[0] != str(FORMAT_VERSION):
        raise MeshParseError(f"unsupported format version {head}")
    (n,) = take("nodes")
    try:
        n = int(n)
        nodes = np.empty((n, 2))
        for i in range(n):
            x, y = lines[pos].split()
            nodes[i] = float(x), float(y)
            pos += 1
        (nt,) = take("elements")
        nt = int(nt)
        elements = []
        for _ in range(nt):
            elements.append([int(v) for v in lines[pos].split()])
            pos += 1
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"line {pos + 1}: {exc}") from exc
    if pos != len(lines):
        raise MeshParseError(f"trailing content at line {pos + 1}")
    return nodes, elements


def load_mesh(path):
    """Load and validate a mesh; raises ``MeshValidationError`` on violations."""
    nodes, elements = read_mesh_file(path)
    report = validate_mesh(nodes, elements)
    if not report.ok:
        raise MeshValidationError(report)
    return nodes, elements


def save_mesh(nodes, elements, path) -> None:
    """Write a mesh with full (round-trip) coordinate precision."""
    nodes = np.asarray(nodes, dtype=float)
    out = [f"{FORMAT_NAME} {FORMAT_VERSION}", f"nodes {len(nodes)}"]
    out += [f"{float(x)!r} {float(y)!r}" for x, y in nodes]
    out.append(f"elements {len(elements)}")
    out += [" ".join(str(int(v)) for v in cycle) for cycle in elements]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def save_field(values, path) -> None:
    """Write one scalar per line with round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(f"{float(v)!r}" for v in np.asarray(values).ravel()) + "\n")


def load_field(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return np.array([float(ln) for ln in fh if ln.strip()])
        except ValueError as exc:
            raise MeshParseError(f"bad field file {path}: {exc}") from exc
