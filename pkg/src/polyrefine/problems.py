"""Manufactured Poisson problems used by the demos, tests and the CLI."""

from __future__ import annotations

import numpy as np


def gaussian_peak_problem(center=(0.5, 0.117), decay: float = 1000.0):
    """Dirichlet problem on the unit square with a sharp interior peak.

    The exact solution is ``x y (1-x) (1-y) exp(-decay ((x-cx)^2 + (y-cy)^2))``,
    which vanishes on the boundary.  Returns ``(u, f)`` where ``f = -laplace(u)``;
    both accept coordinate arrays.
    """
    cx, cy = float(center[0]), float(center[1])
    k = float(decay)

    def u(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        return x * y * (1.0 - x) * (1.0 - y) * np.exp(-k * r2)

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        P = x - x * x
        Q = y - y * y
        dP = 1.0 - 2.0 * x
        dQ = 1.0 - 2.0 * y
        dx = x - cx
        dy = y - cy
        E = np.exp(-k * (dx * dx + dy * dy))
        uxx = Q * (-2.0 - 4.0 * k * dP * dx + P * (4.0 * k * k * dx * dx - 2.0 * k))
        uyy = P * (-2.0 - 4.0 * k * dQ * dy + Q * (4.0 * k * k * dy * dy - 2.0 * k))
        return -E * (uxx + uyy)

    return u, f
