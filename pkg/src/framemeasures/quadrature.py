"""Composite Gauss-Legendre panel rules on interval unions.

Panels are sized from the maximum oscillation frequency of the intended
integrand (periods of ``exp(2*pi*i*freq*x)`` per panel are capped), and
every supplied breakpoint becomes a panel boundary so piecewise-smooth
integrands are smooth on each panel.  Error control elsewhere in the
package works by evaluating a rule at ``q`` and ``q/2`` points per panel
and taking the difference as the error estimate.

Rules keep their panel structure (groups of equal-width panels sharing
one Gauss-Legendre stencil): oscillatory kernels over such grids factor
into a per-panel phase times a per-stencil phase, which cuts the number
of transcendental evaluations by the stencil size.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Periods of the fastest oscillation allowed per panel.  64-point
# Gauss-Legendre integrates 16 periods to ~1e-50 relative, so panel
# counts stay near 4 nodes per period while the half-order pass still
# resolves the integrand well enough to act as an error estimate.
PERIODS_PER_PANEL = 16.0


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return x, w


@dataclass(frozen=True)
class PanelGroup:
    """Equal-width panels sharing one Gauss-Legendre stencil.

    Flattened nodes are ``mid[p] + half * gl_node[g]`` in panel-major
    order; ``half == 0`` with one node marks plain point masses.
    """

    mids: np.ndarray
    half: float
    order: int

    def nodes(self) -> np.ndarray:
        if self.half == 0.0:
            return self.mids
        xs, _ = gauss_legendre(self.order)
        return (self.mids[:, None] + self.half * xs[None, :]).ravel()

    def __len__(self) -> int:
        return len(self.mids) * (1 if self.half == 0.0 else self.order)


def atom_group(points: np.ndarray) -> PanelGroup:
    return PanelGroup(np.asarray(points, dtype=float), 0.0, 1)


def split_panels(
    intervals,
    breakpoints=(),
    max_freq: float = 0.0,
    max_panel: float = np.inf,
) -> list[tuple[float, float]]:
    """Split an interval union into panels honoring breakpoints and oscillation."""
    cuts = sorted(float(b) for b in breakpoints)
    panel_cap = max_panel
    if max_freq > 0:
        panel_cap = min(panel_cap, PERIODS_PER_PANEL / max_freq)
    panels = []
    for a, b in intervals:
        edges = [a] + [c for c in cuts if a < c < b] + [b]
        for lo, hi in zip(edges[:-1], edges[1:]):
            if panel_cap < np.inf and hi - lo > panel_cap:
                n = int(np.ceil((hi - lo) / panel_cap))
            else:
                n = 1
            step = (hi - lo) / n
            panels.extend((lo + j * step, lo + (j + 1) * step) for j in range(n))
    return panels


def panel_groups(
    intervals,
    q: int,
    breakpoints=(),
    max_freq: float = 0.0,
    max_panel: float = np.inf,
) -> list[PanelGroup]:
    """Panels grouped by width, each carrying the shared stencil order."""
    panels = split_panels(intervals, breakpoints, max_freq, max_panel)
    by_width: dict[float, list[float]] = {}
    for lo, hi in panels:
        half = 0.5 * (hi - lo)
        by_width.setdefault(half, []).append(0.5 * (lo + hi))
    return [
        PanelGroup(np.asarray(mids), half, int(q)) for half, mids in by_width.items()
    ]


def groups_flatten(groups) -> tuple[np.ndarray, np.ndarray]:
    """Flat (nodes, weights) for quadrature groups, in group-major order.

    Point-mass groups get unit weights (callers own their weighting).
    """
    nodes, weights = [], []
    for g in groups:
        nodes.append(g.nodes())
        if g.half == 0.0:
            weights.append(np.ones(len(g.mids)))
        else:
            _, ws = gauss_legendre(g.order)
            weights.append(np.tile(g.half * ws, len(g.mids)))
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def panel_rule(
    intervals,
    q: int,
    breakpoints=(),
    max_freq: float = 0.0,
    max_panel: float = np.inf,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule; flat arrays (nodes, weights)."""
    return groups_flatten(panel_groups(intervals, q, breakpoints, max_freq, max_panel))
