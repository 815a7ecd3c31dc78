"""Fourier transforms of measure expressions with error control.

``ft_measure`` evaluates ``mu_hat(t) = integral of exp(-2*pi*i*t*x) dmu``
node by node: atomic sums are exact, interval and density nodes use
composite Gauss-Legendre quadrature with oscillation-aware panels and a
refinement-difference error estimate, IFS leaves use the truncated
transfer-factor product with a certified geometric tail bound, and
convolutions multiply child transforms.  ``ft_weighted`` folds a test
function into the integrand; nodes with no pointwise density (IFS
leaves, irreducible restrictions) are then evaluated through atomic
realization, with the realization charged to the error estimate, and
convolutions combine one side's nodes with the other's (a Fubini
product rule; an already-atomic side acts as the realization the
weighted transform needs).

Grid variants evaluate whole frequency grids at once.  Grids that carry
panel structure use a factorized oscillatory kernel (per-panel phase
times per-stencil phase), which keeps the transcendental count near the
panel count instead of the node count.  Results are independent of
evaluation order and chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import TransformError
from .measures import (
    Atomic,
    Convolve,
    Density,
    IfsInvariant,
    LebesgueOnSet,
    MeasureExpr,
    Normalize,
    Restrict,
    Scale,
    Sum,
    Translate,
    mass_with_error,
    realize_atomic,
    simplify_restrict,
)
from .quadrature import PanelGroup, atom_group, gauss_legendre, groups_flatten, panel_groups

_TWO_PI = 2.0 * np.pi
_CHUNK = 2**21  # kernel entries per chunk
_EPS = np.finfo(float).eps
_MAX_GROUPS = 4096


@dataclass(frozen=True)
class TransformRequest:
    """Evaluation parameters for a transform.

    ``t`` is the frequency; ``ifs_depth`` truncates the transfer-factor
    product; ``quad_points`` is the Gauss-Legendre order per panel
    (halved for the error-estimate pass, doubled while the estimate
    exceeds ``error_budget``); realization parameters govern nodes that
    are evaluated through atomic realization.
    """

    t: float = 0.0
    ifs_depth: int = 32
    quad_points: int = 64
    error_budget: float = 1e-9
    realize_depth: int = 12
    realize_resolution: float = 2.0**-10
    atom_cap: int = 2**20
    max_refinements: int = 2

    def __post_init__(self):
        if self.ifs_depth < 1:
            raise TransformError("ifs_depth must be >= 1")
        if self.quad_points < 2:
            raise TransformError("quad_points must be >= 2")


@dataclass(frozen=True)
class ComplexValueWithError:
    value: complex
    abs_error_bound: float

    def __post_init__(self):
        if not math.isfinite(self.abs_error_bound):
            raise TransformError("error bound must be finite")


def ifs_mask(digits, weights, t):
    """One-step transfer factor ``sum_a rho_a exp(-2*pi*i*a*t)``; |.| <= 1."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(digits, dtype=float)
    w = np.asarray(weights, dtype=float)
    return np.exp(-2j * np.pi * t[..., None] * d) @ w.astype(complex)


def ifs_transform_grid(mu: IfsInvariant, ts, depth: int):
    """Truncated product ``prod_{k<=K} mask(t / R^k)`` with certified tail.

    The product is accumulated from the deepest factor outward so that
    evaluations at ``t`` and ``t/R`` share every rounding step; the tail
    bound is ``2*pi*hull_radius*|t|*R**-K / (1 - 1/R)`` plus a roundoff
    allowance.
    """
    ts = np.asarray(ts, dtype=float)
    acc = np.ones(ts.shape, dtype=complex)
    for k in range(depth, 0, -1):
        acc = ifs_mask(mu.digits, mu.weights, ts / float(mu.scale**k)) * acc
    r = mu.scale
    tail = (
        _TWO_PI * mu.hull_radius() * np.abs(ts) * float(r) ** -depth / (1.0 - 1.0 / r)
    )
    return acc, tail + 4.0 * _EPS * depth


# ---------------------------------------------------------------------------
# quadrature plans
# ---------------------------------------------------------------------------
@dataclass
class _Grid:
    """Nodes, weights, and (when known) the panel structure of the nodes."""

    points: np.ndarray
    weights: np.ndarray
    groups: Optional[list[PanelGroup]]

    @staticmethod
    def from_atoms(points, weights):
        points = np.asarray(points, dtype=float)
        return _Grid(points, np.asarray(weights, dtype=float), [atom_group(points)])

    @staticmethod
    def from_lebesgue(region, q, breaks, freq):
        groups = panel_groups(region, q, breaks, freq, max_panel=16.0)
        points, weights = groups_flatten(groups)
        return _Grid(points, weights, groups)

    def reweight(self, fn: Callable[[np.ndarray], np.ndarray]) -> "_Grid":
        return _Grid(self.points, self.weights * fn(self.points), self.groups)

    def scaled(self, alpha: float) -> "_Grid":
        return _Grid(self.points, self.weights * alpha, self.groups)

    def shifted(self, s: float) -> "_Grid":
        groups = None
        if self.groups is not None:
            groups = [PanelGroup(g.mids + s, g.half, g.order) for g in self.groups]
        return _Grid(self.points + s, self.weights, groups)

    def concat(self, other: "_Grid") -> "_Grid":
        groups = None
        if self.groups is not None and other.groups is not None:
            groups = self.groups + other.groups
        return _Grid(
            np.concatenate([self.points, other.points]),
            np.concatenate([self.weights, other.weights]),
            groups,
        )

    def convolve(self, other: "_Grid", cap: int) -> "_Grid":
        n = len(self.points) * len(other.points)
        if n > cap * 16:
            raise TransformError(
                f"convolution plan needs {n} combined nodes, work cap is {cap * 16}"
            )
        groups = None
        if (
            other.groups is not None
            and self.groups is not None
            and _is_atomlike(other.groups)
            and len(other.points) * len(self.groups) <= _MAX_GROUPS
        ):
            # other-major flattening: for each point mass, all of self's nodes
            pts = (other.points[:, None] + self.points[None, :]).ravel()
            wts = (other.weights[:, None] * self.weights[None, :]).ravel()
            groups = [
                PanelGroup(g.mids + r, g.half, g.order)
                for r in other.points
                for g in self.groups
            ]
            return _Grid(pts, wts, groups)
        if (
            self.groups is not None
            and other.groups is not None
            and _is_atomlike(self.groups)
            and len(self.points) * len(other.groups) <= _MAX_GROUPS
        ):
            pts = (self.points[:, None] + other.points[None, :]).ravel()
            wts = (self.weights[:, None] * other.weights[None, :]).ravel()
            groups = [
                PanelGroup(g.mids + r, g.half, g.order)
                for r in self.points
                for g in other.groups
            ]
            return _Grid(pts, wts, groups)
        pts = (self.points[:, None] + other.points[None, :]).ravel()
        wts = (self.weights[:, None] * other.weights[None, :]).ravel()
        return _Grid(pts, wts, None)


def _is_atomlike(groups) -> bool:
    return all(g.half == 0.0 for g in groups)


@dataclass
class QuadPlan:
    """Discretization of a 1-d measure for integrating oscillatory functions.

    ``integral h dmu ~= sum(weights * h(points))``; the coarse grid uses
    half the Gauss-Legendre order and coarser realizations, and the
    difference between the two evaluations estimates the error.  ``exact``
    marks purely atomic plans (the two grids coincide and the error is
    zero).
    """

    fine: _Grid
    coarse: _Grid
    exact: bool
    has_realization: bool
    notes: tuple[str, ...] = ()

    @property
    def points(self):
        return self.fine.points

    @property
    def weights(self):
        return self.fine.weights

    @property
    def coarse_points(self):
        return self.coarse.points

    @property
    def coarse_weights(self):
        return self.coarse.weights


def plan_measure(
    mu: MeasureExpr,
    req: TransformRequest,
    max_freq: float,
    breakpoints=(),
    q: int | None = None,
) -> QuadPlan:
    """Build a quadrature plan for integrands oscillating at <= max_freq."""
    q = int(q or req.quad_points)
    return _plan(mu, req, float(max_freq), tuple(breakpoints), q)


def _plan(mu, req, freq, breaks, q) -> QuadPlan:
    if isinstance(mu, Atomic):
        g = _Grid.from_atoms(mu.scalar_points(), mu.weights_array())
        return QuadPlan(g, g, True, False)
    if isinstance(mu, LebesgueOnSet):
        return QuadPlan(
            _Grid.from_lebesgue(mu.region, q, breaks, freq),
            _Grid.from_lebesgue(mu.region, max(2, q // 2), breaks, freq),
            False,
            False,
        )
    if isinstance(mu, Density):
        sub = _plan(
            mu.base, req, freq + mu.phi.osc_hint, breaks + tuple(mu.phi.breakpoints), q
        )
        return QuadPlan(
            sub.fine.reweight(mu.phi),
            sub.coarse.reweight(mu.phi),
            sub.exact,
            sub.has_realization,
            sub.notes,
        )
    if isinstance(mu, Restrict):
        inner = simplify_restrict(mu.region, mu.base)
        if isinstance(inner, Restrict):
            return _plan_realized(mu, req, note="restricted convolution realized")
        return _plan(inner, req, freq, breaks, q)
    if isinstance(mu, IfsInvariant):
        return _plan_realized(mu, req, note="ifs leaf realized")
    if isinstance(mu, Scale):
        sub = _plan(mu.base, req, freq, breaks, q)
        return QuadPlan(
            sub.fine.scaled(mu.alpha),
            sub.coarse.scaled(mu.alpha),
            sub.exact,
            sub.has_realization,
            sub.notes,
        )
    if isinstance(mu, Sum):
        l = _plan(mu.left, req, freq, breaks, q)
        r = _plan(mu.right, req, freq, breaks, q)
        return QuadPlan(
            l.fine.concat(r.fine),
            l.coarse.concat(r.coarse),
            l.exact and r.exact,
            l.has_realization or r.has_realization,
            l.notes + r.notes,
        )
    if isinstance(mu, Translate):
        if len(mu.shift) != 1:
            raise TransformError("grid transforms require 1-d measures")
        s = mu.shift[0]
        sub = _plan(mu.base, req, freq, tuple(b - s for b in breaks), q)
        return QuadPlan(
            sub.fine.shifted(s),
            sub.coarse.shifted(s),
            sub.exact,
            sub.has_realization,
            sub.notes,
        )
    if isinstance(mu, Normalize):
        m, _ = mass_with_error(
            mu.base, depth=req.realize_depth, resolution=req.realize_resolution
        )
        sub = _plan(mu.base, req, freq, breaks, q)
        return QuadPlan(
            sub.fine.scaled(1.0 / m),
            sub.coarse.scaled(1.0 / m),
            sub.exact,
            sub.has_realization,
            sub.notes,
        )
    if isinstance(mu, Convolve):
        l = _plan(mu.left, req, freq, breaks, q)
        r = _plan(mu.right, req, freq, (), q)
        return QuadPlan(
            l.fine.convolve(r.fine, req.atom_cap),
            l.coarse.convolve(r.coarse, req.atom_cap),
            l.exact and r.exact,
            l.has_realization or r.has_realization,
            l.notes + r.notes,
        )
    raise TransformError(f"cannot build a quadrature plan for {type(mu).__name__}")


def _plan_realized(mu, req, note) -> QuadPlan:
    fine = realize_atomic(
        mu,
        depth=req.realize_depth,
        resolution=req.realize_resolution,
        atom_cap=req.atom_cap,
    )
    coarse = realize_atomic(
        mu,
        depth=max(1, req.realize_depth - 2),
        resolution=req.realize_resolution * 4,
        atom_cap=req.atom_cap,
    )
    return QuadPlan(
        _Grid.from_atoms(fine.scalar_points(), fine.weights_array()),
        _Grid.from_atoms(coarse.scalar_points(), coarse.weights_array()),
        False,
        True,
        (note,),
    )


# ---------------------------------------------------------------------------
# oscillatory kernels
# ---------------------------------------------------------------------------
def oscillatory_sums(ts, points, amplitudes, t_groups=None):
    """``out[i, j] = sum_k amplitudes[i, k] * exp(-2*pi*i*ts[j]*points[k])``.

    When ``t_groups`` describes the panel structure of ``ts`` (flattened
    group-major), the kernel factors into per-panel and per-stencil
    phases; otherwise it is evaluated densely in chunks.  Either path
    gives the same result up to the usual floating-point rounding of a
    fixed operation order.
    """
    ts = np.asarray(ts, dtype=float)
    points = np.asarray(points, dtype=float)
    amplitudes = np.atleast_2d(np.asarray(amplitudes, dtype=complex))
    nt, nx = len(ts), len(points)
    out = np.empty((amplitudes.shape[0], nt), dtype=complex)
    if nx == 0:
        out[:] = 0.0
        return out
    if t_groups is not None and sum(len(g) for g in t_groups) == nt:
        offset = 0
        for g in t_groups:
            block = _group_sums(g, points, amplitudes)
            out[:, offset : offset + block.shape[1]] = block
            offset += block.shape[1]
        return out
    step = max(1, _CHUNK // nx)
    for s in range(0, nt, step):
        sl = slice(s, min(s + step, nt))
        kernel = np.exp(-2j * np.pi * np.multiply.outer(ts[sl], points))
        out[:, sl] = amplitudes @ kernel.T
    return out


def _group_sums(g: PanelGroup, points, amplitudes):
    """Factorized sums over one panel group."""
    namp = amplitudes.shape[0]
    nx = len(points)
    n_pan = len(g.mids)
    res = np.empty((namp, len(g)), dtype=complex)
    if g.half == 0.0:
        chunk = max(1, _CHUNK // max(nx, 1))
        for s in range(0, n_pan, chunk):
            sl = slice(s, min(s + chunk, n_pan))
            e_mid = np.exp(-2j * np.pi * np.multiply.outer(g.mids[sl], points))
            res[:, sl] = amplitudes @ e_mid.T
        return res
    xs, _ = gauss_legendre(g.order)
    e_gl_t = np.exp(-2j * np.pi * np.multiply.outer(points, g.half * xs))
    chunk = max(1, _CHUNK // max(namp * nx, 1))
    for s in range(0, n_pan, chunk):
        sl = slice(s, min(s + chunk, n_pan))
        e_mid = np.exp(-2j * np.pi * np.multiply.outer(g.mids[sl], points))
        # out[p, i, g] = sum_x amp[i, x] e_mid[p, x] e_gl[g, x]: batched GEMM
        tmp = e_mid[:, None, :] * amplitudes[None, :, :]
        block = np.matmul(tmp, e_gl_t)
        cols = slice(s * g.order, (s + (sl.stop - sl.start)) * g.order)
        res[:, cols] = np.swapaxes(block, 0, 1).reshape(namp, -1)
    return res


def _grid_eval(plan: QuadPlan, ts, values_at=None, t_groups=None):
    """Evaluate the plan against ``exp(-2 pi i t x)`` (times optional values)."""
    amp_f = (
        plan.weights if values_at is None else plan.weights * values_at(plan.points)
    )
    vals = oscillatory_sums(ts, plan.points, amp_f[None, :], t_groups)[0]
    if plan.exact:
        return vals, np.zeros(len(np.atleast_1d(ts)))
    amp_c = (
        plan.coarse_weights
        if values_at is None
        else plan.coarse_weights * values_at(plan.coarse_points)
    )
    coarse = oscillatory_sums(ts, plan.coarse_points, amp_c[None, :], t_groups)[0]
    return vals, np.abs(vals - coarse)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------
def ft_measure_grid(mu: MeasureExpr, ts, req: TransformRequest | None = None):
    """``mu_hat`` on a frequency grid; returns (values, error bounds)."""
    req = req or TransformRequest()
    ts = np.asarray(ts, dtype=float)
    if isinstance(mu, Atomic):
        if mu.dim != 1:
            raise TransformError("grid transforms require 1-d measures")
        vals = oscillatory_sums(ts, mu.scalar_points(), mu.weights_array()[None, :])[0]
        return vals, np.zeros(ts.shape)
    if isinstance(mu, IfsInvariant):
        return ifs_transform_grid(mu, ts, req.ifs_depth)
    if isinstance(mu, Convolve):
        lv, le = ft_measure_grid(mu.left, ts, req)
        rv, re_ = ft_measure_grid(mu.right, ts, req)
        return lv * rv, np.abs(lv) * re_ + np.abs(rv) * le + le * re_
    if isinstance(mu, Translate):
        if len(mu.shift) != 1:
            raise TransformError("grid transforms require 1-d measures")
        v, e = ft_measure_grid(mu.base, ts, req)
        return np.exp(-2j * np.pi * ts * mu.shift[0]) * v, e
    if isinstance(mu, Scale):
        v, e = ft_measure_grid(mu.base, ts, req)
        return mu.alpha * v, mu.alpha * e
    if isinstance(mu, Sum):
        lv, le = ft_measure_grid(mu.left, ts, req)
        rv, re_ = ft_measure_grid(mu.right, ts, req)
        return lv + rv, le + re_
    if isinstance(mu, Normalize):
        m, me = mass_with_error(
            mu.base, depth=req.realize_depth, resolution=req.realize_resolution
        )
        v, e = ft_measure_grid(mu.base, ts, req)
        return v / m, (e + np.abs(v) * me / m) / m
    if isinstance(mu, Restrict):
        inner = simplify_restrict(mu.region, mu.base)
        if not isinstance(inner, Restrict):
            return ft_measure_grid(inner, ts, req)
    if isinstance(mu, (LebesgueOnSet, Density, Restrict)):
        return _quad_transform_grid(None, mu, ts, req)
    raise TransformError(f"not a measure expression: {mu!r}")


def _quad_transform_grid(f, mu, ts, req, t_groups=None):
    """Quadrature/realization path, with node doubling until the budget."""
    tmax = float(np.max(np.abs(ts))) if len(ts) else 0.0
    fmax = getattr(f, "max_frequency", 0.0) if f is not None else 0.0
    breaks = tuple(getattr(f, "breakpoints", ())) if f is not None else ()
    values_at = (lambda x: f.evaluate(x)) if f is not None else None
    q = req.quad_points
    for _ in range(req.max_refinements + 1):
        plan = plan_measure(mu, req, tmax + fmax, breaks, q=q)
        vals, errs = _grid_eval(plan, ts, values_at, t_groups)
        if plan.exact or plan.has_realization or errs.max(initial=0.0) <= req.error_budget:
            break
        q *= 2
    return vals, errs


def ft_weighted_grid(f, mu: MeasureExpr, ts, req: TransformRequest | None = None):
    """Weighted transform ``integral f(x) exp(-2 pi i t x) dmu(x)`` on a grid.

    ``f`` must expose ``evaluate(x)`` (vectorized), ``max_frequency`` and
    ``breakpoints``; ``f=None`` means the constant 1.
    """
    req = req or TransformRequest()
    ts = np.asarray(ts, dtype=float)
    if f is None:
        return ft_measure_grid(mu, ts, req)
    return _quad_transform_grid(f, mu, ts, req)


def ft_weighted_family_grid(
    fs, mu: MeasureExpr, ts, req: TransformRequest | None = None, t_groups=None
):
    """Weighted transforms for a family sharing one plan and one kernel.

    Returns (values, errors) of shape (len(fs), len(ts)).
    """
    req = req or TransformRequest()
    ts = np.asarray(ts, dtype=float)
    tmax = float(np.max(np.abs(ts))) if len(ts) else 0.0
    fmax = max((f.max_frequency for f in fs), default=0.0)
    breaks = tuple(b for f in fs for b in f.breakpoints)
    plan = plan_measure(mu, req, tmax + fmax, breaks)
    amp_f = np.stack([plan.weights * f.evaluate(plan.points) for f in fs])
    vals = oscillatory_sums(ts, plan.points, amp_f, t_groups)
    if plan.exact:
        return vals, np.zeros_like(vals, dtype=float)
    amp_c = np.stack([plan.coarse_weights * f.evaluate(plan.coarse_points) for f in fs])
    coarse = oscillatory_sums(ts, plan.coarse_points, amp_c, t_groups)
    return vals, np.abs(vals - coarse)


def ft_measure(mu: MeasureExpr, req: TransformRequest) -> ComplexValueWithError:
    """Fourier transform of the measure at the request's frequency."""
    if isinstance(mu, Atomic) and mu.dim > 1:
        t = np.asarray(req.t, dtype=float).reshape(-1)
        if len(t) != mu.dim:
            raise TransformError(f"frequency must be a vector of dimension {mu.dim}")
        phases = mu.points_matrix() @ t
        val = complex(np.exp(-2j * np.pi * phases) @ mu.weights_array())
        return ComplexValueWithError(val, 0.0)
    vals, errs = ft_measure_grid(mu, [float(req.t)], req)
    return ComplexValueWithError(complex(vals[0]), float(errs[0]))


def ft_weighted(f, mu: MeasureExpr, req: TransformRequest) -> ComplexValueWithError:
    """Weighted transform at the request's frequency (``f=None`` for 1)."""
    if f is None:
        return ft_measure(mu, req)
    if isinstance(mu, Atomic) and mu.dim == 1:
        x = mu.scalar_points()
        w = mu.weights_array()
        val = complex(np.sum(w * f.evaluate(x) * np.exp(-2j * np.pi * float(req.t) * x)))
        return ComplexValueWithError(val, 0.0)
    vals, errs = ft_weighted_grid(f, mu, [float(req.t)], req)
    return ComplexValueWithError(complex(vals[0]), float(errs[0]))


def transform_rows(mu: MeasureExpr, ts, req: TransformRequest | None = None):
    """(t, Re, Im, err) rows over a frequency grid, for reporting."""
    vals, errs = ft_measure_grid(mu, ts, req)
    return [
        (float(t), float(v.real), float(v.imag), float(e))
        for t, v, e in zip(np.asarray(ts, dtype=float), vals, errs)
    ]


# ---------------------------------------------------------------------------
# decay bounds (for truncation-tail certificates)
# ---------------------------------------------------------------------------
def density_sup_tv(mu: MeasureExpr):
    """(sup, total-variation) bounds for the Lebesgue density of ``mu``.

    Returns None when the measure has no bounded-variation density
    (atomic or IFS parts), in which case transform decay is unavailable.
    """
    if isinstance(mu, LebesgueOnSet):
        return 1.0, 2.0 * max(len(mu.region.intervals), 1)
    if isinstance(mu, Density):
        base = density_sup_tv(mu.base)
        tv_phi = _density_tv(mu.phi)
        if base is None or tv_phi is None:
            return None
        bs, bt = base
        return mu.phi.upper * bs, tv_phi * bs + mu.phi.upper * bt
    if isinstance(mu, Restrict):
        inner = simplify_restrict(mu.region, mu.base)
        if isinstance(inner, Restrict):
            base = density_sup_tv(inner.base)
            if base is None:
                return None
            bs, bt = base
            return bs, bt + 2.0 * len(inner.region.intervals) * bs
        return density_sup_tv(inner)
    if isinstance(mu, Scale):
        base = density_sup_tv(mu.base)
        if base is None:
            return None
        return mu.alpha * base[0], mu.alpha * base[1]
    if isinstance(mu, Sum):
        l, r = density_sup_tv(mu.left), density_sup_tv(mu.right)
        if l is None or r is None:
            return None
        return l[0] + r[0], l[1] + r[1]
    if isinstance(mu, Translate):
        return density_sup_tv(mu.base)
    if isinstance(mu, Normalize):
        base = density_sup_tv(mu.base)
        if base is None:
            return None
        m = mass_with_error(mu.base)[0]
        return base[0] / m, base[1] / m
    if isinstance(mu, Convolve):
        l, r = density_sup_tv(mu.left), density_sup_tv(mu.right)
        ml = mass_with_error(mu.left)[0]
        mr = mass_with_error(mu.right)[0]
        candidates = []
        if l is not None:
            candidates.append((l[0] * mr, l[1] * mr))
        if r is not None:
            candidates.append((r[0] * ml, r[1] * ml))
        if not candidates:
            return None
        return min(candidates, key=lambda c: c[1])
    return None


def _density_tv(phi):
    """Interior total-variation bound of a bounded density, or None."""
    if phi.form == "piecewise-constant" and phi.payload:
        vals = phi.payload[-1]
        if np.isscalar(vals):
            return 0.0
        vs = np.asarray(vals, dtype=float)
        return float(np.abs(np.diff(vs)).sum()) if vs.size > 1 else 0.0
    if phi.form == "piecewise-polynomial" and phi.payload:
        total = 0.0
        for (a, b), coeffs in phi.payload[0]:
            der = np.polynomial.polynomial.polyder(np.asarray(coeffs, dtype=float))
            x = np.linspace(a, b, 512)
            total += float(
                np.trapezoid(np.abs(np.polynomial.polynomial.polyval(x, der)), x)
            )
        return total * 1.01 + 1e-12
    return None
