"""Measure expression trees.

A Borel measure on R^d is described by an immutable algebraic tree.
Leaves are Lebesgue measure restricted to a finite interval union,
finite atomic measures, and invariant measures of affine iterated
function systems ``x -> (x + a) / R``.  Combinators reweight (density),
restrict, scale, add, convolve, translate, and normalize.  Continuous
leaves (intervals, densities, IFS attractors) are one-dimensional;
atomic measures may live in any dimension.

Every expression has finite total mass by construction: interval unions
have finite length, atomic measures finitely many atoms, and invariant
measures are probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EnvelopeViolationError, InvalidMeasureError, RealizationTooLargeError
from .intervals import IntervalUnion, as_interval_union
from .quadrature import panel_rule

DEFAULT_ATOM_CAP = 2**20
DEFAULT_IFS_DEPTH = 12
DEFAULT_RESOLUTION = 2.0**-10
WEIGHT_SUM_TOL = 1e-12

# Work allowance for pairwise convolution of realizations, relative to the
# atom cap; pairs are merged on exact coincidence before the cap applies.
_CONVOLVE_WORK_FACTOR = 16


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BoundedDensity:
    """A pointwise-evaluable density with a certified envelope.

    ``fn`` must be vectorized over numpy arrays and return positive reals
    with ``lower <= fn(x) <= upper`` on ``domain`` (``domain=None`` means
    all of R).  The envelope is spot-checked on a dense grid at
    construction; a violation raises :class:`EnvelopeViolationError`.

    ``breakpoints`` mark discontinuities or kinks so quadrature panels can
    be aligned with them; ``osc_hint`` bounds the oscillation frequency of
    the density (0 for piecewise-polynomial forms); ``label`` names a
    reconstructible closed form for serialization.
    """

    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    domain: Optional[IntervalUnion] = None
    lower: float = 1.0
    upper: float = 1.0
    form: str = "closed-form-with-stated-envelope"
    breakpoints: tuple[float, ...] = ()
    osc_hint: float = 0.0
    label: Optional[str] = None
    payload: tuple = field(default=(), repr=False)
    check_grid: int = field(default=10_000, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper < math.inf):
            raise InvalidMeasureError(
                f"density envelope must satisfy 0 < lower <= upper < inf, "
                f"got [{self.lower}, {self.upper}]"
            )
        self._spot_check()

    def _spot_check(self):
        if self.domain is not None:
            if self.domain.is_empty:
                raise InvalidMeasureError("density domain is empty")
            pieces = self.domain.intervals
        else:
            pieces = ((-64.0, 64.0),)
        total = sum(b - a for a, b in pieces)
        slack = 1e-9 * max(1.0, self.upper)
        for a, b in pieces:
            n = max(16, int(self.check_grid * (b - a) / total))
            x = np.linspace(a, b, n)
            vals = np.asarray(self.fn(x), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise EnvelopeViolationError("density produced non-finite values")
            if vals.min() < self.lower - slack or vals.max() > self.upper + slack:
                raise EnvelopeViolationError(
                    f"density strayed outside envelope [{self.lower}, {self.upper}]: "
                    f"observed [{vals.min()}, {vals.max()}] on [{a}, {b}]"
                )

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


def piecewise_constant_density(breakpoints, values) -> BoundedDensity:
    """Density taking ``values[i]`` on ``[breakpoints[i], breakpoints[i+1]]``."""
    bp = tuple(float(b) for b in breakpoints)
    vals = tuple(float(v) for v in values)
    if len(bp) != len(vals) + 1 or len(vals) == 0:
        raise InvalidMeasureError("need len(breakpoints) == len(values) + 1 >= 2")
    if any(b2 <= b1 for b1, b2 in zip(bp[:-1], bp[1:])):
        raise InvalidMeasureError("breakpoints must be strictly increasing")
    arr = np.asarray(vals)

    def fn(x, _bp=np.asarray(bp), _v=arr):
        idx = np.clip(np.searchsorted(_bp, x, side="right") - 1, 0, len(_v) - 1)
        return _v[idx]

    return BoundedDensity(
        fn=fn,
        domain=IntervalUnion(((bp[0], bp[-1]),)),
        lower=float(arr.min()),
        upper=float(arr.max()),
        form="piecewise-constant",
        breakpoints=bp[1:-1],
        payload=(bp, vals),
    )


def piecewise_polynomial_density(pieces, lower, upper) -> BoundedDensity:
    """Density given by polynomial coefficients (lowest order first) per piece."""
    norm = tuple(
        ((float(a), float(b)), tuple(float(c) for c in coeffs))
        for (a, b), coeffs in pieces
    )
    if not norm:
        raise InvalidMeasureError("need at least one polynomial piece")
    edges = tuple(iv for iv, _ in norm)

    def fn(x, _pieces=norm):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        filled = np.zeros(x.shape, dtype=bool)
        for (a, b), coeffs in _pieces:
            m = (x >= a) & (x <= b) & ~filled
            out[m] = np.polynomial.polynomial.polyval(x[m], coeffs)
            filled |= m
        return out

    breaks = sorted({a for (a, _b) in edges} | {b for (_a, b) in edges})
    return BoundedDensity(
        fn=fn,
        domain=IntervalUnion(edges),
        lower=float(lower),
        upper=float(upper),
        form="piecewise-polynomial",
        breakpoints=tuple(breaks[1:-1]),
        payload=(norm,),
    )


def constant_density(value: float, domain=None) -> BoundedDensity:
    v = float(value)
    dom = as_interval_union(domain) if domain is not None else None
    return BoundedDensity(
        fn=lambda x, _v=v: np.full(np.shape(x), _v),
        domain=dom,
        lower=v,
        upper=v,
        form="piecewise-constant",
        payload=(v,),
    )


# ---------------------------------------------------------------------------
# expression nodes
# ---------------------------------------------------------------------------
class MeasureExpr:
    """Base class for measure expression nodes.  Instances are immutable."""

    __slots__ = ()


def _as_point(p) -> tuple[float, ...]:
    if np.isscalar(p):
        return (float(p),)
    return tuple(float(c) for c in p)


@dataclass(frozen=True)
class Atomic(MeasureExpr):
    """Finite sum of weighted Dirac masses."""

    points: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(_as_point(p) for p in self.points))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.points) != len(self.weights):
            raise InvalidMeasureError("points and weights must have equal length")

    @property
    def dim(self) -> int:
        return len(self.points[0]) if self.points else 1

    def points_matrix(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(len(self.points), -1)

    def scalar_points(self) -> np.ndarray:
        if self.dim != 1:
            raise InvalidMeasureError(f"expected 1-d atoms, got dimension {self.dim}")
        return np.asarray([p[0] for p in self.points], dtype=float)

    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def atomic(pairs) -> Atomic:
    """Build an atomic measure from ``[(point, weight), ...]``."""
    pts, wts = [], []
    for p, w in pairs:
        pts.append(_as_point(p))
        wts.append(float(w))
    return Atomic(tuple(pts), tuple(wts))


@dataclass(frozen=True)
class LebesgueOnSet(MeasureExpr):
    """Lebesgue measure restricted to a finite union of closed intervals."""

    region: IntervalUnion

    def __post_init__(self):
        object.__setattr__(self, "region", as_interval_union(self.region))


def lebesgue_on(spec) -> LebesgueOnSet:
    return LebesgueOnSet(as_interval_union(spec))


@dataclass(frozen=True)
class IfsInvariant(MeasureExpr):
    """Invariant probability measure of the maps ``x -> (x + a) / scale``.

    ``digits`` lists the translations ``a`` and ``weights`` the selection
    probabilities.  The attractor is contained in the hull
    ``[min(digits), max(digits)] / (scale - 1)``.
    """

    scale: int
    digits: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "scale", int(self.scale))
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def hull(self) -> tuple[float, float]:
        r = self.scale - 1
        return min(self.digits) / r, max(self.digits) / r

    def hull_radius(self) -> float:
        lo, hi = self.hull()
        return max(abs(lo), abs(hi))


@dataclass(frozen=True)
class Density(MeasureExpr):
    """``phi d(base)`` for a certified bounded density phi."""

    phi: BoundedDensity
    base: MeasureExpr


@dataclass(frozen=True)
class Restrict(MeasureExpr):
    """``chi_E d(base)``."""

    region: IntervalUnion
    base: MeasureExpr

    def __post_init__(self):
        object.__setattr__(self, "region", as_interval_union(self.region))


@dataclass(frozen=True)
class Scale(MeasureExpr):
    """``alpha * base`` for alpha > 0."""

    alpha: float
    base: MeasureExpr

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class Sum(MeasureExpr):
    left: MeasureExpr
    right: MeasureExpr


@dataclass(frozen=True)
class Convolve(MeasureExpr):
    left: MeasureExpr
    right: MeasureExpr


@dataclass(frozen=True)
class Translate(MeasureExpr):
    """``delta_shift * base`` (convolution with a point mass)."""

    shift: tuple[float, ...]
    base: MeasureExpr

    def __post_init__(self):
        object.__setattr__(self, "shift", _as_point(self.shift))


def translate(shift, base) -> Translate:
    return Translate(_as_point(shift), base)


@dataclass(frozen=True)
class Normalize(MeasureExpr):
    """``base / base(R^d)``; requires a finite, strictly positive total mass."""

    base: MeasureExpr


# ---------------------------------------------------------------------------
# dimensions
# ---------------------------------------------------------------------------
def measure_dim(mu: MeasureExpr) -> int:
    if isinstance(mu, Atomic):
        return mu.dim
    if isinstance(mu, (LebesgueOnSet, IfsInvariant)):
        return 1
    if isinstance(mu, Translate):
        return len(mu.shift)
    if isinstance(mu, (Density, Restrict, Scale, Normalize)):
        return measure_dim(mu.base)
    if isinstance(mu, (Sum, Convolve)):
        return measure_dim(mu.left)
    raise TypeError(f"not a measure expression: {mu!r}")


# ---------------------------------------------------------------------------
# restriction pushdown
# ---------------------------------------------------------------------------
def simplify_restrict(region: IntervalUnion, base: MeasureExpr) -> MeasureExpr:
    """Push a restriction toward the leaves where it is exact.

    Restrictions of convolutions and IFS leaves are irreducible and stay
    symbolic; they are evaluated through atomic realization.
    """
    if isinstance(base, LebesgueOnSet):
        return LebesgueOnSet(region.intersect(base.region))
    if isinstance(base, Atomic):
        if base.dim != 1:
            raise InvalidMeasureError("interval restriction needs 1-d atoms")
        keep = region.contains(base.scalar_points())
        return Atomic(
            tuple(p for p, k in zip(base.points, keep) if k),
            tuple(w for w, k in zip(base.weights, keep) if k),
        )
    if isinstance(base, Density):
        return Density(base.phi, simplify_restrict(region, base.base))
    if isinstance(base, Restrict):
        return simplify_restrict(region.intersect(base.region), base.base)
    if isinstance(base, Scale):
        return Scale(base.alpha, simplify_restrict(region, base.base))
    if isinstance(base, Sum):
        return Sum(
            simplify_restrict(region, base.left),
            simplify_restrict(region, base.right),
        )
    if isinstance(base, Translate):
        if len(base.shift) != 1:
            raise InvalidMeasureError("interval restriction needs 1-d measures")
        shifted = region.translate(-base.shift[0])
        return Translate(base.shift, simplify_restrict(shifted, base.base))
    # Normalize, Convolve, IfsInvariant stay wrapped.
    return Restrict(region, base)


# ---------------------------------------------------------------------------
# total mass
# ---------------------------------------------------------------------------
def mass_with_error(
    mu: MeasureExpr,
    depth: int = DEFAULT_IFS_DEPTH,
    resolution: float = DEFAULT_RESOLUTION,
    quad_points: int = 64,
) -> tuple[float, float]:
    """Total mass and an estimate of its numerical error.

    Exact (error 0) for atomic, interval, and IFS leaves and for the
    arithmetic combinators.  Density masses over Lebesgue-backed bases are
    computed by panel quadrature with a refinement-difference error
    estimate; densities over singular bases and irreducible restrictions
    fall back to atomic realization at the given depth/resolution, so
    their reference mass is realization-defined.
    """
    if isinstance(mu, Atomic):
        return float(math.fsum(mu.weights)), 0.0
    if isinstance(mu, LebesgueOnSet):
        return mu.region.length, 0.0
    if isinstance(mu, IfsInvariant):
        return 1.0, 0.0
    if isinstance(mu, Scale):
        m, e = mass_with_error(mu.base, depth, resolution, quad_points)
        return mu.alpha * m, mu.alpha * e
    if isinstance(mu, Sum):
        ml, el = mass_with_error(mu.left, depth, resolution, quad_points)
        mr, er = mass_with_error(mu.right, depth, resolution, quad_points)
        return ml + mr, el + er
    if isinstance(mu, Convolve):
        ml, el = mass_with_error(mu.left, depth, resolution, quad_points)
        mr, er = mass_with_error(mu.right, depth, resolution, quad_points)
        return ml * mr, abs(ml) * er + abs(mr) * el + el * er
    if isinstance(mu, Translate):
        return mass_with_error(mu.base, depth, resolution, quad_points)
    if isinstance(mu, Normalize):
        m, e = mass_with_error(mu.base, depth, resolution, quad_points)
        if not (m > 0.0) or not math.isfinite(m):
            raise InvalidMeasureError(
                f"normalize requires strictly positive finite mass, got {m}"
            )
        return 1.0, e / m
    if isinstance(mu, Restrict):
        inner = simplify_restrict(mu.region, mu.base)
        if not _contains_irreducible_restrict(inner):
            return mass_with_error(inner, depth, resolution, quad_points)
        return _realized_mass(mu, depth, resolution)
    if isinstance(mu, Density):
        rule = _lebesgue_rule(mu, quad_points)
        if rule is not None:
            x, w = rule
            xc, wc = _lebesgue_rule(mu, max(2, quad_points // 2))
            fine = float(w.sum())
            coarse = float(wc.sum())
            return fine, abs(fine - coarse)
        if isinstance(mu.base, Atomic):
            vals = mu.phi(mu.base.scalar_points())
            return float(np.dot(vals, mu.base.weights_array())), 0.0
        return _realized_mass(mu, depth, resolution)
    raise TypeError(f"not a measure expression: {mu!r}")


def total_mass(mu: MeasureExpr, **kwargs) -> float:
    """Total mass of the measure (always finite for representable trees)."""
    return mass_with_error(mu, **kwargs)[0]


def _realized_mass(mu, depth, resolution) -> tuple[float, float]:
    fine = realize_atomic(mu, depth=depth, resolution=resolution)
    coarse = realize_atomic(mu, depth=max(1, depth - 2), resolution=resolution * 4)
    mf = float(math.fsum(fine.weights))
    mc = float(math.fsum(coarse.weights))
    return mf, abs(mf - mc)


def _contains_irreducible_restrict(mu: MeasureExpr) -> bool:
    if isinstance(mu, Restrict):
        return True
    if isinstance(mu, (Density, Scale, Translate, Normalize)):
        return _contains_irreducible_restrict(mu.base)
    if isinstance(mu, (Sum, Convolve)):
        return _contains_irreducible_restrict(mu.left) or _contains_irreducible_restrict(
            mu.right
        )
    return False


def _lebesgue_rule(mu: MeasureExpr, q: int, breaks=()):
    """Quadrature rule (nodes, weights) for a Lebesgue-backed subtree, or None.

    The weights integrate densities exactly enough that ``sum(weights)``
    is the subtree's mass.  Oscillatory integrands should not use this
    rule directly; it exists for mass computation.
    """
    if isinstance(mu, LebesgueOnSet):
        if mu.region.is_empty:
            return np.empty(0), np.empty(0)
        return panel_rule(mu.region, q, breakpoints=breaks, max_panel=1.0)
    if isinstance(mu, Density):
        sub = _lebesgue_rule(mu.base, q, tuple(breaks) + tuple(mu.phi.breakpoints))
        if sub is None:
            return None
        x, w = sub
        return x, w * mu.phi(x)
    if isinstance(mu, Restrict):
        inner = simplify_restrict(mu.region, mu.base)
        if isinstance(inner, Restrict):
            return None
        return _lebesgue_rule(inner, q, breaks)
    if isinstance(mu, Scale):
        sub = _lebesgue_rule(mu.base, q, breaks)
        if sub is None:
            return None
        return sub[0], sub[1] * mu.alpha
    if isinstance(mu, Sum):
        left = _lebesgue_rule(mu.left, q, breaks)
        right = _lebesgue_rule(mu.right, q, breaks)
        if left is None or right is None:
            return None
        return np.concatenate([left[0], right[0]]), np.concatenate([left[1], right[1]])
    if isinstance(mu, Translate):
        if len(mu.shift) != 1:
            return None
        sub = _lebesgue_rule(mu.base, q, tuple(b - mu.shift[0] for b in breaks))
        if sub is None:
            return None
        return sub[0] + mu.shift[0], sub[1]
    if isinstance(mu, Normalize):
        sub = _lebesgue_rule(mu.base, q, breaks)
        if sub is None:
            return None
        m = total_mass(mu.base)
        return sub[0], sub[1] / m
    return None


# ---------------------------------------------------------------------------
# support
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SupportSet:
    """A closed superset of the support of a measure.

    ``kind`` is one of ``interval-union``, ``finite-point-set``,
    ``attractor``, ``unknown-superset``.  The interval part and the point
    part are both supersets of the corresponding components; an attractor
    stores its convex hull as the checkable interval part.
    """

    kind: str
    intervals: Optional[IntervalUnion] = None
    points: Optional[tuple[tuple[float, ...], ...]] = None
    ifs: Optional[tuple[int, tuple[int, ...]]] = None

    def hull(self) -> tuple[float, float]:
        los, his = [], []
        if self.intervals is not None and not self.intervals.is_empty:
            lo, hi = self.intervals.hull()
            los.append(lo)
            his.append(hi)
        if self.points:
            vals = [p[0] for p in self.points]
            los.append(min(vals))
            his.append(max(vals))
        if not los:
            raise InvalidMeasureError("empty support superset has no hull")
        return min(los), max(his)

    def hull_intervals(self) -> IntervalUnion:
        lo, hi = self.hull()
        if hi <= lo:
            hi = lo + np.finfo(float).tiny
        return IntervalUnion(((lo, hi),))

    def radius(self) -> float:
        if self.points and len(self.points[0]) > 1:
            return float(np.max(np.linalg.norm(np.asarray(self.points), axis=1)))
        lo, hi = self.hull()
        return max(abs(lo), abs(hi))

    def diameter(self) -> float:
        if self.points and len(self.points[0]) > 1:
            pts = np.asarray(self.points)
            return float(
                np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1))
            )
        lo, hi = self.hull()
        return hi - lo

    def contains_points(self, pts: np.ndarray, pad: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = np.zeros(len(pts), dtype=bool)
        if self.intervals is not None:
            flat = pts[:, 0]
            for a, b in self.intervals:
                ok |= (flat >= a - pad) & (flat <= b + pad)
        if self.points:
            ref = np.asarray(self.points, dtype=float)
            d = np.linalg.norm(pts[:, None, :] - ref[None, :, :], axis=-1)
            ok |= (d <= pad + 1e-12).any(axis=1)
        return ok


def support_superset(mu: MeasureExpr) -> SupportSet:
    if isinstance(mu, Atomic):
        return SupportSet(kind="finite-point-set", points=mu.points)
    if isinstance(mu, LebesgueOnSet):
        return SupportSet(kind="interval-union", intervals=mu.region)
    if isinstance(mu, IfsInvariant):
        lo, hi = mu.hull()
        return SupportSet(
            kind="attractor",
            intervals=IntervalUnion(((lo, hi),)) if hi > lo else IntervalUnion(()),
            points=((lo,),) if hi <= lo else None,
            ifs=(mu.scale, mu.digits),
        )
    if isinstance(mu, (Density, Scale, Normalize)):
        return support_superset(mu.base)
    if isinstance(mu, Restrict):
        base = support_superset(mu.base)
        if base.kind == "finite-point-set":
            keep = tuple(
                p for p in base.points if len(p) == 1 and mu.region.contains(p[0])
            )
            return SupportSet(kind="finite-point-set", points=keep)
        if base.kind == "interval-union":
            return SupportSet(
                kind="interval-union", intervals=base.intervals.intersect(mu.region)
            )
        inter = base.intervals.intersect(mu.region) if base.intervals else mu.region
        pts = (
            tuple(p for p in base.points if mu.region.contains(p[0]))
            if base.points
            else None
        )
        return SupportSet(kind="unknown-superset", intervals=inter, points=pts)
    if isinstance(mu, Translate):
        base = support_superset(mu.base)
        ints = base.intervals.translate(mu.shift[0]) if base.intervals else None
        pts = (
            tuple(tuple(c + s for c, s in zip(p, mu.shift)) for p in base.points)
            if base.points
            else None
        )
        kind = base.kind if base.kind != "attractor" else "unknown-superset"
        return SupportSet(kind=kind, intervals=ints, points=pts, ifs=None)
    if isinstance(mu, Sum):
        left, right = support_superset(mu.left), support_superset(mu.right)
        if left.kind == right.kind == "finite-point-set":
            pts = tuple(dict.fromkeys(left.points + right.points))
            return SupportSet(kind="finite-point-set", points=pts)
        ints = IntervalUnion(())
        pts = []
        exact = left.kind == right.kind == "interval-union"
        for part in (left, right):
            if part.points:
                pts.extend(part.points)
            if part.intervals is not None:
                ints = ints.union(part.intervals)
        return SupportSet(
            kind="interval-union" if exact else "unknown-superset",
            intervals=ints if not ints.is_empty else None,
            points=tuple(dict.fromkeys(pts)) or None,
        )
    if isinstance(mu, Convolve):
        left, right = support_superset(mu.left), support_superset(mu.right)
        if left.kind == right.kind == "finite-point-set":
            sums = {
                tuple(a + b for a, b in zip(p, q))
                for p in left.points
                for q in right.points
            }
            return SupportSet(kind="finite-point-set", points=tuple(sorted(sums)))
        if left.kind == "finite-point-set" or right.kind == "finite-point-set":
            pointy, other = (
                (left, right) if left.kind == "finite-point-set" else (right, left)
            )
            ints = IntervalUnion(())
            for p in pointy.points:
                ints = ints.union(other.hull_intervals().translate(p[0]))
            kind = "interval-union" if other.kind == "interval-union" else "unknown-superset"
            if other.kind == "interval-union":
                ints = IntervalUnion(())
                for p in pointy.points:
                    ints = ints.union(other.intervals.translate(p[0]))
            return SupportSet(kind=kind, intervals=ints)
        li = left.intervals if left.kind == "interval-union" else left.hull_intervals()
        ri = right.intervals if right.kind == "interval-union" else right.hull_intervals()
        kind = (
            "interval-union"
            if left.kind == right.kind == "interval-union"
            else "unknown-superset"
        )
        return SupportSet(kind=kind, intervals=li.minkowski_sum(ri))
    raise TypeError(f"not a measure expression: {mu!r}")


# ---------------------------------------------------------------------------
# atomic realization
# ---------------------------------------------------------------------------
def realize_atomic(
    mu: MeasureExpr,
    depth: int = DEFAULT_IFS_DEPTH,
    resolution: float = DEFAULT_RESOLUTION,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> Atomic:
    """Finite weighted point-mass approximation of the measure.

    IFS leaves unfold the invariance equation to the given depth; interval
    and density leaves discretize on cells of spacing <= resolution with
    atoms at cell midpoints and exact cell masses; combinators are pushed
    through (convolutions become pairwise sums with exact-coincidence
    merging).  Total mass is preserved to ~1e-12 relative.
    """
    if isinstance(mu, Atomic):
        return mu
    pts, wts = _realize(mu, int(depth), float(resolution), int(atom_cap))
    pts, wts = _merge_atoms(pts, wts, atom_cap)
    return Atomic(pts, wts)


def _realize(mu, depth, resolution, cap):
    if isinstance(mu, Atomic):
        return mu.points, mu.weights
    if isinstance(mu, LebesgueOnSet):
        return _realize_cells(mu.region, None, resolution, cap)
    if isinstance(mu, IfsInvariant):
        n = len(mu.digits)
        if n**depth > cap:
            raise RealizationTooLargeError(
                f"IFS realization needs {n}**{depth} atoms, cap is {cap}"
            )
        pts = np.zeros(1)
        wts = np.ones(1)
        r = 1.0
        for _ in range(depth):
            r /= mu.scale
            pts = (pts[:, None] + r * np.asarray(mu.digits)[None, :]).ravel()
            wts = (wts[:, None] * np.asarray(mu.weights)[None, :]).ravel()
        s = math.fsum(mu.weights)
        if s != 1.0:
            wts = wts / s**depth
        return tuple((p,) for p in pts), tuple(wts)
    if isinstance(mu, Density):
        return _realize_density(mu, depth, resolution, cap)
    if isinstance(mu, Restrict):
        inner = simplify_restrict(mu.region, mu.base)
        if isinstance(inner, Restrict):
            pts, wts = _realize(inner.base, depth, resolution, cap)
            flat = np.asarray([p[0] for p in pts])
            keep = inner.region.contains(flat)
            return (
                tuple(p for p, k in zip(pts, keep) if k),
                tuple(w for w, k in zip(wts, keep) if k),
            )
        return _realize(inner, depth, resolution, cap)
    if isinstance(mu, Scale):
        pts, wts = _realize(mu.base, depth, resolution, cap)
        return pts, tuple(w * mu.alpha for w in wts)
    if isinstance(mu, Sum):
        pl, wl = _realize(mu.left, depth, resolution, cap)
        pr, wr = _realize(mu.right, depth, resolution, cap)
        return pl + pr, wl + wr
    if isinstance(mu, Convolve):
        pl, wl = _merge_atoms(*_realize(mu.left, depth, resolution, cap), cap)
        pr, wr = _merge_atoms(*_realize(mu.right, depth, resolution, cap), cap)
        pairs = len(pl) * len(pr)
        if pairs > cap * _CONVOLVE_WORK_FACTOR:
            raise RealizationTooLargeError(
                f"convolution realization needs {pairs} pairwise sums, "
                f"work cap is {cap * _CONVOLVE_WORK_FACTOR}"
            )
        al, ar = np.asarray(pl, dtype=float), np.asarray(pr, dtype=float)
        sums = al[:, None, :] + ar[None, :, :]
        w = (np.asarray(wl)[:, None] * np.asarray(wr)[None, :]).ravel()
        pts = tuple(map(tuple, sums.reshape(pairs, -1)))
        return _merge_atoms(pts, tuple(w), cap)
    if isinstance(mu, Translate):
        pts, wts = _realize(mu.base, depth, resolution, cap)
        return (
            tuple(tuple(c + s for c, s in zip(p, mu.shift)) for p in pts),
            wts,
        )
    if isinstance(mu, Normalize):
        pts, wts = _realize(mu.base, depth, resolution, cap)
        s = math.fsum(wts)
        if not (s > 0.0):
            raise InvalidMeasureError("normalize of a zero-mass subtree")
        return pts, tuple(w / s for w in wts)
    raise TypeError(f"not a measure expression: {mu!r}")


def _realize_density(mu: Density, depth, resolution, cap):
    # collapse stacked densities onto the same base
    densities = [mu.phi]
    base = mu.base
    while isinstance(base, Density):
        densities.append(base.phi)
        base = base.base
    if isinstance(base, LebesgueOnSet):
        breaks = tuple(b for phi in densities for b in phi.breakpoints)

        def cellmass(lo, hi):
            from .quadrature import gauss_legendre

            xg, wg = gauss_legendre(16)
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg
            v = 0.5 * (hi - lo) * wg
            for phi in densities:
                v = v * phi(x)
            return float(v.sum())

        return _realize_cells(base.region, cellmass, resolution, cap, breaks)
    if isinstance(base, Restrict):
        inner = simplify_restrict(base.region, base.base)
        if not isinstance(inner, Restrict):
            rebuilt = inner
            for phi in reversed(densities):
                rebuilt = Density(phi, rebuilt)
            return _realize(rebuilt, depth, resolution, cap)
    pts, wts = _realize(base, depth, resolution, cap)
    flat = np.asarray([p[0] for p in pts])
    w = np.asarray(wts)
    for phi in densities:
        w = w * phi(flat)
    return pts, tuple(w)


def _realize_cells(region: IntervalUnion, cellmass, resolution, cap, breaks=()):
    """Midpoint atoms over cells of spacing <= resolution.

    Cells are aligned to the global lattice ``k * resolution`` (boundary
    cells may be partial), so realizations of different pieces share
    midpoints and convolutions of realizations collapse onto a common
    lattice instead of producing quadratically many distinct points.
    ``cellmass(lo, hi)`` supplies the exact cell mass (defaults to the
    cell length), so total mass matches the quadrature mass.
    """
    if resolution <= 0:
        raise InvalidMeasureError("resolution must be positive")
    pieces = []
    cuts = sorted(breaks)
    for a, b in region:
        edges = [a] + [c for c in cuts if a < c < b] + [b]
        pieces.extend(zip(edges[:-1], edges[1:]))
    total = sum(int(np.ceil((b - a) / resolution)) + 1 for a, b in pieces)
    if total > cap:
        raise RealizationTooLargeError(
            f"interval realization needs {total} atoms, cap is {cap}"
        )
    pts, wts = [], []
    for a, b in pieces:
        k_lo = int(np.floor(a / resolution))
        k_hi = int(np.ceil(b / resolution))
        for k in range(k_lo, k_hi):
            lo = max(a, k * resolution)
            hi = min(b, (k + 1) * resolution)
            if hi <= lo:
                continue
            if lo == k * resolution and hi == (k + 1) * resolution:
                mid = (k + 0.5) * resolution
            else:
                mid = lo + 0.5 * (hi - lo)
            pts.append((mid,))
            wts.append(cellmass(lo, hi) if cellmass else hi - lo)
    return tuple(pts), tuple(wts)


def _merge_atoms(pts, wts, cap):
    merged: dict[tuple, float] = {}
    for p, w in zip(pts, wts):
        merged[p] = merged.get(p, 0.0) + w
    if len(merged) > cap:
        raise RealizationTooLargeError(
            f"realization has {len(merged)} atoms, cap is {cap}"
        )
    items = sorted(merged.items())
    return tuple(p for p, _ in items), tuple(w for _, w in items)


# ---------------------------------------------------------------------------
# approximate identities
# ---------------------------------------------------------------------------
def approximate_identity(kind: str, n: int, m: int = 2) -> MeasureExpr:
    """Probability measures whose supports shrink to the origin.

    ``kind`` selects the family: "i" is uniform on [0, 1/n], "ii" uniform
    on [-1/n, 1/n], "iii" uniform on [1/(n+1), 1/n], and "iv" uniform on
    [0, 1/m**(n-1)] for a base m >= 2.  All are returned in normalized
    form so total mass is exactly 1.
    """
    n = int(n)
    if n < 1:
        raise InvalidMeasureError(f"approximate identity index must be >= 1, got {n}")
    if kind == "i":
        region = (0.0, 1.0 / n)
    elif kind == "ii":
        region = (-1.0 / n, 1.0 / n)
    elif kind == "iii":
        region = (1.0 / (n + 1), 1.0 / n)
    elif kind == "iv":
        m = int(m)
        if m < 2:
            raise InvalidMeasureError(f"kind iv needs base m >= 2, got {m}")
        region = (0.0, 1.0 / m ** (n - 1))
    else:
        raise InvalidMeasureError(f"unknown approximate identity kind {kind!r}")
    return Normalize(lebesgue_on(region))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------
def validate(mu: MeasureExpr) -> list[str]:
    """Check every structural invariant; returns one message per violation.

    Violations are reported as data (with the offending subtree path)
    rather than raised, so malformed configurations can be diagnosed.
    """
    out: list[str] = []
    _validate(mu, "root", out)
    return out


def _validate(mu, path, out):
    if isinstance(mu, Atomic):
        if not mu.points:
            out.append(f"{path}: atomic measure has no atoms")
        dims = {len(p) for p in mu.points}
        if len(dims) > 1:
            out.append(f"{path}: atoms have mixed dimensions {sorted(dims)}")
        for i, w in enumerate(mu.weights):
            if not (w > 0.0 and math.isfinite(w)):
                out.append(f"{path}: non-positive weight {w} at atom {i}")
        if len(set(mu.points)) != len(mu.points):
            out.append(f"{path}: atom points are not pairwise distinct")
        for p in mu.points:
            if not all(math.isfinite(c) for c in p):
                out.append(f"{path}: non-finite atom point {p}")
                break
    elif isinstance(mu, LebesgueOnSet):
        if mu.region.is_empty:
            out.append(f"{path}: empty interval union")
    elif isinstance(mu, IfsInvariant):
        if mu.scale < 2:
            out.append(f"{path}: IFS scale factor must be >= 2, got {mu.scale}")
        if not mu.digits:
            out.append(f"{path}: IFS digit set is empty")
        if len(set(mu.digits)) != len(mu.digits):
            out.append(f"{path}: IFS digits are not distinct")
        if len(mu.digits) != len(mu.weights):
            out.append(f"{path}: IFS needs one weight per digit")
        for w in mu.weights:
            if not (w > 0.0):
                out.append(f"{path}: non-positive IFS weight {w}")
        s = math.fsum(mu.weights)
        if abs(s - 1.0) > WEIGHT_SUM_TOL:
            out.append(f"{path}: weights sum {s} != 1")
    elif isinstance(mu, Density):
        _validate(mu.base, path + ".base", out)
    elif isinstance(mu, Restrict):
        if mu.region.is_empty:
            out.append(f"{path}: restriction to an empty set")
        _validate(mu.base, path + ".base", out)
    elif isinstance(mu, Scale):
        if not (mu.alpha > 0.0 and math.isfinite(mu.alpha)):
            out.append(f"{path}: scale factor must be positive, got {mu.alpha}")
        _validate(mu.base, path + ".base", out)
    elif isinstance(mu, Translate):
        if not all(math.isfinite(c) for c in mu.shift):
            out.append(f"{path}: non-finite translation {mu.shift}")
        _validate(mu.base, path + ".base", out)
    elif isinstance(mu, Normalize):
        _validate(mu.base, path + ".base", out)
        try:
            m, _ = mass_with_error(mu.base)
            if not (m > 0.0):
                out.append(f"{path}: normalize of a zero-mass subtree")
        except InvalidMeasureError as exc:
            out.append(f"{path}: {exc}")
        except RealizationTooLargeError:
            pass  # cannot check cheaply; construction-time errors will surface
    elif isinstance(mu, (Sum, Convolve)):
        tag = "sum" if isinstance(mu, Sum) else "convolution"
        try:
            dl, dr = measure_dim(mu.left), measure_dim(mu.right)
            if dl != dr:
                out.append(f"{path}: {tag} of measures with dimensions {dl} and {dr}")
        except TypeError:
            out.append(f"{path}: malformed {tag} operand")
        _validate(mu.left, path + ".left", out)
        _validate(mu.right, path + ".right", out)
    else:
        out.append(f"{path}: not a measure expression: {type(mu).__name__}")
