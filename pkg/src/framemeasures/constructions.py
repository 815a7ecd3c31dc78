"""Certified pair transformers.

Each transformer takes a pair (mu, nu) with a bound certificate and
produces a new pair whose certificate follows from simple arithmetic on
the envelope and scaling parameters: restricting to a weighted part
multiplies the bounds by the envelope, scaling either measure scales the
bounds, mixing frame measures mixes the bounds, convolving the frame
measure with a probability measure keeps them, and convolution chains
against normalized indicators keep the envelope bounds stage after
stage.  Every certificate carries a provenance trail that replays to the
same bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionError
from .intervals import IntervalUnion, as_interval_union
from .measures import (
    Atomic,
    BoundedDensity,
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
    atomic,
    mass_with_error,
    realize_atomic,
    support_superset,
    total_mass,
    validate,
)
from .transforms import ifs_transform_grid
from .verifier import TruncationInfo

CHAIN_STAGE_CAP = 8
PROBABILITY_MASS_TOL = 1e-9

FRAME_KINDS = ("frame", "tight", "plancherel")
ALL_KINDS = FRAME_KINDS + ("bessel",)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ProvenanceStep:
    """One bound-arithmetic step: a rule name plus its parameters."""

    rule: str
    params: tuple[tuple[str, object], ...] = ()

    @staticmethod
    def make(rule: str, **params) -> "ProvenanceStep":
        return ProvenanceStep(rule, tuple(sorted(params.items())))

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class BoundCert:
    """Frame/Bessel bound certificate.

    ``A = 0`` with kind "bessel" claims only the upper bound; "tight"
    requires A == B and "plancherel" A == B == 1.  ``provenance`` lists
    the rules that produced the bounds and replays to the same values.
    """

    A: float
    B: float
    kind: str
    provenance: tuple[ProvenanceStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "A", float(self.A))
        object.__setattr__(self, "B", float(self.B))
        if self.kind not in ALL_KINDS:
            raise ConstructionError(f"unknown certificate kind {self.kind!r}")
        if not (self.B > 0.0 and math.isfinite(self.B)):
            raise ConstructionError(f"upper bound must be positive, got {self.B}")
        if self.A < 0.0 or self.A > self.B * (1 + 1e-12):
            raise ConstructionError(f"need 0 <= A <= B, got A={self.A}, B={self.B}")
        if self.kind == "bessel" and self.A != 0.0:
            raise ConstructionError("bessel certificates carry no lower bound (A=0)")
        if self.kind == "tight" and self.A != self.B:
            raise ConstructionError("tight certificates need A == B")
        if self.kind == "plancherel" and not (self.A == self.B == 1.0):
            raise ConstructionError("plancherel certificates need A == B == 1")

    def with_step(self, A, B, kind, step: ProvenanceStep) -> "BoundCert":
        return BoundCert(A, B, kind, self.provenance + (step,))


@dataclass(frozen=True)
class CertifiedPair:
    """A measure, a candidate frame measure for it, and the certificate."""

    mu: MeasureExpr
    nu: MeasureExpr
    cert: BoundCert
    truncation: Optional[TruncationInfo] = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        bad = validate(self.mu) + validate(self.nu)
        if bad:
            raise ConstructionError("invalid pair: " + "; ".join(bad))


def _derived_kind(A: float, B: float, base_kind: str) -> str:
    if base_kind == "bessel" or A <= 0.0:
        return "bessel"
    if A == B == 1.0:
        return "plancherel"
    if A == B:
        return "tight"
    return "frame"


# ---------------------------------------------------------------------------
# provenance replay
# ---------------------------------------------------------------------------
def _replay_base(_A, _B, p):
    return p["A"], p["B"]


def _replay_envelope(A, B, p):
    return p["lower"] * A, p["upper"] * B


def _replay_scale(A, B, p):
    return p["alpha"] * A, p["alpha"] * B


def _replay_mix(A, B, p):
    return (
        p["alpha"] * A + p["beta"] * p["other_A"],
        p["alpha"] * B + p["beta"] * p["other_B"],
    )


def _replay_chain(A, B, p):
    factor = 1.0
    for f in p["factors"]:
        factor *= f
    return p["lower"] * A * factor, p["upper"] * B * factor


def _replay_parts(A, B, p):
    return (1.0 + sum(p["lowers"])) * A, (1.0 + sum(p["uppers"])) * B


def _replay_bessel_sum(_A, _B, p):
    return 0.0, (math.sqrt(p["B1"]) + math.sqrt(p["B2"])) ** 2


def _replay_identity(A, B, _p):
    return A, B


REPLAY_RULES = {
    "plancherel-base": _replay_base,
    "bessel-mass-product": _replay_base,
    "bessel-budget-comb": _replay_base,
    "exact-atomic-bounds": _replay_base,
    "bessel-sum-of-measures": _replay_bessel_sum,
    "density-restrict-envelope": _replay_envelope,
    "reweight-frame-measure": _replay_envelope,
    "smooth-density-envelope": _replay_envelope,
    "scale-measure": _replay_scale,
    "scale-frame-measure": _replay_scale,
    "mix-frame-measures": _replay_mix,
    "convolve-with-probability": _replay_identity,
    "translate-measure": _replay_identity,
    "convolution-chain": _replay_chain,
    "sum-weighted-parts": _replay_parts,
}


def replay_provenance(cert: BoundCert) -> tuple[float, float]:
    """Re-execute the provenance chain; must reproduce (A, B) exactly."""
    if not cert.provenance:
        raise ConstructionError("certificate has no provenance to replay")
    A = B = 0.0
    for step in cert.provenance:
        rule = REPLAY_RULES.get(step.rule)
        if rule is None:
            raise ConstructionError(f"unknown provenance rule {step.rule!r}")
        A, B = rule(A, B, dict(step.params))
    return A, B


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CatalogConfig:
    """Parameters for the catalog of certified pairs.

    ``F`` and ``E`` choose the indicator supports of the two
    Lebesgue-based pairs (E must sit inside [0, 1]); infinite frame
    measures are truncated: the integer comb to ``|n| <= comb_halfwidth``
    and full Lebesgue measure to ``[-window_halfwidth, window_halfwidth]``,
    both recorded on the pair.  ``ifs_depth`` controls the transform
    truncation used for the Cantor-pair densities and weights.
    """

    F: tuple = ((0.0, 1.0),)
    E: tuple = ((0.0, 1.0),)
    comb_halfwidth: int = 64
    window_halfwidth: float = 2048.0
    ifs_depth: int = 32
    envelope_grid: int = 2**14
    weight_floor: float = 1e-30


def cantor_even_digits() -> IfsInvariant:
    """Scale-4 invariant measure with digits {0, 2} (singular, Cantor type)."""
    return IfsInvariant(4, (0, 2), (0.5, 0.5))


def cantor_unit_digits() -> IfsInvariant:
    """Scale-4 invariant measure with digits {0, 1}."""
    return IfsInvariant(4, (0, 1), (0.5, 0.5))


def squared_transform_density(
    ifs: IfsInvariant,
    region,
    depth: int = 32,
    grid: int = 2**14,
    lower: float | None = None,
) -> BoundedDensity:
    """``|ifs_hat(t)|^2`` as a certified density on ``region``.

    The upper envelope 1 is analytic (the measure is a probability); the
    lower envelope is measured on a dense grid and deflated by 0.1%,
    which is recorded in the payload for serialization and provenance.
    """
    region = as_interval_union(region)

    def fn(t, _ifs=ifs, _depth=depth):
        vals, _ = ifs_transform_grid(_ifs, np.asarray(t, dtype=float), _depth)
        return np.abs(vals) ** 2

    if lower is None:
        lo, hi = region.hull()
        probe = np.linspace(lo, hi, grid)
        lower = float(fn(probe).min()) * (1.0 - 1e-3)
    if lower <= 0.0:
        raise ConstructionError(
            "squared transform has no positive lower envelope on this region"
        )
    return BoundedDensity(
        fn=fn,
        domain=region,
        lower=lower,
        upper=1.0,
        form="closed-form-with-stated-envelope",
        osc_hint=2.0 * ifs.hull_radius(),
        label="squared-transform-ifs",
        payload=(ifs.scale, ifs.digits, ifs.weights, depth, lower, region.intervals),
    )


def integer_comb(halfwidth: int, weights=None) -> Atomic:
    """``sum_{|n| <= halfwidth} w_n delta_n`` (unit weights by default)."""
    ns = range(-int(halfwidth), int(halfwidth) + 1)
    if weights is None:
        return atomic([(float(n), 1.0) for n in ns])
    return atomic([(float(n), w) for n, w in zip(ns, weights) if w > 0.0])


def canonical_pairs(config: CatalogConfig = CatalogConfig()) -> list[CertifiedPair]:
    """The catalog of certified pairs used as verification baselines.

    1. (chi_F d-lambda, lambda) - Lebesgue is self-dual, so the pair is
       Plancherel; lambda is stored truncated to a window.
    2. (chi_E d-lambda with E inside [0,1], integer comb) - the integer
       exponentials are an orthonormal basis of L^2[0,1]; the comb is
       stored truncated.
    3. (Cantor scale-4 digits {0,2}, squared-transform density of the
       digits-{0,1} measure on [0,1]) - continuous Plancherel measure.
    4. Same base with the discrete counterpart: integer comb weighted by
       the squared transform at integers, stored truncated.
    """
    F = as_interval_union(config.F)
    E = as_interval_union(config.E)
    if E.is_empty or E.hull()[0] < 0.0 or E.hull()[1] > 1.0:
        raise ConstructionError("the comb pair needs E inside [0, 1]")
    W = float(config.window_halfwidth)
    T = int(config.comb_halfwidth)

    plancherel = lambda **p: BoundCert(
        1.0, 1.0, "plancherel", (ProvenanceStep.make("plancherel-base", A=1.0, B=1.0, **p),)
    )

    pair1 = CertifiedPair(
        mu=LebesgueOnSet(F),
        nu=LebesgueOnSet(IntervalUnion(((-W, W),))),
        cert=plancherel(source="lebesgue-self-dual", window=W),
        truncation=TruncationInfo("continuous", W),
        notes=(f"frame measure is full Lebesgue measure, stored on [-{W}, {W}]",),
    )

    pair2 = CertifiedPair(
        mu=LebesgueOnSet(E),
        nu=integer_comb(T),
        cert=plancherel(source="integer-exponentials-on-unit-interval", comb_halfwidth=T),
        truncation=TruncationInfo("discrete", float(T)),
        notes=(f"frame measure is the full integer comb, stored for |n| <= {T}",),
    )

    mu4 = cantor_even_digits()
    helper = cantor_unit_digits()
    dens = squared_transform_density(
        helper, ((0.0, 1.0),), depth=config.ifs_depth, grid=config.envelope_grid
    )
    pair3 = CertifiedPair(
        mu=mu4,
        nu=Density(dens, LebesgueOnSet(IntervalUnion(((0.0, 1.0),)))),
        cert=plancherel(
            source="cantor-continuous-dual",
            measured_lower=dens.lower,
            transform_depth=config.ifs_depth,
        ),
        notes=(
            "density lower envelope is a measured grid minimum, not an analytic bound",
        ),
    )

    ns = np.arange(-T, T + 1, dtype=float)
    vals, _ = ifs_transform_grid(helper, ns, config.ifs_depth)
    weights = np.abs(vals) ** 2
    kept = weights > config.weight_floor
    nu2 = atomic(
        [(float(n), float(w)) for n, w in zip(ns, weights) if w > config.weight_floor]
    )
    pair4 = CertifiedPair(
        mu=mu4,
        nu=nu2,
        cert=plancherel(
            source="cantor-discrete-dual",
            comb_halfwidth=T,
            transform_depth=config.ifs_depth,
            dropped_zero_weights=int((~kept).sum()),
        ),
        truncation=TruncationInfo("discrete", float(T)),
        notes=(
            f"frame measure is an infinite weighted comb, stored for |n| <= {T}; "
            f"{int((~kept).sum())} zero-weight atoms dropped",
        ),
    )
    return [pair1, pair2, pair3, pair4]


# ---------------------------------------------------------------------------
# elementary certificates
# ---------------------------------------------------------------------------
def bessel_finite_pair(mu: MeasureExpr, nu: MeasureExpr) -> BoundCert:
    """Any finite measure is a Bessel measure for any finite measure,
    with bound mass(mu) * mass(nu)."""
    mm, _ = mass_with_error(mu)
    mn, _ = mass_with_error(nu)
    if not (math.isfinite(mm) and math.isfinite(mn)):
        raise ConstructionError("bessel product bound needs finite masses")
    B = mm * mn
    return BoundCert(
        0.0,
        B,
        "bessel",
        (ProvenanceStep.make("bessel-mass-product", A=0.0, B=B, mass_mu=mm, mass_nu=mn),),
    )


def discrete_bessel(points, budget: float, mu: MeasureExpr) -> CertifiedPair:
    """Discrete Bessel measure with total atom weight budget / mass(mu).

    The budget is split equally over the given points; the resulting comb
    is Bessel for mu with bound exactly ``budget``.
    """
    pts = list(points)
    if not pts:
        raise ConstructionError("need at least one atom position")
    if not budget > 0.0:
        raise ConstructionError(f"budget must be positive, got {budget}")
    m = total_mass(mu)
    if not m > 0.0:
        raise ConstructionError("base measure must have positive mass")
    c = budget / (len(pts) * m)
    nu = atomic([(p, c) for p in pts])
    cert = BoundCert(
        0.0,
        float(budget),
        "bessel",
        (
            ProvenanceStep.make(
                "bessel-budget-comb", A=0.0, B=float(budget), atoms=len(pts), mass_mu=m
            ),
        ),
    )
    return CertifiedPair(mu=mu, nu=nu, cert=cert)


def sum_bessel(c1: BoundCert, c2: BoundCert) -> BoundCert:
    """Bessel bound for a sum of base measures sharing one frame measure."""
    B = (math.sqrt(c1.B) + math.sqrt(c2.B)) ** 2
    return BoundCert(
        0.0,
        B,
        "bessel",
        (ProvenanceStep.make("bessel-sum-of-measures", B1=c1.B, B2=c2.B),),
    )


def exact_pair(mu: Atomic, nu: Atomic, atom_cap: int = 512) -> CertifiedPair:
    """Certify a finite atomic pair with its exact oracle bounds."""
    from .verifier import exact_frame_bounds_atomic

    A, B = exact_frame_bounds_atomic(mu, nu, atom_cap)
    A = max(A, 0.0)
    kind = _derived_kind(A, B, "frame")
    cert = BoundCert(
        A if kind != "bessel" else 0.0,
        B,
        kind,
        (ProvenanceStep.make("exact-atomic-bounds", A=A if kind != "bessel" else 0.0, B=B),),
    )
    return CertifiedPair(mu=mu, nu=nu, cert=cert)


# ---------------------------------------------------------------------------
# transformers
# ---------------------------------------------------------------------------
def _require_frame(cert: BoundCert, what: str):
    if cert.kind not in FRAME_KINDS:
        raise ConstructionError(f"{what} needs a frame-type certificate, got {cert.kind}")


def _envelope_cert(cert: BoundCert, lower, upper, rule, **extra) -> BoundCert:
    A2, B2 = lower * cert.A, upper * cert.B
    if lower == upper == 1.0:
        kind = cert.kind
    else:
        kind = _derived_kind(A2, B2, cert.kind)
    step = ProvenanceStep.make(rule, lower=lower, upper=upper, **extra)
    return cert.with_step(A2, B2, kind, step)


def density_restrict(
    pair: CertifiedPair, E, phi: BoundedDensity
) -> CertifiedPair:
    """Restrict the base measure to E and reweight by an enveloped density.

    The certificate bounds are multiplied by the envelope; with the
    trivial envelope the certificate is unchanged.  ``E=None`` applies
    the density on the full support.
    """
    _require_frame(pair.cert, "density restriction")
    sup = support_superset(pair.mu)
    if E is not None:
        E = as_interval_union(E)
        if E.is_empty:
            raise ConstructionError("restriction set is empty")
        # any E works (only the part meeting the support matters), but an
        # E missing the support entirely leaves an empty measure behind
        if E.intersect(sup.hull_intervals()).is_empty:
            raise ConstructionError("restriction set misses the support entirely")
        mu2 = Restrict(E, Density(phi, pair.mu))
    else:
        mu2 = Density(phi, pair.mu)
    _check_envelope_on_atoms(phi, pair.mu, E)
    cert = _envelope_cert(
        pair.cert, phi.lower, phi.upper, "density-restrict-envelope",
        restricted=E is not None,
    )
    return replace(pair, mu=mu2, cert=cert)


def scale_base(pair: CertifiedPair, alpha: float) -> CertifiedPair:
    """Scale the base measure; both bounds scale by the same factor."""
    if not alpha > 0.0:
        raise ConstructionError(f"scale factor must be positive, got {alpha}")
    if alpha == 1.0:
        return pair
    A2, B2 = alpha * pair.cert.A, alpha * pair.cert.B
    kind = _derived_kind(A2, B2, pair.cert.kind)
    cert = pair.cert.with_step(
        A2, B2, kind, ProvenanceStep.make("scale-measure", alpha=float(alpha))
    )
    return replace(pair, mu=Scale(alpha, pair.mu), cert=cert)


def scale_frame_measure(pair: CertifiedPair, phi_or_alpha) -> CertifiedPair:
    """Reweight or scale the frame measure; bounds scale by the envelope."""
    if isinstance(phi_or_alpha, BoundedDensity):
        phi = phi_or_alpha
        _check_envelope_on_atoms(phi, pair.nu, None)
        cert = _envelope_cert(pair.cert, phi.lower, phi.upper, "reweight-frame-measure")
        trunc = _scale_truncation(pair.truncation, phi.upper)
        return replace(pair, nu=Density(phi, pair.nu), cert=cert, truncation=trunc)
    alpha = float(phi_or_alpha)
    if not alpha > 0.0:
        raise ConstructionError(f"scale factor must be positive, got {alpha}")
    if alpha == 1.0:
        return pair
    A2, B2 = alpha * pair.cert.A, alpha * pair.cert.B
    kind = _derived_kind(A2, B2, pair.cert.kind)
    cert = pair.cert.with_step(
        A2, B2, kind, ProvenanceStep.make("scale-frame-measure", alpha=alpha)
    )
    trunc = _scale_truncation(pair.truncation, alpha)
    return replace(pair, nu=Scale(alpha, pair.nu), cert=cert, truncation=trunc)


def mix_frame_measures(
    p1: CertifiedPair, p2: CertifiedPair, alpha: float, beta: float
) -> CertifiedPair:
    """Positive combination of two frame measures for the same base."""
    if p1.mu != p2.mu:
        raise ConstructionError("mixing requires the same base measure")
    if not (alpha > 0.0 and beta > 0.0):
        raise ConstructionError("mixing weights must be positive")
    A2 = alpha * p1.cert.A + beta * p2.cert.A
    B2 = alpha * p1.cert.B + beta * p2.cert.B
    if p1.cert.kind in FRAME_KINDS and p2.cert.kind in FRAME_KINDS:
        kind = _derived_kind(A2, B2, "frame")
    else:
        kind = "bessel"
        A2 = 0.0
    step = ProvenanceStep.make(
        "mix-frame-measures",
        alpha=float(alpha),
        beta=float(beta),
        other_A=p2.cert.A,
        other_B=p2.cert.B,
    )
    cert = p1.cert.with_step(A2, B2, kind, step)
    nu = Sum(Scale(alpha, p1.nu), Scale(beta, p2.nu))
    trunc = _merge_truncations(p1.truncation, p2.truncation, alpha, beta)
    return CertifiedPair(
        mu=p1.mu, nu=nu, cert=cert, truncation=trunc, notes=p1.notes + p2.notes
    )


def convolve_frame_measure_with_probability(
    pair: CertifiedPair, rho: MeasureExpr
) -> CertifiedPair:
    """Convolve the frame measure with a probability measure; cert unchanged."""
    m, me = mass_with_error(rho)
    if abs(m - 1.0) > PROBABILITY_MASS_TOL + me:
        raise ConstructionError(f"expected a probability measure, mass is {m}")
    cert = pair.cert.with_step(
        pair.cert.A,
        pair.cert.B,
        pair.cert.kind,
        ProvenanceStep.make("convolve-with-probability"),
    )
    trunc = pair.truncation
    if trunc is not None:
        trunc = replace(
            trunc, smear=trunc.smear + support_superset(rho).radius()
        )
    return replace(pair, nu=Convolve(pair.nu, rho), cert=cert, truncation=trunc)


def translate_pair(pair: CertifiedPair, t0: float) -> CertifiedPair:
    """Translate the base measure; the frame bounds are unchanged."""
    if t0 == 0.0:
        return pair
    cert = pair.cert.with_step(
        pair.cert.A,
        pair.cert.B,
        pair.cert.kind,
        ProvenanceStep.make("translate-measure", shift=float(t0)),
    )
    return replace(pair, mu=Translate((float(t0),), pair.mu), cert=cert)


def convolution_chain(
    base: CertifiedPair,
    phi: BoundedDensity,
    sets: Sequence,
    normalized: bool = True,
    max_stages: int = CHAIN_STAGE_CAP,
) -> CertifiedPair:
    """Frame measure for ``chi_F d(phi dlambda * u_1 * ... * u_n)``.

    ``base`` certifies a frame measure for an indicator measure
    ``chi_F dlambda``; each stage convolves with the (normalized)
    indicator of a finite-measure set.  The enveloped density is
    materialized on the finite window ``hull(F) - sum of stage supports``,
    which leaves the restriction to F unchanged.  With ``normalized``
    off, each stage multiplies both bounds by the stage set's measure.
    """
    _require_frame(base.cert, "convolution chain")
    if not isinstance(base.mu, LebesgueOnSet):
        raise ConstructionError(
            "convolution chains start from an indicator measure chi_F dlambda"
        )
    regions = [as_interval_union(s) for s in sets]
    if not regions:
        raise ConstructionError("need at least one stage set")
    if len(regions) > max_stages:
        raise ConstructionError(
            f"chain length {len(regions)} exceeds the stage cap {max_stages}"
        )
    factors = []
    s_lo = s_hi = 0.0
    for r in regions:
        if r.is_empty:
            raise ConstructionError("stage sets must have positive measure")
        lo, hi = r.hull()
        s_lo += lo
        s_hi += hi
        factors.append(1.0 if normalized else r.length)
    f_lo, f_hi = base.mu.region.hull()
    window = IntervalUnion(((f_lo - s_hi, f_hi - s_lo),))
    if phi.domain is not None:
        wl, wh = window.hull()
        if not (phi.domain.contains(wl) and phi.domain.contains(wh)):
            raise ConstructionError(
                f"density domain must cover the window [{wl}, {wh}]"
            )
    conv: MeasureExpr = Density(phi, LebesgueOnSet(window))
    for r in regions:
        stage = Normalize(LebesgueOnSet(r)) if normalized else LebesgueOnSet(r)
        conv = Convolve(conv, stage)
    mu2 = Restrict(base.mu.region, conv)
    factor = float(np.prod(factors))
    A2 = phi.lower * base.cert.A * factor
    B2 = phi.upper * base.cert.B * factor
    if phi.lower == phi.upper == 1.0 and factor == 1.0:
        kind = base.cert.kind
    else:
        kind = _derived_kind(A2, B2, base.cert.kind)
    cert = base.cert.with_step(
        A2,
        B2,
        kind,
        ProvenanceStep.make(
            "convolution-chain",
            lower=phi.lower,
            upper=phi.upper,
            factors=tuple(factors),
        ),
    )
    return replace(base, mu=mu2, cert=cert)


def sum_with_densities(pair: CertifiedPair, parts: Sequence) -> CertifiedPair:
    """Frame measure for ``mu + sum_k chi_{E_k} phi_k dmu``.

    Bounds become ``((1 + sum of lower envelopes) A, (1 + sum of upper
    envelopes) B)``.  An empty part list returns the pair unchanged.
    """
    parts = list(parts)
    if not parts:
        return pair
    _require_frame(pair.cert, "weighted-part sums")
    hull = support_superset(pair.mu).hull_intervals()
    mu2: MeasureExpr = pair.mu
    lowers, uppers = [], []
    for E, phi in parts:
        E = as_interval_union(E)
        if E.is_empty:
            raise ConstructionError("part sets must be nonempty")
        if E.intersect(hull).length < E.length * (1 - 1e-12):
            raise ConstructionError("part sets must sit inside the support hull")
        _check_envelope_on_atoms(phi, pair.mu, E)
        mu2 = Sum(mu2, Restrict(E, Density(phi, pair.mu)))
        lowers.append(phi.lower)
        uppers.append(phi.upper)
    A2 = (1.0 + sum(lowers)) * pair.cert.A
    B2 = (1.0 + sum(uppers)) * pair.cert.B
    cert = pair.cert.with_step(
        A2,
        B2,
        _derived_kind(A2, B2, pair.cert.kind),
        ProvenanceStep.make(
            "sum-weighted-parts", lowers=tuple(lowers), uppers=tuple(uppers)
        ),
    )
    return replace(pair, mu=mu2, cert=cert)


def smoothed_density(
    phi: BoundedDensity,
    rhos: Sequence[MeasureExpr],
    realize_depth: int = 12,
    realize_resolution: float = 2.0**-10,
    atom_cap: int = 2**20,
    max_stages: int = CHAIN_STAGE_CAP,
) -> BoundedDensity:
    """``phi * rho_1 * ... * rho_n`` as a pointwise-evaluable density.

    The probability chain is realized atomically and the convolution
    evaluated as a weighted sum of shifts; averaging over probabilities
    preserves the envelope, so the result inherits ``(lower, upper)``.
    """
    rhos = list(rhos)
    if len(rhos) > max_stages:
        raise ConstructionError(f"chain length {len(rhos)} exceeds cap {max_stages}")
    # piecewise-constant densities clamp to their edge values outside the
    # breakpoint range, so they are total on R with the same envelope
    if phi.domain is not None and phi.form != "piecewise-constant":
        raise ConstructionError("smoothing needs a density defined on all of R")
    if not rhos:
        return phi
    chain: MeasureExpr = rhos[0]
    for rho in rhos[1:]:
        chain = Convolve(chain, rho)
    for rho in rhos:
        m, me = mass_with_error(rho)
        if abs(m - 1.0) > PROBABILITY_MASS_TOL + me:
            raise ConstructionError(f"chain entries must be probabilities, mass {m}")
    atoms = realize_atomic(
        chain, depth=realize_depth, resolution=realize_resolution, atom_cap=atom_cap
    )
    shifts = atoms.scalar_points()
    wts = atoms.weights_array()
    wts = wts / wts.sum()  # exact unit mass keeps the envelope inherited

    def fn(x, _phi=phi, _s=shifts, _w=wts):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for s, w in zip(_s, _w):
            out = out + w * _phi(x - s)
        return out

    return BoundedDensity(
        fn=fn,
        domain=None,
        lower=phi.lower,
        upper=phi.upper,
        form="closed-form-with-stated-envelope",
        osc_hint=phi.osc_hint,
    )


def smooth_base(
    pair: CertifiedPair,
    phi: BoundedDensity,
    rhos: Sequence[MeasureExpr],
    realize_depth: int = 12,
    realize_resolution: float = 2.0**-10,
    atom_cap: int = 2**20,
    max_stages: int = CHAIN_STAGE_CAP,
) -> CertifiedPair:
    """Frame measure for ``(phi * rho_1 * ... * rho_n) dmu``.

    The smoothed density keeps the envelope, so the certificate bounds
    are the envelope times the base bounds.  (The mirrored form, applying
    a smoothed density to the frame measure instead, is
    ``scale_frame_measure(pair, smoothed_density(phi, rhos))``.)
    """
    _require_frame(pair.cert, "density smoothing")
    smoothed = smoothed_density(
        phi, rhos, realize_depth, realize_resolution, atom_cap, max_stages
    )
    cert = _envelope_cert(
        pair.cert,
        smoothed.lower,
        smoothed.upper,
        "smooth-density-envelope",
        stages=len(list(rhos)),
    )
    return replace(pair, mu=Density(smoothed, pair.mu), cert=cert)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def _check_envelope_on_atoms(phi: BoundedDensity, measure: MeasureExpr, E):
    """Extra envelope spot-check on atom positions (the a.e. condition)."""
    if not isinstance(measure, Atomic) or measure.dim != 1:
        return
    x = measure.scalar_points()
    if E is not None:
        x = x[E.contains(x)]
    if len(x) == 0:
        raise ConstructionError("restriction keeps no atoms")
    vals = phi(x)
    slack = 1e-9 * max(1.0, phi.upper)
    if vals.min() < phi.lower - slack or vals.max() > phi.upper + slack:
        raise ConstructionError(
            f"density violates its envelope on atoms: observed "
            f"[{vals.min()}, {vals.max()}] vs [{phi.lower}, {phi.upper}]"
        )


def _scale_truncation(trunc, weight_factor):
    if trunc is None:
        return None
    return replace(trunc, weight_scale=trunc.weight_scale * float(weight_factor))


def _merge_truncations(t1, t2, alpha, beta):
    if t1 is None and t2 is None:
        return None
    if t1 is None:
        return _scale_truncation(t2, beta)
    if t2 is None:
        return _scale_truncation(t1, alpha)
    kind = t1.kind if t1.kind == t2.kind else "discrete"
    return TruncationInfo(
        kind,
        min(t1.threshold, t2.threshold),
        max(t1.smear, t2.smear),
        alpha * t1.weight_scale + beta * t2.weight_scale,
    )
