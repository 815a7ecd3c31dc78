"""Empirical frame-ratio measurement and exact finite-dimensional bounds.

For a pair (mu, nu) the frame ratio of a test function f is

    integral |weighted_transform(f, mu)(t)|^2 dnu(t)  /  integral |f|^2 dmu,

whose range over L^2(mu) is exactly the frame-bound interval.  The
verifier samples that quantifier over deterministic families of test
functions, reports per-function ratios with certified error terms, and
compares against a bound certificate.  For finite atomic pairs the exact
extreme ratios are the extreme eigenvalues of a Hermitian form and serve
as the brute-force oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidMeasureError, RealizationTooLargeError
from .measures import Atomic, Convolve, MeasureExpr, support_superset, total_mass
from .transforms import (
    TransformRequest,
    density_sup_tv,
    ft_weighted_family_grid,
    plan_measure,
)

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------
class TestFunction:
    """Base for elements of L^2(mu) used to sample the frame inequality."""

    kind = "abstract"
    label = "f"
    max_frequency = 0.0
    breakpoints: tuple[float, ...] = ()

    def evaluate(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class TrigPolynomial(TestFunction):
    """``sum_k c_k exp(2*pi*i*k*x)`` with integer frequencies."""

    freqs: tuple[int, ...]
    coefs: tuple[complex, ...]
    label: str = "trig"

    kind = "trig"
    breakpoints: tuple[float, ...] = ()

    @property
    def max_frequency(self) -> float:
        return float(max((abs(k) for k in self.freqs), default=0))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        k = np.asarray(self.freqs, dtype=float)
        c = np.asarray(self.coefs, dtype=complex)
        return np.exp(2j * np.pi * np.multiply.outer(x, k)) @ c

    def sup_bound(self) -> float:
        return float(np.abs(self.coefs).sum())


@dataclass(frozen=True)
class StepFunction(TestFunction):
    """Piecewise-constant function on ``[breaks[0], breaks[-1]]``, 0 outside."""

    breaks: tuple[float, ...]
    values: tuple[complex, ...]
    label: str = "step"

    kind = "step"
    max_frequency = 0.0

    def __post_init__(self):
        if len(self.breaks) != len(self.values) + 1:
            raise InvalidMeasureError("need len(breaks) == len(values) + 1")

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.breaks

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        bp = np.asarray(self.breaks)
        idx = np.searchsorted(bp, x, side="right") - 1
        inside = (x >= bp[0]) & (x <= bp[-1])
        idx = np.clip(idx, 0, len(self.values) - 1)
        return np.where(inside, np.asarray(self.values, dtype=complex)[idx], 0.0)

    def sup_bound(self) -> float:
        return float(np.abs(self.values).max())

    def tv_bound(self) -> float:
        v = np.asarray(self.values, dtype=complex)
        return float(abs(v[0]) + np.abs(np.diff(v)).sum() + abs(v[-1]))


@dataclass(frozen=True)
class PointValues(TestFunction):
    """Values assigned on the atoms of a specific atomic measure."""

    points: tuple[tuple[float, ...], ...]
    values: tuple[complex, ...]
    label: str = "point-values"

    kind = "point-values"
    max_frequency = 0.0
    breakpoints: tuple[float, ...] = ()

    def evaluate(self, x):
        table = {p[0] if len(p) == 1 else p: v for p, v in zip(self.points, self.values)}
        x = np.asarray(x, dtype=float)
        try:
            return np.asarray([table[xi] for xi in x.ravel()], dtype=complex).reshape(
                x.shape
            )
        except KeyError as exc:
            raise InvalidMeasureError(
                f"point-value test function not defined at {exc.args[0]}"
            ) from None

    def values_for(self, mu: Atomic) -> np.ndarray:
        table = dict(zip(self.points, self.values))
        try:
            return np.asarray([table[p] for p in mu.points], dtype=complex)
        except KeyError as exc:
            raise InvalidMeasureError(
                f"point-value test function not defined at atom {exc.args[0]}"
            ) from None


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TruncationInfo:
    """How an infinite frame measure was truncated for computation.

    ``kind`` is "discrete" (an integer comb cut to |n| <= threshold) or
    "continuous" (a density cut to [-threshold, threshold]); ``smear``
    widens the excluded region when the truncated measure was convolved
    with a probability measure of that support radius; ``weight_scale``
    bounds the weight/density of the discarded part (1 for unit combs and
    plain Lebesgue windows, scaled when the frame measure is scaled).
    """

    kind: str
    threshold: float
    smear: float = 0.0
    weight_scale: float = 1.0

    def describe(self) -> str:
        return (
            f"nu truncated ({self.kind}, threshold={self.threshold}, "
            f"smear={self.smear}, weight_scale={self.weight_scale})"
        )


@dataclass(frozen=True)
class RatioEntry:
    test_id: str
    ratio: float
    err: float
    tail: Optional[float] = None  # one-sided truncation deficit bound

    @property
    def err_total(self) -> float:
        return self.err + (self.tail or 0.0)


@dataclass(frozen=True)
class FrameReport:
    ratios: tuple[RatioEntry, ...]
    emp_lower: float
    emp_upper: float
    cert: Optional[object] = None  # BoundCert-like: fields A, B, kind
    verdict: str = "inconclusive"
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class RatioResult:
    ratio: float
    err: float
    tail: Optional[float]
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# norms and ratios
# ---------------------------------------------------------------------------
def norm_sq_with_error(
    f: TestFunction, mu: MeasureExpr, req: TransformRequest | None = None
) -> tuple[float, float]:
    req = req or TransformRequest()
    if isinstance(mu, Atomic):
        w = mu.weights_array()
        if isinstance(f, PointValues):
            vals = f.values_for(mu)
        elif mu.dim == 1:
            vals = f.evaluate(mu.scalar_points())
        else:
            raise InvalidMeasureError("only point-value tests work on multi-d atoms")
        return float(np.sum(w * np.abs(vals) ** 2)), 0.0
    plan = plan_measure(mu, req, 2.0 * f.max_frequency, f.breakpoints)
    fine = float(np.sum(plan.weights * np.abs(f.evaluate(plan.points)) ** 2))
    coarse = float(
        np.sum(plan.coarse_weights * np.abs(f.evaluate(plan.coarse_points)) ** 2)
    )
    return fine, abs(fine - coarse)


def norm_sq(f: TestFunction, mu: MeasureExpr, req: TransformRequest | None = None) -> float:
    """``integral |f|^2 dmu``; exact for atomic mu, quadrature otherwise."""
    return norm_sq_with_error(f, mu, req)[0]


def frame_ratio(
    f: TestFunction,
    mu: MeasureExpr,
    nu: MeasureExpr,
    req: TransformRequest | None = None,
    truncation: Optional[TruncationInfo] = None,
) -> RatioResult:
    """Frame ratio of one test function with a certified error term.

    When ``nu`` is a truncation of an infinite measure, ``truncation``
    enables a deficit bound from the decay of the weighted transform; if
    no decay bound exists the tail is None and verdicts relying on the
    lower bound must be treated as inconclusive.
    """
    report = estimate_bounds(mu, nu, [f], req=req, truncation=truncation)
    entry = report.ratios[0]
    return RatioResult(entry.ratio, entry.err, entry.tail, report.notes)


def estimate_bounds(
    mu: MeasureExpr,
    nu: MeasureExpr,
    family: Sequence[TestFunction],
    req: TransformRequest | None = None,
    cert=None,
    truncation: Optional[TruncationInfo] = None,
) -> FrameReport:
    """Frame ratios over a family, empirical bounds, and a cert verdict."""
    if not family:
        raise InvalidMeasureError("test family is empty")
    req = req or TransformRequest()
    notes: list[str] = []

    osc = _transform_band(mu)
    plan_nu = plan_measure(nu, req, osc)
    notes.extend(plan_nu.notes)
    if truncation is not None:
        notes.append(truncation.describe())

    vals_f, errs_f = ft_weighted_family_grid(
        family, mu, plan_nu.points, req, t_groups=plan_nu.fine.groups
    )
    num_fine = (np.abs(vals_f) ** 2) @ plan_nu.weights
    transform_term = (2.0 * np.abs(vals_f) * errs_f + errs_f**2) @ np.abs(
        plan_nu.weights
    )
    if plan_nu.exact:
        num_err = transform_term
    else:
        vals_c, _ = ft_weighted_family_grid(
            family, mu, plan_nu.coarse_points, req, t_groups=plan_nu.coarse.groups
        )
        num_coarse = (np.abs(vals_c) ** 2) @ plan_nu.coarse_weights
        num_err = transform_term + np.abs(num_fine - num_coarse)

    entries = []
    tail_unavailable = False
    for i, f in enumerate(family):
        den, den_err = norm_sq_with_error(f, mu, req)
        if not den > 0.0:
            raise InvalidMeasureError(
                f"test function {getattr(f, 'label', i)} has zero norm; ratio undefined"
            )
        ratio = num_fine[i] / den
        err = num_err[i] / den + ratio * den_err / den
        tail = None
        if truncation is not None:
            tail_abs = truncation_allowance(f, mu, truncation)
            if tail_abs is None:
                tail_unavailable = True
            else:
                tail = tail_abs / den
        entries.append(
            RatioEntry(getattr(f, "label", f"f{i}"), float(ratio), float(err), tail)
        )
    if truncation is not None and tail_unavailable:
        notes.append("tail estimate unavailable (non-decaying transform)")

    emp_lower = min(e.ratio for e in entries)
    emp_upper = max(e.ratio for e in entries)
    verdict = _verdict(entries, cert, truncation, tail_unavailable, notes)
    return FrameReport(
        ratios=tuple(entries),
        emp_lower=float(emp_lower),
        emp_upper=float(emp_upper),
        cert=cert,
        verdict=verdict,
        notes=tuple(dict.fromkeys(notes)),
    )


def _verdict(entries, cert, truncation, tail_unavailable, notes) -> str:
    if cert is None:
        return "inconclusive"
    upper_bad = any(e.ratio > cert.B + e.err_total for e in entries)
    lower_claimed = getattr(cert, "kind", "bessel") != "bessel" and cert.A > 0.0
    lower_bad = lower_claimed and any(e.ratio < cert.A - e.err_total for e in entries)
    if upper_bad:
        return "upper-violated"
    if lower_bad:
        if truncation is not None and truncation.kind == "discrete" and tail_unavailable:
            notes.append(
                "lower-bound shortfall attributed to truncation; downgraded"
            )
            return "inconclusive"
        return "lower-violated"
    if truncation is not None and tail_unavailable and lower_claimed:
        low_uncertain = any(e.ratio < cert.A for e in entries)
        if low_uncertain:
            notes.append("lower bound not certifiable under truncation")
            return "inconclusive"
    return "consistent"


def _transform_band(mu: MeasureExpr) -> float:
    """Oscillation frequency of t -> |weighted_transform(t)|^2 integrands."""
    try:
        return support_superset(mu).diameter()
    except InvalidMeasureError:
        return 1.0


# ---------------------------------------------------------------------------
# truncation allowances
# ---------------------------------------------------------------------------
def truncation_allowance(
    f: TestFunction, mu: MeasureExpr, truncation: TruncationInfo
) -> Optional[float]:
    """Certified bound on the frame-ratio numerator mass lost to truncation.

    Uses the bounded-variation decay ``|g_hat(t)| <= TV(g) / (2 pi |t|)``
    of the weighted integrand; None when ``mu`` has no BV density (the
    transform need not decay) or the test function kind is unsupported.
    """
    sv = density_sup_tv(mu)
    if sv is None:
        return None
    rho_sup, rho_tv = sv
    mass = total_mass(mu)
    T = float(truncation.threshold)
    smear = float(truncation.smear)
    wscale = float(truncation.weight_scale)

    if isinstance(f, TrigPolynomial):
        c = np.abs(np.asarray(f.coefs, dtype=complex))
        k = np.abs(np.asarray(f.freqs, dtype=float))
        if truncation.kind == "continuous":
            # Minkowski in L^2 over modes; per-mode L^2 tail of the decay bound
            d = np.maximum(T - k - smear, 0.5)
            per_mode = (rho_tv / _TWO_PI) * np.sqrt(2.0 / d)
            return wscale * float((c * per_mode).sum() ** 2)
        tail = _discrete_tail_trig(c, k, rho_tv, mass, T, smear)
        return None if tail is None else wscale * tail
    if isinstance(f, StepFunction):
        tv_total = f.tv_bound() * rho_sup + f.sup_bound() * rho_tv
        if truncation.kind == "continuous":
            return wscale * float(tv_total**2 / (2.0 * np.pi**2 * max(T, 1.0)))
        if T - smear <= 1.5:
            return None
        return wscale * float(2.0 * (tv_total / _TWO_PI) ** 2 / (T - smear - 1.0))
    return None


def _discrete_tail_trig(c, k, rho_tv, mass, T, smear, window: int = 4096):
    kmax = float(k.max(initial=0.0))
    n0 = int(math.floor(T)) + 1
    ns = np.arange(n0, n0 + window, dtype=float)
    total = 0.0
    for sign in (1.0, -1.0):
        dist = np.abs(sign * ns[:, None]) - k[None, :] - smear
        bound = np.minimum(mass, rho_tv / (_TWO_PI * np.maximum(dist, 0.5)))
        total += float(((bound @ c) ** 2).sum())
    n_rem = n0 + window
    denom = n_rem - kmax - smear - 1.0
    if denom <= 0:
        return None
    remainder = 2.0 * (c.sum() * rho_tv / _TWO_PI) ** 2 / denom
    return total + remainder


# ---------------------------------------------------------------------------
# exact bounds for atomic pairs (brute-force oracle)
# ---------------------------------------------------------------------------
def exact_frame_bounds_atomic(
    mu: Atomic, nu: Atomic, atom_cap: int = 512
) -> tuple[float, float]:
    """Exact frame bounds of a finite atomic pair.

    L^2(mu) is finite dimensional; the ratio is a Rayleigh quotient of a
    Hermitian positive-semidefinite form against the diagonal weight
    norm, so the bounds are the extreme eigenvalues of the
    weight-normalized form.
    """
    A, B, _ = _atomic_pencil(mu, nu, atom_cap, want_vectors=False)
    return A, B


def extremal_test_functions(
    mu: Atomic, nu: Atomic, atom_cap: int = 512
) -> tuple[float, float, PointValues, PointValues]:
    """Exact bounds plus point-value test functions achieving them."""
    A, B, vecs = _atomic_pencil(mu, nu, atom_cap, want_vectors=True)
    vmin, vmax = vecs
    fmin = PointValues(mu.points, tuple(vmin), label="eigen-min")
    fmax = PointValues(mu.points, tuple(vmax), label="eigen-max")
    return A, B, fmin, fmax


def _atomic_pencil(mu: Atomic, nu: Atomic, atom_cap: int, want_vectors: bool):
    if not isinstance(mu, Atomic) or not isinstance(nu, Atomic):
        raise InvalidMeasureError("exact bounds need atomic measures on both sides")
    n = len(mu.points)
    if n > atom_cap:
        raise RealizationTooLargeError(
            f"atomic pair has {n} atoms, oracle cap is {atom_cap}"
        )
    if n == 0 or len(nu.points) == 0:
        raise InvalidMeasureError("empty atomic measure")
    if mu.dim != nu.dim:
        raise InvalidMeasureError(
            f"dimension mismatch: mu is {mu.dim}-d, nu is {nu.dim}-d"
        )
    X = mu.points_matrix()
    w = mu.weights_array()
    lam = nu.points_matrix()
    cw = nu.weights_array()
    phases = lam @ X.T
    E = np.sqrt(cw)[:, None] * np.exp(-2j * np.pi * phases) * np.sqrt(w)[None, :]
    M = E.conj().T @ E
    M = 0.5 * (M + M.conj().T)
    if want_vectors:
        vals, vecs = np.linalg.eigh(M)
        fmin = vecs[:, 0] / np.sqrt(w)
        fmax = vecs[:, -1] / np.sqrt(w)
        return float(vals[0]), float(vals[-1]), (fmin, fmax)
    vals = np.linalg.eigvalsh(M)
    return float(vals[0]), float(vals[-1]), None


# ---------------------------------------------------------------------------
# deterministic test families
# ---------------------------------------------------------------------------
def gen_test_family(
    mu: MeasureExpr,
    kind: str,
    count: int,
    max_degree: int,
    seed: int,
) -> list[TestFunction]:
    """Deterministic family of test functions; always includes the constant."""
    if count < 1:
        raise InvalidMeasureError("family count must be >= 1")
    rng = np.random.default_rng(seed)
    family: list[TestFunction] = []
    if kind == "trig":
        family.append(TrigPolynomial((0,), (1.0 + 0.0j,), label="trig-000-const"))
        freqs = tuple(range(-int(max_degree), int(max_degree) + 1))
        for i in range(1, count):
            coefs = tuple(_unit_disc(rng, len(freqs)))
            family.append(TrigPolynomial(freqs, coefs, label=f"trig-{i:03d}"))
        return family
    if kind == "step":
        lo, hi = support_superset(mu).hull()
        if hi <= lo:
            raise InvalidMeasureError("step families need an interval support")
        family.append(StepFunction((lo, hi), (1.0 + 0.0j,), label="step-000-const"))
        for i in range(1, count):
            pieces = int(rng.integers(2, 7))
            cuts = np.sort(rng.uniform(lo, hi, size=pieces - 1))
            breaks = (lo, *cuts.tolist(), hi)
            values = tuple(_unit_disc(rng, pieces, min_modulus=0.05))
            family.append(StepFunction(breaks, values, label=f"step-{i:03d}"))
        return family
    if kind == "random-point-values":
        if not isinstance(mu, Atomic):
            raise InvalidMeasureError("point-value families need an atomic measure")
        npts = len(mu.points)
        family.append(
            PointValues(mu.points, (1.0 + 0.0j,) * npts, label="pv-000-const")
        )
        for i in range(1, count):
            values = _unit_disc(rng, npts)
            while np.sum(np.abs(values) ** 2) < 1e-12 * npts:
                values = _unit_disc(rng, npts)
            family.append(PointValues(mu.points, tuple(values), label=f"pv-{i:03d}"))
        return family
    raise InvalidMeasureError(f"unknown family kind {kind!r}")


def _unit_disc(rng, size, min_modulus: float = 0.0):
    r = np.sqrt(rng.uniform(min_modulus**2, 1.0, size=size))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=size)
    return r * np.exp(1j * theta)


# ---------------------------------------------------------------------------
# approximate-identity stability
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LimitCheckEntry:
    n: int
    report: FrameReport


@dataclass(frozen=True)
class LimitCheckReport:
    entries: tuple[LimitCheckEntry, ...]
    all_consistent: bool
    max_drift: float
    drift_budget: float
    drift_ok: bool


def approx_identity_limit_check(
    pair,
    kind: str,
    n_list: Sequence[int],
    family: Sequence[TestFunction],
    req: TransformRequest | None = None,
) -> LimitCheckReport:
    """Verify cert stability of (mu, nu * rho_n) across an identity family.

    Convolving the frame measure with probability measures must keep the
    certificate valid, so all verdicts should be consistent and the
    empirical bounds should not drift beyond the combined error terms.
    """
    from .measures import approximate_identity  # local to avoid import noise

    req = req or TransformRequest()
    entries = []
    for n in n_list:
        rho = approximate_identity(kind, n)
        smeared = None
        if pair.truncation is not None:
            smeared = TruncationInfo(
                pair.truncation.kind,
                pair.truncation.threshold,
                pair.truncation.smear + support_superset(rho).radius(),
            )
        rep = estimate_bounds(
            pair.mu,
            Convolve(pair.nu, rho),
            family,
            req=req,
            cert=pair.cert,
            truncation=smeared,
        )
        entries.append(LimitCheckEntry(int(n), rep))
    if not entries:
        return LimitCheckReport((), True, 0.0, 0.0, True)
    all_consistent = all(e.report.verdict == "consistent" for e in entries)
    budgets = [
        max(r.err_total for r in e.report.ratios) for e in entries
    ]
    first = entries[0]
    max_drift = 0.0
    drift_budget = 0.0
    for e, b in zip(entries[1:], budgets[1:]):
        drift = max(
            abs(e.report.emp_upper - first.report.emp_upper),
            abs(e.report.emp_lower - first.report.emp_lower),
        )
        max_drift = max(max_drift, drift)
        drift_budget = max(drift_budget, b + budgets[0])
    return LimitCheckReport(
        entries=tuple(entries),
        all_consistent=bool(all_consistent),
        max_drift=float(max_drift),
        drift_budget=float(drift_budget),
        drift_ok=bool(max_drift <= drift_budget + 1e-12),
    )
