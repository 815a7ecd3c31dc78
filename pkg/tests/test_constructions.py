import math

import numpy as np
import pytest

from framemeasures import (
    Convolve,
    Density,
    IfsInvariant,
    LebesgueOnSet,
    Normalize,
    Restrict,
    Scale,
    Sum,
    Translate,
    atomic,
    constant_density,
    lebesgue_on,
    piecewise_constant_density,
    realize_atomic,
    support_superset,
    total_mass,
)
from framemeasures.constructions import (
    BoundCert,
    CatalogConfig,
    CertifiedPair,
    ConstructionError,
    ProvenanceStep,
    bessel_finite_pair,
    canonical_pairs,
    cantor_even_digits,
    cantor_unit_digits,
    convolution_chain,
    convolve_frame_measure_with_probability,
    density_restrict,
    discrete_bessel,
    exact_pair,
    integer_comb,
    mix_frame_measures,
    replay_provenance,
    scale_base,
    scale_frame_measure,
    smooth_base,
    squared_transform_density,
    sum_bessel,
    sum_with_densities,
    translate_pair,
)
from framemeasures.measures import approximate_identity
from framemeasures.transforms import TransformRequest, ifs_transform_grid
from framemeasures.verifier import (
    estimate_bounds,
    exact_frame_bounds_atomic,
    gen_test_family,
)


def parseval_atomic_pair():
    """(mu on {0, 1/2} with weights 1/2, nu = delta_0 + delta_1): exact (1,1).

    The 2x2 form is the identity (hand computation), so the certificate
    is built directly rather than through the floating-point oracle.
    """
    mu = atomic([(0.0, 0.5), (0.5, 0.5)])
    nu = atomic([(0.0, 1.0), (1.0, 1.0)])
    cert = BoundCert(
        1.0,
        1.0,
        "plancherel",
        (ProvenanceStep.make("plancherel-base", A=1.0, B=1.0, source="two-atom-parseval"),),
    )
    return CertifiedPair(mu=mu, nu=nu, cert=cert)


def second_parseval_frame_measure():
    """nu' = delta_{1/2} + delta_{3/2} is also Parseval for the same mu."""
    mu = atomic([(0.0, 0.5), (0.5, 0.5)])
    nu = atomic([(0.5, 1.0), (1.5, 1.0)])
    A, B = exact_frame_bounds_atomic(mu, nu)
    assert abs(A - 1) < 1e-12 and abs(B - 1) < 1e-12
    cert = BoundCert(
        1.0,
        1.0,
        "plancherel",
        (ProvenanceStep.make("plancherel-base", A=1.0, B=1.0, source="shifted-comb"),),
    )
    return CertifiedPair(mu=mu, nu=nu, cert=cert)


def oracle_bounds(pair, **realize_kw):
    mu = realize_atomic(pair.mu, **realize_kw)
    nu = realize_atomic(pair.nu, **realize_kw)
    return exact_frame_bounds_atomic(mu, nu, atom_cap=4096)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------
def test_cert_kind_invariants():
    with pytest.raises(ConstructionError):
        BoundCert(0.5, 1.0, "bessel")
    with pytest.raises(ConstructionError):
        BoundCert(0.5, 1.0, "tight")
    with pytest.raises(ConstructionError):
        BoundCert(2.0, 2.0, "plancherel")
    with pytest.raises(ConstructionError):
        BoundCert(2.0, 1.0, "frame")
    BoundCert(0.0, 1.0, "bessel")
    BoundCert(2.0, 2.0, "tight")


def test_certified_pair_validates_measures():
    with pytest.raises(ConstructionError):
        CertifiedPair(
            mu=IfsInvariant(4, (0, 2), (0.5, 0.6)),
            nu=atomic([(0, 1)]),
            cert=BoundCert(0.0, 1.0, "bessel"),
        )


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------
def test_catalog_has_four_plancherel_pairs():
    pairs = canonical_pairs(CatalogConfig(comb_halfwidth=8, window_halfwidth=16.0))
    assert len(pairs) == 4
    for p in pairs:
        assert p.cert.kind == "plancherel"
        assert (p.cert.A, p.cert.B) == (1.0, 1.0)


def test_catalog_pair2_requires_E_in_unit_cube():
    with pytest.raises(ConstructionError):
        canonical_pairs(CatalogConfig(E=((0.0, 2.0),)))


def test_catalog_discrete_dual_weight_at_zero_is_one():
    pairs = canonical_pairs(CatalogConfig(comb_halfwidth=4, window_halfwidth=8.0))
    nu2 = pairs[3].nu
    idx = [p[0] for p in nu2.points].index(0.0)
    assert nu2.weights[idx] == pytest.approx(1.0, abs=1e-12)


def test_catalog_discrete_dual_drops_exact_zeros():
    pairs = canonical_pairs(CatalogConfig(comb_halfwidth=8, window_halfwidth=8.0))
    pts = [p[0] for p in pairs[3].nu.points]
    # the squared transform vanishes at n = 2 (mod 4): 2, 6, -2, -6, ...
    for n in (2.0, -2.0, 6.0, -6.0):
        assert n not in pts


def test_squared_transform_density_envelope():
    dens = squared_transform_density(cantor_unit_digits(), ((0.0, 1.0),), depth=24)
    assert 0 < dens.lower < 1
    assert dens.upper == 1.0
    ts = np.linspace(0, 1, 100)
    vals, _ = ifs_transform_grid(cantor_unit_digits(), ts, 24)
    assert np.allclose(dens(ts), np.abs(vals) ** 2)


# ---------------------------------------------------------------------------
# elementary certificates
# ---------------------------------------------------------------------------
def test_bessel_finite_pair_probability():
    cert = bessel_finite_pair(Normalize(lebesgue_on((0, 1))), atomic([(0, 1)]))
    assert cert.B == 1.0
    assert cert.kind == "bessel"


def test_bessel_finite_pair_product():
    cert = bessel_finite_pair(atomic([(0, 3)]), atomic([(1, 2)]))
    assert cert.B == 6.0


def test_bessel_finite_pair_symmetry():
    mu, nu = lebesgue_on((0, 3)), atomic([(0, 2)])
    assert bessel_finite_pair(mu, nu).B == bessel_finite_pair(nu, mu).B


def test_discrete_bessel_single_atom():
    pair = discrete_bessel([0.0], 1.0, Normalize(lebesgue_on((0, 1))))
    assert pair.nu.points == ((0.0,),)
    assert pair.nu.weights == (1.0,)
    assert pair.cert.B == 1.0


def test_discrete_bessel_budget_equality():
    mu = atomic([(0.0, 1.0), (0.5, 1.0)])  # mass 2
    pair = discrete_bessel([0.0, 1.0, 2.0], 6.0, mu)
    assert all(w == pytest.approx(1.0) for w in pair.nu.weights)
    assert math.fsum(pair.nu.weights) == pytest.approx(pair.cert.B / total_mass(mu))


def test_discrete_bessel_exact_oracle_bound():
    mu = atomic([(0.0, 0.5), (0.5, 0.5)])
    pair = discrete_bessel([0.0], 1.0, mu)
    A, B = exact_frame_bounds_atomic(pair.mu, pair.nu)
    assert B <= pair.cert.B + 1e-12
    assert B == pytest.approx(1.0, abs=1e-12)  # constant f maximizes the 1-d form


def test_discrete_bessel_rejects_bad_budget():
    with pytest.raises(ConstructionError):
        discrete_bessel([0.0], -1.0, atomic([(0, 1)]))


def test_sum_bessel_examples():
    assert sum_bessel(BoundCert(0, 1, "bessel"), BoundCert(0, 1, "bessel")).B == 4.0
    assert sum_bessel(BoundCert(0, 4, "bessel"), BoundCert(0, 9, "bessel")).B == 25.0
    with pytest.raises(ConstructionError):
        BoundCert(0, 0.0, "bessel")  # nonpositive upper bounds are unrepresentable


# ---------------------------------------------------------------------------
# envelope transformers
# ---------------------------------------------------------------------------
def test_density_restrict_trivial_envelope_keeps_cert():
    pair = parseval_atomic_pair()
    out = density_restrict(pair, ((0.0, 0.75),), constant_density(1.0))
    assert (out.cert.A, out.cert.B) == (pair.cert.A, pair.cert.B)
    assert out.cert.kind == pair.cert.kind


def test_density_restrict_envelope_scales_bounds():
    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-1.0, 0.25, 1.0], [0.5, 2.0])
    out = density_restrict(pair, None, phi)
    assert (out.cert.A, out.cert.B) == (0.5, 2.0)
    assert out.cert.kind == "frame"


def test_density_restrict_exact_oracle_within_envelope():
    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-1.0, 0.25, 1.0], [0.5, 2.0])
    out = density_restrict(pair, None, phi)
    A, B = oracle_bounds(out)
    assert out.cert.A - 1e-9 <= A <= B <= out.cert.B + 1e-9


def test_density_restrict_rejects_bessel_cert():
    pair = discrete_bessel([0.0], 1.0, atomic([(0.0, 1.0)]))
    with pytest.raises(ConstructionError):
        density_restrict(pair, None, constant_density(1.0))


def test_scale_base_examples():
    pair = parseval_atomic_pair()
    out = scale_base(pair, 2.0)
    assert (out.cert.A, out.cert.B) == (2.0, 2.0)
    assert out.cert.kind == "tight"
    assert scale_base(pair, 1.0).cert == pair.cert


def test_scale_base_oracle_scales_linearly():
    pair = parseval_atomic_pair()
    out = scale_base(pair, 3.0)
    A, B = oracle_bounds(out)
    assert A == pytest.approx(3.0, abs=1e-9)
    assert B == pytest.approx(3.0, abs=1e-9)


def test_scale_frame_measure_examples():
    pair = parseval_atomic_pair()
    out = scale_frame_measure(pair, 2.0)
    assert (out.cert.A, out.cert.B) == (2.0, 2.0)
    trivial = scale_frame_measure(pair, constant_density(1.0))
    assert (trivial.cert.A, trivial.cert.B, trivial.cert.kind) == (1.0, 1.0, "plancherel")


def test_scale_frame_measure_density_oracle():
    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-0.5, 0.5, 1.5], [1.0, 4.0])
    out = scale_frame_measure(pair, phi)
    assert (out.cert.A, out.cert.B) == (1.0, 4.0)
    A, B = oracle_bounds(out)
    assert out.cert.A - 1e-9 <= A <= B <= out.cert.B + 1e-9


def test_mix_frame_measures_convexity():
    pair = parseval_atomic_pair()
    other = second_parseval_frame_measure()
    out = mix_frame_measures(pair, other, 0.5, 0.5)
    assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")


def test_mix_frame_measures_oracle():
    mu = atomic([(0.0, 0.5), (0.5, 0.5)])
    p1 = exact_pair(mu, atomic([(0.0, 1.0), (1.0, 1.0)]))
    p2 = exact_pair(mu, atomic([(0.0, 0.5), (3.0, 1.5)]))
    out = mix_frame_measures(p1, p2, 0.7, 0.4)
    A, B = oracle_bounds(out)
    assert out.cert.A - 1e-9 <= A <= B <= out.cert.B + 1e-9


def test_mix_requires_same_base():
    p1 = parseval_atomic_pair()
    p2 = exact_pair(atomic([(0.0, 1.0)]), atomic([(0.0, 1.0)]))
    with pytest.raises(ConstructionError):
        mix_frame_measures(p1, p2, 0.5, 0.5)


def test_convolve_with_point_mass_keeps_cert_and_bounds():
    pair = parseval_atomic_pair()
    out = convolve_frame_measure_with_probability(pair, atomic([(0.0, 1.0)]))
    assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")
    A, B = oracle_bounds(out)
    assert A == pytest.approx(1.0, abs=1e-9)
    assert B == pytest.approx(1.0, abs=1e-9)


def test_convolve_with_probability_rejects_non_probability():
    pair = parseval_atomic_pair()
    with pytest.raises(ConstructionError):
        convolve_frame_measure_with_probability(pair, atomic([(0.0, 2.0)]))


def test_convolve_with_identity_family_keeps_cert():
    pairs = canonical_pairs(CatalogConfig(comb_halfwidth=16, window_halfwidth=16.0))
    pair = pairs[1]
    for n in (1, 2, 4):
        out = convolve_frame_measure_with_probability(pair, approximate_identity("i", n))
        assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")
    fam = gen_test_family(pair.mu, "trig", 8, 4, seed=3)
    out = convolve_frame_measure_with_probability(pair, approximate_identity("i", 2))
    rep = estimate_bounds(
        out.mu, out.nu, fam, cert=out.cert, truncation=out.truncation
    )
    assert rep.verdict == "consistent"
    eps = max(e.err_total for e in rep.ratios)
    assert rep.emp_lower >= 1 - eps and rep.emp_upper <= 1 + eps


def test_translate_pair_examples():
    pair = parseval_atomic_pair()
    assert translate_pair(pair, 0.0) is pair
    out = translate_pair(pair, 5.0)
    assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")
    A, B = oracle_bounds(out)
    assert A == pytest.approx(1.0, abs=1e-9)
    assert B == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# convolution chains
# ---------------------------------------------------------------------------
def test_convolution_chain_trivial_density_keeps_plancherel():
    base = canonical_pairs(CatalogConfig(window_halfwidth=16.0))[0]
    out = convolution_chain(base, constant_density(1.0), [((0.0, 0.5),), ((0.0, 0.25),)])
    assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")
    assert isinstance(out.mu, Restrict)


def test_convolution_chain_envelope_bounds():
    base = canonical_pairs(CatalogConfig(comb_halfwidth=16))[1]
    phi = piecewise_constant_density([-4.0, 0.0, 4.0], [0.5, 2.0])
    out = convolution_chain(base, phi, [((0.0, 0.5),), ((0.0, 0.25),)])
    assert (out.cert.A, out.cert.B) == (0.5, 2.0)
    assert out.cert.kind == "frame"


def test_convolution_chain_unnormalized_multiplies_bounds():
    base = canonical_pairs(CatalogConfig(window_halfwidth=16.0))[0]
    out = convolution_chain(base, constant_density(1.0), [((0.0, 2.0),)], normalized=False)
    assert (out.cert.A, out.cert.B) == (2.0, 2.0)
    assert out.cert.kind == "tight"


def test_convolution_chain_window_covers_restriction():
    base = canonical_pairs(CatalogConfig(window_halfwidth=16.0))[0]
    phi = piecewise_constant_density([-8.0, 0.1, 8.0], [0.5, 2.0])
    out = convolution_chain(base, phi, [((0.0, 0.5),), ((0.0, 0.25),)])
    # the restricted mass equals the chain's density integrated over F
    mass = total_mass(out.mu)
    assert 0.5 * 1.0 <= mass <= 2.0 * 1.0


def test_convolution_chain_stage_cap():
    base = canonical_pairs(CatalogConfig(window_halfwidth=16.0))[0]
    with pytest.raises(ConstructionError):
        convolution_chain(
            base, constant_density(1.0), [((0.0, 0.5),)] * 9
        )


def test_convolution_chain_needs_indicator_base():
    pair = parseval_atomic_pair()
    with pytest.raises(ConstructionError):
        convolution_chain(pair, constant_density(1.0), [((0.0, 1.0),)])


# ---------------------------------------------------------------------------
# weighted-part sums
# ---------------------------------------------------------------------------
def test_sum_with_densities_bounds():
    pair = parseval_atomic_pair()
    out = sum_with_densities(pair, [(((0.0, 0.5),), constant_density(1.0))])
    assert (out.cert.A, out.cert.B) == (2.0, 2.0)
    assert out.cert.kind == "tight"


def test_sum_with_densities_empty_is_identity():
    pair = parseval_atomic_pair()
    assert sum_with_densities(pair, []) is pair


def test_sum_with_densities_oracle():
    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-1.0, 0.25, 1.0], [0.5, 2.0])
    out = sum_with_densities(pair, [(((0.0, 0.5),), phi)])
    A, B = oracle_bounds(out)
    assert out.cert.A - 1e-9 <= A <= B <= out.cert.B + 1e-9


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------
def test_smooth_base_trivial_density_keeps_cert():
    pair = parseval_atomic_pair()
    out = smooth_base(pair, constant_density(1.0), [approximate_identity("i", 2)])
    assert (out.cert.A, out.cert.B) == (1.0, 1.0)


def test_smooth_base_point_mass_shifts_density():
    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-10.0, 0.2, 10.0], [0.5, 2.0])
    out = smooth_base(pair, phi, [atomic([(0.25, 1.0)])])
    smoothed = out.mu.phi
    xs = np.array([-1.0, 0.0, 0.3, 0.41, 0.5, 1.0])
    assert np.allclose(smoothed(xs), phi(xs - 0.25))


def test_smooth_base_cantor_pair_bounds():
    pairs = canonical_pairs(CatalogConfig(comb_halfwidth=16, window_halfwidth=16.0))
    pair = pairs[3]
    phi = piecewise_constant_density([-50.0, 0.3, 50.0], [0.5, 2.0])
    out = smooth_base(pair, phi, [approximate_identity("ii", 4)])
    assert (out.cert.A, out.cert.B) == (0.5, 2.0)
    assert out.cert.kind == "frame"
    assert isinstance(out.mu, Density)
    assert out.mu.base == pair.mu


def test_smooth_base_needs_full_line_density():
    # piecewise polynomials vanish outside their pieces, so a bounded
    # domain cannot provide the full-line envelope smoothing requires
    from framemeasures import piecewise_polynomial_density

    pair = parseval_atomic_pair()
    poly = piecewise_polynomial_density([((0.0, 1.0), (1.0,))], 1.0, 1.0)
    with pytest.raises(ConstructionError):
        smooth_base(pair, poly, [])


# ---------------------------------------------------------------------------
# provenance
# ---------------------------------------------------------------------------
def test_replay_reproduces_bounds_after_chain():
    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-1.0, 0.25, 1.0], [0.5, 2.0])
    out = density_restrict(pair, None, phi)
    out = scale_base(out, 2.0)
    out = scale_frame_measure(out, 3.0)
    out = translate_pair(out, 1.0)
    assert replay_provenance(out.cert) == (out.cert.A, out.cert.B)


def test_replay_mix_and_chain_rules():
    base = canonical_pairs(CatalogConfig(window_halfwidth=16.0))[0]
    phi = piecewise_constant_density([-4.0, 0.0, 4.0], [0.5, 2.0])
    out = convolution_chain(base, phi, [((0.0, 0.5),)])
    out = convolve_frame_measure_with_probability(out, approximate_identity("i", 3))
    assert replay_provenance(out.cert) == (out.cert.A, out.cert.B)
    pair = parseval_atomic_pair()
    other = exact_pair(pair.mu, atomic([(0.5, 1.0), (1.5, 1.0)]))
    mixed = mix_frame_measures(pair, other, 0.25, 0.75)
    assert replay_provenance(mixed.cert) == (mixed.cert.A, mixed.cert.B)


def test_envelope_monotonicity():
    pair = parseval_atomic_pair()
    narrow = piecewise_constant_density([-1.0, 0.25, 1.0], [0.8, 1.25])
    wide = piecewise_constant_density([-1.0, 0.25, 1.0], [0.5, 2.0])
    pn = density_restrict(pair, None, narrow)
    pw = density_restrict(pair, None, wide)
    assert pw.cert.A <= pn.cert.A <= pn.cert.B <= pw.cert.B


def test_cert_invariance_under_probability_chain():
    pair = parseval_atomic_pair()
    out = pair
    for n in (1, 2, 3):
        out = convolve_frame_measure_with_probability(out, approximate_identity("i", n))
    assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")
    assert len(out.cert.provenance) == len(pair.cert.provenance) + 3


def test_mix_catalog_lebesgue_and_comb_pairs():
    """Half Lebesgue plus half the integer comb stays Plancherel for the
    same indicator base measure."""
    pairs = canonical_pairs(CatalogConfig(comb_halfwidth=16, window_halfwidth=16.0))
    assert pairs[0].mu == pairs[1].mu
    out = mix_frame_measures(pairs[0], pairs[1], 0.5, 0.5)
    assert (out.cert.A, out.cert.B, out.cert.kind) == (1.0, 1.0, "plancherel")
    assert isinstance(out.nu, Sum)


def test_smoothed_density_on_frame_measure_side():
    """Reweighting the frame measure by a smoothed envelope keeps the
    envelope bounds."""
    from framemeasures.constructions import smoothed_density

    pair = parseval_atomic_pair()
    phi = piecewise_constant_density([-10.0, 0.7, 10.0], [0.5, 2.0])
    rho = approximate_identity("ii", 8)
    smoothed = smoothed_density(phi, [rho])
    assert (smoothed.lower, smoothed.upper) == (0.5, 2.0)
    out = scale_frame_measure(pair, smoothed)
    assert (out.cert.A, out.cert.B) == (0.5, 2.0)
    xs = np.linspace(-2, 2, 33)
    assert (smoothed(xs) >= 0.5 - 1e-12).all() and (smoothed(xs) <= 2.0 + 1e-12).all()
