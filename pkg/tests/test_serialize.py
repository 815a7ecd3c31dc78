import json

import numpy as np
import pytest

from framemeasures import (
    Atomic,
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
    lebesgue_on,
    piecewise_constant_density,
    piecewise_polynomial_density,
)
from framemeasures.constructions import (
    BoundCert,
    CatalogConfig,
    ProvenanceStep,
    canonical_pairs,
    cantor_unit_digits,
    squared_transform_density,
)
from framemeasures.errors import ConfigError
from framemeasures.intervals import as_interval_union
from framemeasures.serialize import (
    cert_from_obj,
    cert_to_obj,
    density_from_obj,
    density_to_obj,
    fmt_real,
    measure_from_obj,
    measure_to_obj,
    pair_from_obj,
    pair_to_obj,
)


def full_tree():
    """A measure expression exercising every node kind."""
    phi = piecewise_constant_density([0.0, 1 / 3, 1.0], [0.5, 2.0])
    return Sum(
        Restrict(
            as_interval_union((0.0, 0.75)),
            Density(phi, lebesgue_on([(0.0, 0.5), (0.625, 1.0)])),
        ),
        Convolve(
            Scale(2.5, IfsInvariant(4, (0, 2), (0.5, 0.5))),
            Translate((1.0 / 7.0,), Normalize(atomic([(0.1, 0.2), (0.9, 1.8)]))),
        ),
    )


def test_measure_round_trip_every_node_kind():
    mu = full_tree()
    obj = measure_to_obj(mu)
    # round-trip must survive a JSON text cycle byte-for-byte
    text = json.dumps(obj, sort_keys=True)
    back = measure_from_obj(json.loads(text))
    assert back == mu
    assert measure_to_obj(back) == obj


def test_reals_serialize_to_17_significant_digits():
    mu = atomic([(1 / 3, 2 / 7)])
    obj = measure_to_obj(mu)
    point = obj["atoms"][0]["point"]
    assert point == format(1 / 3, ".17g")
    assert float(point) == 1 / 3


def test_multidimensional_atom_round_trip():
    mu = Atomic(((0.0, 1.0), (0.5, -2.0)), (1.0, 2.0))
    back = measure_from_obj(measure_to_obj(mu))
    assert back == mu


def test_unknown_node_tag_is_named_error():
    with pytest.raises(ConfigError, match="unknown node tag 'zeta'"):
        measure_from_obj({"node": "zeta"})


def test_missing_field_is_reported():
    with pytest.raises(ConfigError, match="missing field"):
        measure_from_obj({"node": "scale", "alpha": "2.0"})


def test_density_forms_round_trip():
    pw = piecewise_constant_density([0.0, 0.5, 1.0], [0.5, 2.0])
    assert density_from_obj(density_to_obj(pw)) == pw
    poly = piecewise_polynomial_density([((0.0, 1.0), (1.0, 0.5))], 1.0, 1.5)
    back = density_from_obj(density_to_obj(poly))
    xs = np.linspace(0, 1, 7)
    assert np.allclose(back(xs), poly(xs))


def test_closed_form_density_round_trip_by_label():
    dens = squared_transform_density(cantor_unit_digits(), ((0.0, 1.0),), depth=16)
    back = density_from_obj(density_to_obj(dens))
    xs = np.linspace(0, 1, 9)
    assert np.allclose(back(xs), dens(xs))
    assert back.lower == dens.lower


def test_cert_round_trip_with_provenance():
    cert = BoundCert(
        0.5,
        2.0,
        "frame",
        (
            ProvenanceStep.make("plancherel-base", A=1.0, B=1.0, source="x"),
            ProvenanceStep.make("density-restrict-envelope", lower=0.5, upper=2.0),
        ),
    )
    back = cert_from_obj(cert_to_obj(cert))
    assert back == cert


def test_pair_round_trip_with_truncation():
    pair = canonical_pairs(CatalogConfig(comb_halfwidth=4, window_halfwidth=8.0))[1]
    back = pair_from_obj(pair_to_obj(pair))
    assert back.mu == pair.mu
    assert back.nu == pair.nu
    assert back.cert == pair.cert
    assert back.truncation == pair.truncation


def test_fmt_real_round_trips_floats():
    for x in (1 / 3, 0.1, 2.0**-52, 1e300, -7.25):
        assert float(fmt_real(x)) == x
