"""Verifying frame inequalities: sampled ratios and the exact oracle.

The frame ratio of a test function f is the quadratic quotient whose
range over L^2(mu) is the frame-bound interval.  The verifier samples it
over deterministic families; for finite atomic pairs the exact interval
comes from a Hermitian eigenproblem.
"""

import numpy as np

from framemeasures import atomic, lebesgue_on, realize_atomic
from framemeasures.constructions import CatalogConfig, canonical_pairs, integer_comb
from framemeasures.transforms import TransformRequest
from framemeasures.verifier import (
    estimate_bounds,
    exact_frame_bounds_atomic,
    extremal_test_functions,
    frame_ratio,
    gen_test_family,
)

# Trigonometric polynomials against the unit interval and the integer
# comb: every ratio is exactly 1 (the comb is a Plancherel measure).
mu = lebesgue_on((0, 1))
nu = integer_comb(32)
family = gen_test_family(mu, "trig", 8, 10, seed=1)
report = estimate_bounds(mu, nu, family)
print("comb ratios:", [f"{e.ratio:.12f}" for e in report.ratios[:4]], "...")

# The catalog's Cantor pair, verified against its certificate.
pair = canonical_pairs(CatalogConfig(comb_halfwidth=64))[3]
mu_r = realize_atomic(pair.mu, depth=10)
family = gen_test_family(mu_r, "trig", 12, 6, seed=2)
report = estimate_bounds(
    mu_r, pair.nu, family, cert=pair.cert, truncation=pair.truncation
)
print(
    f"cantor pair: emp=[{report.emp_lower:.4f}, {report.emp_upper:.4f}], "
    f"verdict={report.verdict}"
)

# Exact bounds for a random atomic pair, with extremal test functions
# recovered from the eigenproblem and injected back as samples.
rng = np.random.default_rng(8)
mu_a = atomic(list(zip(rng.uniform(0, 1, 5), rng.uniform(0.2, 1, 5))))
nu_a = atomic(list(zip(rng.uniform(-4, 4, 9), rng.uniform(0.2, 1, 9))))
A, B, fmin, fmax = extremal_test_functions(mu_a, nu_a)
print(f"exact interval: [{A:.6f}, {B:.6f}]")
print("  injected minimizer ratio:", f"{frame_ratio(fmin, mu_a, nu_a).ratio:.6f}")
print("  injected maximizer ratio:", f"{frame_ratio(fmax, mu_a, nu_a).ratio:.6f}")

# Random samples always land inside the exact interval.
family = gen_test_family(mu_a, "random-point-values", 10, 0, seed=3)
report = estimate_bounds(mu_a, nu_a, family, req=TransformRequest())
inside = all(A - 1e-10 <= e.ratio <= B + 1e-10 for e in report.ratios)
print("all sampled ratios inside the exact interval:", inside)
print("oracle check:", exact_frame_bounds_atomic(mu_a, nu_a))
