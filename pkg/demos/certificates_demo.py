"""Certificate arithmetic: the catalog and the pair transformers.

Every transformer produces a new certified pair whose bounds follow by
simple arithmetic from the inputs; the provenance trail replays to the
same bounds.
"""

from framemeasures import piecewise_constant_density
from framemeasures.constructions import (
    CatalogConfig,
    canonical_pairs,
    convolution_chain,
    convolve_frame_measure_with_probability,
    density_restrict,
    mix_frame_measures,
    replay_provenance,
    scale_base,
    translate_pair,
)
from framemeasures.measures import approximate_identity

# The catalog: baseline certified pairs, all Plancherel (A = B = 1).
pairs = canonical_pairs(CatalogConfig(comb_halfwidth=32, window_halfwidth=64.0))
for i, p in enumerate(pairs, 1):
    note = p.truncation.describe() if p.truncation else "exact"
    print(f"pair {i}: kind={p.cert.kind}, (A, B)=({p.cert.A}, {p.cert.B}) [{note}]")

# Restricting to an enveloped density multiplies the bounds by the
# envelope; scaling the base measure scales both bounds.
pair = pairs[1]
phi = piecewise_constant_density([-1.0, 0.5, 2.0], [0.5, 2.0])
step1 = density_restrict(pair, ((0.0, 1.0),), phi)
step2 = scale_base(step1, 3.0)
print("after restrict+scale:", (step2.cert.A, step2.cert.B), step2.cert.kind)

# Convolving the frame measure with any probability measure keeps the
# certificate; translation of the base does too.
step3 = convolve_frame_measure_with_probability(step2, approximate_identity("ii", 4))
step4 = translate_pair(step3, 2.5)
print("after convolve+translate:", (step4.cert.A, step4.cert.B))

# The provenance trail names each rule and replays to the same bounds.
for s in step4.cert.provenance:
    print("  rule:", s.rule)
print("replayed bounds:", replay_provenance(step4.cert))

# Mixing two frame measures for the same base mixes the bounds.
mixed = mix_frame_measures(pairs[1], pairs[1], 0.25, 0.75)
print("mix of a pair with itself:", (mixed.cert.A, mixed.cert.B), mixed.cert.kind)

# Convolution chains: the enveloped density convolved against normalized
# indicators keeps the envelope bounds stage after stage.
chain = convolution_chain(pairs[1], phi, [((0.0, 0.5),), ((0.0, 0.25),)])
print("two-stage chain:", (chain.cert.A, chain.cert.B), chain.cert.kind)
