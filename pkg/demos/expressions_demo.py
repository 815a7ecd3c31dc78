"""Building measure expressions and realizing them as point masses.

Walks through the leaf types (intervals, atoms, IFS invariant measures),
the combinators, and the invariants the library maintains for each.
"""

import numpy as np

from framemeasures import (
    Convolve,
    IfsInvariant,
    Normalize,
    approximate_identity,
    atomic,
    lebesgue_on,
    realize_atomic,
    support_superset,
    total_mass,
    validate,
)

# Lebesgue measure restricted to a union of intervals; overlapping pieces
# are merged at construction.
unit = lebesgue_on((0, 1))
print("unit interval mass:", total_mass(unit))

# A finite atomic measure and a probability rescaling of it.
nu = atomic([(0.0, 1.0), (0.5, 2.0), (1.25, 1.0)])
print("atomic mass:", total_mass(nu), "-> normalized:", total_mass(Normalize(nu)))

# The scale-4 Cantor measure with digits {0, 2}: the unique probability
# measure invariant under x -> x/4 and x -> (x + 2)/4.
cantor = IfsInvariant(4, (0, 2), (0.5, 0.5))
print("cantor support hull:", support_superset(cantor).hull())

# Unfolding the invariance equation three levels deep gives 8 atoms.
atoms = realize_atomic(cantor, depth=3)
print("depth-3 atoms:", [round(p[0], 5) for p in atoms.points])

# Convolution multiplies masses; realizations convolve pairwise and land
# on a shared midpoint lattice.
conv = Convolve(unit, Normalize(lebesgue_on((0, 0.5))))
print("convolution mass:", total_mass(conv))
grid = realize_atomic(conv, resolution=2.0**-5)
print("realized atoms:", len(grid.points), "mass:", float(np.sum(grid.weights)))

# Approximate identities: probability measures whose supports shrink to 0.
for n in (1, 2, 4, 8):
    rho = approximate_identity("i", n)
    print(f"rho_{n}: mass={total_mass(rho)}, support={support_superset(rho).hull()}")

# validate() reports invariant violations as data instead of raising.
bad = IfsInvariant(4, (0, 2), (0.5, 0.6))
print("violations:", validate(bad))
