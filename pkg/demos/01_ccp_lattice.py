"""
The cubic close-packed arrangement
==================================

Sphere centres of the ccp packing of order ``p`` sit at ``sqrt2 * (i, j, k)``
with ``0 <= i, j, k <= p - 1`` and ``i + j + k`` even.  Working in lattice
units keeps every coordinate an integer, so distances are exact.
"""
import numpy as np

from spherepack import apply_pattern, g, gen_ccp, split_layer
from spherepack.lattice import lattice_min_sq_distance, lattice_span, mobile_spheres

# %%
# Counts grow like ``p^3 / 2``.
for p in range(2, 9):
    print(f"p={p}: g(p)={g(p)}")

# %%
# Nearest neighbours are at squared lattice distance 2, i.e. Euclidean
# distance 2 once scaled by sqrt2, and the bounding cube has edge (p-1)*sqrt2.
pk = gen_ccp(4)
print("min squared lattice distance:", lattice_min_sq_distance(pk.lattice))
print("lattice span:", lattice_span(pk.lattice))
print("exact D^2 in Euclidean units:", pk.edge_sq_euclidean())

# %%
# The outer shell G_p minus G_(p-1) splits into three parts that are
# translated in stages by the explicit construction.
L1, L2, L3 = split_layer(4)
print("shell sizes:", len(L1), len(L2), len(L3))

# %%
# The ccp packing is jammed: no sphere can move.  Removing ``r`` spheres
# frees a few of them, which is where the local search starts.
s = apply_pattern(4, 2)
free = mobile_spheres(s.lattice, 4)
print("n =", s.n, "mobile spheres:", [tuple(s.lattice[i]) for i in free])

arr = s.as_array() * np.sqrt(2)
print("float bounding box:", arr.min(axis=0), arr.max(axis=0))
