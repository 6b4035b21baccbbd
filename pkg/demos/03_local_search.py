"""
Seeded local search from a ccp pattern
======================================

The search picks a sphere and a lattice direction, computes the interval of
feasible displacements exactly (a union of complements of quadratic
violation intervals, clipped to the current box), and moves the sphere to
the midpoint of the segment containing its position.  Spheres pinned at
the box faces drift inwards, so the edge shrinks monotonically.
"""
from spherepack import SearchConfig, apply_pattern, feasible_segments, improve, move_sphere
from spherepack.optimizer import default_digits, prepare_start

# %%
# A prepared start inflates the pattern slightly so every contact has slack.
start = prepare_start(apply_pattern(4, 3, 30), 30, seed=0)
print("n =", start.n, "edge =", float(start.edge()))

seg = feasible_segments(start, 0, (1, 0, 0))
print("feasible displacements of sphere 0 along x:", [(float(a), float(b)) for a, b in seg])
moved = move_sphere(start, 0, (1, 0, 0))
print("after one move:", [float(c) for c in moved.points[0]])

# %%
# A full run for n = 29 at 20 digits; the report is reproducible byte for byte.
cfg = SearchConfig(seed=0, digits=20, max_iterations=3000)
rep = improve(4, 3, cfg)
print("iterations:", rep.iterations, "moves:", rep.moves, "verdict:", rep.verdict)
print("improvement:", rep.improvement)

# %%
# n = 30 needs about a hundred digits since the gain is near 1e-100.
print("suggested digits for (4, 2):", default_digits(4, 2))
