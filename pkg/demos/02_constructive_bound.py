"""
Explicit improved packings and the bound I_p
============================================

Removing two spheres from the ccp packing of order ``p`` and sliding the
outer shell inwards in three stages shrinks the container by ``tau3(p)``.
The three translation lengths satisfy a doubly exponential recurrence, so
the working precision grows quickly with ``p``.
"""
from spherepack import build_Pp, certify, lower_bound_I, precision_schedule, quartic_root_a, tau_recurrence
from spherepack.certifier import inflate_to_valid

# %%
# The recurrence is seeded by the positive root of a^4 + 4a^3 + 8a^2 - 8.
print("a =", quartic_root_a(30).to_string(20))

# %%
# Digits needed per order, and the tau values at p = 3, 4.
for p in range(3, 7):
    print(f"p={p}: {precision_schedule(p)} digits")
for t in tau_recurrence(4):
    print(f"p={t.p}: tau1={t.tau1.to_string(4)} tau2={t.tau2.to_string(4)} tau3={t.tau3.to_string(4)}")

# %%
# Each saving translates into a guaranteed gain over the ccp separation.
for p in (3, 4, 5):
    print(f"I_{p} >= {lower_bound_I(p).to_string(4, 'down')}")

# %%
# Build the packing for p = 4 and certify it with exact rationals after
# rounding coordinates outward to 200 decimal places.
cp = build_Pp(4)
rows = inflate_to_valid(cp.points, 200)
cert = certify(rows, 4)
print("\n".join(cert.lines()))
