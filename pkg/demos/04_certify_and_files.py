"""
Packing files and exact certificates
====================================

Packings are stored as plain decimal text.  The certifier reads the decimals
as exact rationals, so its verdict does not depend on floating point.
"""
import tempfile
from pathlib import Path

from spherepack import SearchConfig, certify, gen_ccp, improve
from spherepack.io import read_packing, render_packing, write_packing

tmp = Path(tempfile.mkdtemp())

# %%
# The ccp packing itself is valid but not an improvement.
pf = render_packing(gen_ccp(4), 20)
write_packing(tmp / "ccp4.txt", pf)
print((tmp / "ccp4.txt").read_text().splitlines()[:8])
print(certify(read_packing(tmp / "ccp4.txt").rows, 4).verdict.value)

# %%
# An optimizer result round-trips through a file and keeps its verdict.
rep = improve(4, 3, SearchConfig(seed=1, digits=20, max_iterations=3000))
write_packing(tmp / "n29.txt", render_packing(rep.packing))
cert = certify(read_packing(tmp / "n29.txt").rows, 4)
print("\n".join(cert.lines()))

# %%
# Nudging one coordinate by 1e-5 towards a neighbour breaks validity.
rows = [list(r) for r in pf.rows]
rows[0][0] = "0.00001"
print(certify(rows, 4).verdict.value)
