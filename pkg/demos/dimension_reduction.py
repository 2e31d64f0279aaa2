"""Bach divergence in dimensions 3, 4 and 5, and which coefficient survives.

B_ik = (nabla_j C_ijk - R_jl W_ijkl) / (n-2).  Its divergence is a multiple of
C_jli R_jl; we measure the multiple directly, point by point, and compare with
-(n-4)/(n-2)^2 and with -(n-4)/(n-2).
"""

from __future__ import annotations

import numpy as np

from ril.catalog import SamplePlan, catalog_get, sample_points
from ril.identities import EvalContext

for n in (3, 4, 5):
    fam = catalog_get(f"polynomial-perturb-{n}", eps=0.3)
    ratios = []
    for p in sample_points(fam, SamplePlan(4, seed=1)):
        v = EvalContext(fam, p, order=5).v
        div_b = v.ctr("kik->i", v.dB)
        cr = v.ctr("jli,jl->i", v.C, v.Ric)
        ratios.append(float(div_b @ cr / (cr @ cr)))
    print(f"n = {n}: fitted {np.mean(ratios): .6f} (spread {np.ptp(ratios):.1e}); "
          f"-(n-4)/(n-2)^2 = {-(n - 4) / (n - 2) ** 2: .6f}, -(n-4)/(n-2) = {-(n - 4) / (n - 2): .6f}")
