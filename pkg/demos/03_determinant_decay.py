"""
How fast the information determinant dies off
=============================================

Along every ray beta = r u the determinant of X'MW(ru)X goes to zero. The
largest value over the sphere of radius r shrinks roughly like exp(-c r),
which is what keeps the penalized likelihood from creeping off to infinity.
"""
import numpy as np

from firthfit import Dataset, LinkKind
from firthfit.harness import SphereScanConfig, decay_curve, well_spread_design

cfg = SphereScanConfig(samples=2048)
X = well_spread_design(3, 3, seed=1)
ds = Dataset(X, np.zeros(3, dtype=int), np.ones(3, dtype=int))

for link in LinkKind:
    rep = decay_curve(ds, link, cfg)
    # log10 of the supremum; probit drops below the double range by r = 40
    sups = "  ".join(f"r={r:>2.0f}: {v / np.log(10):8.2f}"
                     for r, v in zip(rep.radii, rep.log_sup))
    print(f"{link.value:8s} log10 sup {sups}")
    print(f"{'':8s} rate {rep.decay_rate:.3f}, a*c = {rep.a * rep.c:.3f}, "
          f"bound holds at every sampled direction: {all(rep.bound_ok)}")

####################################################################
# A taller design decays at least as fast; the bound is now checked on the
# full subset expansion instead of a single product of weights.

X = well_spread_design(6, 2, seed=1)
ds = Dataset(X, np.zeros(6, dtype=int), np.ones(6, dtype=int))
rep = decay_curve(ds, "logit", cfg)
print("n=6, p=2 logit:", [f"{s:.2e}" for s in rep.sup])
