"""
Separated data: the MLE runs away, the penalized fit does not
==============================================================

Two observations, one covariate, a failure at x = -1 and a success at
x = +1. Any positive slope classifies both correctly, so the likelihood keeps
rising as the slope grows and there is no finite maximum.
"""
import math

import numpy as np

from firthfit import Dataset, detect_separation, fit_mle, fit_penalized

ds = Dataset.binary([[-1.0], [1.0]], [0, 1])

####################################################################
# The LP detector finds a certificate direction before any fitting.

rep = detect_separation(ds)
print("separation:", rep.kind.value, "direction:", rep.direction)

####################################################################
# Plain maximum likelihood gives up with a divergence flag; the norm of its
# last iterate is large and still growing.

mle = fit_mle(ds)
print(f"MLE: status={mle.status.value} iterations={mle.iterations} "
      f"|beta|={np.linalg.norm(mle.beta_hat):.1f}")

####################################################################
# Adding half the log-determinant of the information pulls the estimate
# back. For this design the maximizer is log 5.

pen = fit_penalized(ds)
print(f"penalized: status={pen.status.value} beta_hat={pen.beta_hat[0]:.10f} "
      f"(log 5 = {math.log(5):.10f})")
print("hat diagonals:", pen.h, "sum:", pen.h.sum())

####################################################################
# Grouped counts work the same way. With no successes in five trials the
# intercept-only estimate is -log 11 instead of minus infinity.

zero = fit_penalized(Dataset([[1.0]], [0], [5]))
print(f"all-failure intercept: {zero.beta_hat[0]:.10f} vs {-math.log(11):.10f}")
