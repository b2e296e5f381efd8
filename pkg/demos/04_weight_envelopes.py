"""
Weight envelopes
================

Each working weight is bounded by K / (1 + e^|z|). For logit K = 1 exactly.
For probit and cloglog the constant comes out of a grid scan.
"""
from firthfit import LinkKind
from firthfit.harness import check_weight_envelope, cloglog_g

for link in LinkKind:
    rep = check_weight_envelope(link)
    print(f"{link.value:8s} sup (1+e^|z|) w(z) = {rep.sup_f:.12f} at z = {rep.argmax_z:+.2f}; "
          f"K = {rep.envelope_constant:.12f}")

####################################################################
# The cloglog bound g tends to 1 on the right and 6 on the left.

for z in (-30.0, -5.0, 0.0, 5.0, 30.0):
    print(f"g({z:+.0f}) = {float(cloglog_g(z)):.9f}")
