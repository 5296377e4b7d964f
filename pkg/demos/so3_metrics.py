"""Closed geodesics of the naturally reductive metrics on SO(3).

The metric with parameters (alpha, A) scales the two equatorial directions by
alpha and the axis by A.  Periods come in three families: Type I circles in
the equatorial plane, Type II circles about the axis, and Type III geodesics
labelled by coprime (p, q).  Every predicted period is checked by
integrating the Euler equations and returning to the identity.
"""

import math

import numpy as np

from artifact import oracle
from artifact.so3nat import SO3Metric, classify_cleanliness, length_spectrum, type3_velocity

metric = SO3Metric(1, "1/2")
print("periods for alpha = 1, A = 1/2 (squared length in units of the base circle)")
for period in length_spectrum(metric, 6, morse="exact"):
    labels = ", ".join(f"{c.type}{c.pq or ''}" for c in period.components) or "trivial"
    print(f"  {str(period.len2_coeff):>4}: {labels}")

verdict = classify_cleanliness(metric)
print(f"clean: {verdict.clean}; unclean Type II periods up to 40: "
      f"{[str(x) for x in verdict.unclean_period_coeffs(40)]}")

# the first Type III geodesic closes exactly at its predicted length
inertia = oracle.Inertia.of(metric)
length = math.sqrt(5) * oracle.ELL0
state = oracle.euler_flow(inertia, type3_velocity(metric, 1, 2), length)
print(f"Type III (1, 2) closure error after one period: {np.abs(state.attitude - np.eye(3)).max():.2e}")
