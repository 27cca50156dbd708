"""
Weakly entangled resources
==========================

Any entangled pure state can be filtered into an EPR pair with some
probability; conditioned on success the assisted protocol is perfect.
"""

# %%
import numpy as np

from locdisc import (
    StateVector,
    build_assisted_tree,
    conversion_filter,
    gen_canonical_set,
    mc_assisted_discrimination,
    schmidt_coefficients,
    vidal_probability,
)

# %%
for lam in (0.5, 0.3, 0.2, 0.05):
    x = StateVector(2, 2, [np.sqrt(1 - lam), 0, 0, np.sqrt(lam)])
    (ok, p), (bad, q) = conversion_filter(x).apply(x)
    print(f"lambda2={lam:.2f}  p={vidal_probability(x):.2f}  success coeffs {schmidt_coefficients(ok).round(4)}")

# %%
weak = StateVector(2, 2, [np.sqrt(0.8), 0, 0, np.sqrt(0.2)])
r = mc_assisted_discrimination(gen_canonical_set(3), weak, build_assisted_tree(3), trials=20_000, seed=0)
print(f"estimate {r.estimate:.4f} +- {r.standard_error:.4f}, errors {r.error_rate}")
