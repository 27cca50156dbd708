"""
State sets and their entanglement
=================================

Builds the Fourier sets, the 4x4 sign set and the non-maximal family, and
prints Schmidt data for each member.
"""

# %%
import numpy as np

from locdisc import (
    NonMaxParams,
    average_entanglement,
    entanglement_entropy,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    gen_nonmax_set,
    schmidt_coefficients,
)

np.set_printoptions(precision=4, suppress=True)

# %%
# The qutrit set: three Fourier-phased maximally entangled states and |01>.
s3 = gen_canonical_set(3)
for i, x in enumerate(s3):
    print(i, schmidt_coefficients(x), f"{entanglement_entropy(x):.4f} ebits")

# Members are orthogonal because 1 + w + w^2 = 0.
print(np.abs(s3.gram()))

# %%
# Average entanglement falls when the entangled members are not maximal.
print("qutrit set  ", average_entanglement(s3))
print("4x4 signs   ", average_entanglement(gen_hadamard_set_4x4()))
for t in (np.pi / 4, 0.6, 0.3, 0.1):
    p = NonMaxParams.from_angles(t, t, np.pi / 4, np.pi / 4)
    print(f"non-maximal t={t:.3f}", average_entanglement(gen_nonmax_set(p)))
