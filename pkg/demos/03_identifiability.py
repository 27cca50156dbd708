"""
Which members can be identified without a resource?
===================================================

A member is conclusively identifiable by local means only if some product
vector is orthogonal to every other member but not to it.  In 2x2 this is
decided exactly; otherwise a seeded search bounds the best overlap.
"""

# %%
from locdisc import (
    SearchConfig,
    WitnessProblem,
    certify_2x2,
    check_set,
    fails_necessary_condition,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    search_numeric,
)

# %%
s2 = gen_canonical_set(2)
for i in range(3):
    v = certify_2x2(WitnessProblem.from_set(s2, i))
    print(i, v.status, None if v.witness() is None else v.witness().amplitudes.round(3))

# %%
cfg = SearchConfig(samples=20_000, seed=1)
for name, s in (("qutrit", gen_canonical_set(3)), ("4x4 signs", gen_hadamard_set_4x4())):
    v = search_numeric(WitnessProblem.from_set(s, 0), cfg)
    print(f"{name}: {v.status}, max overlap {v.max_overlap:.1e}, evidence {v.evidence}")

# %%
verdicts = check_set(gen_canonical_set(3), cfg)
print([v.status for v in verdicts])
print("not perfectly distinguishable by LOCC:", fails_necessary_condition(verdicts))
