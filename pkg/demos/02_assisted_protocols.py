"""
Discrimination with one shared EPR pair
=======================================

Attaches an EPR pair to each set, runs the matching protocol tree branch by
branch and checks which protocols collapse to fixed local measurements.
"""

# %%
from locdisc import (
    NonMaxParams,
    attach_resource,
    build_assisted_tree,
    build_hadamard_tree,
    build_nonmax_tree,
    build_teleportation_tree,
    classify_adaptivity,
    epr,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    gen_nonmax_set,
    run_tree,
    verify_perfect_discrimination,
)

# %%
# Branches of the qutrit protocol on the product member |01>: it always lands
# in a context where Alice and Bob see different split outcomes.
tree = build_assisted_tree(3)
lifted = attach_resource(gen_canonical_set(3), epr())
for b in run_tree(tree, lifted[3])[:4]:
    print(b.transcript, round(b.probability, 4), "->", b.decode)

# %%
p = NonMaxParams.from_angles(0.4, 1.0, 0.7, 0.2)
cases = {
    "fourier d=4": (build_assisted_tree(4), gen_canonical_set(4)),
    "4x4 signs": (build_hadamard_tree(), gen_hadamard_set_4x4()),
    "non-maximal": (build_nonmax_tree(p), gen_nonmax_set(p)),
    "teleportation": (build_teleportation_tree(), gen_canonical_set(2)),
}
for name, (tree, s) in cases.items():
    r = verify_perfect_discrimination(tree, attach_resource(s, epr()))
    kind = classify_adaptivity(tree).kind
    print(f"{name:14s} perfect={r.perfect} {kind}")

# %%
# A flattenable tree is one fixed measurement per party; the flat version is
# just as good.
flat = classify_adaptivity(build_hadamard_tree()).flat
print(len(flat.alice.labels), "outcomes per party")
print(verify_perfect_discrimination(flat, attach_resource(gen_hadamard_set_4x4(), epr())).perfect)
