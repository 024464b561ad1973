"""Support components through Boolean-arithmetic formulas.

A random weft-1 circuit is put into five-layer normal form, then the sum of
its monomials with support size exactly k is computed two ways: by expanding
the circuit, and by evaluating a Boolean-arithmetic formula built from the
normal form without expansion.
"""

from __future__ import annotations

from paramcirc.boolarith import ba_eval, build_spc_ba
from paramcirc.polyoracle import expand, spc, spc_by_inclusion_exclusion
from paramcirc.suites import weft1_corpus
from paramcirc.transforms import weft1_normal_form

# the richest corpus circuit that still expands to at most 60 monomials
c, f = max(((c, expand(c)) for c in weft1_corpus(seed=1, count=20)), key=lambda cf: len(cf[1]) if len(cf[1]) <= 60 else 0)
print(f"circuit over {c.n_vars} variables, size {c.metrics.size}, {len(f)} monomials")
nf = weft1_normal_form(c)
for k in range(4):
    ba = build_spc_ba(nf, k, at_ones=True)
    got = ba_eval(ba, [0] * c.n_vars).value
    want = spc(f, k)([1] * c.n_vars)
    print(f"k={k}: BA formula {got}, expanded {want}, parts {ba.info['parts']}")
    assert got == want
if c.n_vars <= 6:
    assert spc_by_inclusion_exclusion(f, 2) == spc(f, 2)
    print("inclusion-exclusion over restrictions agrees for k=2")
