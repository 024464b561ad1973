"""Circuits as cycle-cover sums, and the two iff-coupling gadgets.

The circuit x0 * x1 + 5 is turned into a weighted digraph whose filtered
cover sum, divided by the selector-clique normalization, is the circuit value.
The second half shows why the graded gadget exists: the drawn gadget breaks
once a cover must contain a cycle of a prescribed length.
"""

from __future__ import annotations

from paramcirc.circuit import CircuitBuilder
from paramcirc.cyclecover import CoverPattern, WeightedDigraph, circuit_to_cyclecover, coupling_identity_check

b = CircuitBuilder(2)
c = b.build(b.add(b.mul(b.input(0), b.input(1)), b.const(5)))
x = [3, 7]
for gadget in ("figure", "graded"):
    inst = circuit_to_cyclecover(c, k=1, point=x, gadget=gadget)
    print(f"{gadget:>6} gadget: {inst.graph.n} vertices, {len(inst.graph.edges)} edges, "
          f"normalized sum {inst.normalized_sum().value}, circuit value {c(x)}")

# two loops and a connecting edge; couple the loop at vertex 0 to the loop at vertex 1
g = WeightedDigraph.from_text("N 2 DIRECTED\nE 1 1 6\nE 1 2 7\nE 2 2 8\n")
for pattern in (CoverPattern(0, 10), CoverPattern(5, 10)):
    for gadget in ("figure", "graded"):
        r = coupling_identity_check(g, 2, [0], pattern, gadget=gadget)
        print(f"pattern k={pattern.k} c={pattern.c}, {gadget:>6}: ok={r.ok}")
