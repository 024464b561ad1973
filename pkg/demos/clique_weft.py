"""The weft-1 clique formula: structure, bounded sum and normal form.

Run with ``python3 demos/clique_weft.py``.
"""

from __future__ import annotations

from paramcirc.families import Graph, VariableLayout, clique_eval, gen_clique, gen_clique_weft1
from paramcirc.polyoracle import expand
from paramcirc.sums import bounded_sum_eval, bounded_sum_poly
from paramcirc.transforms import weft1_normal_form

n, k = 4, 3
c, spec = gen_clique_weft1(n, k)
m = c.metrics
print(f"weft-1 clique formula for n={n}, k={k}: size {m.size}, depth {m.depth}, weft {m.weft}")

# summing the body over all 0/1 selectors with exactly k ones recovers the clique polynomial
assert bounded_sum_poly(spec) == gen_clique(n, k)
print(f"bounded sum equals the clique polynomial ({len(gen_clique(n, k))} monomials)")

# on a concrete graph with unit node weights the sum counts k-cliques
G = Graph(4, frozenset({(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)}))
x = VariableLayout(n).point_from_graph(G)
count = bounded_sum_eval(spec, x).value
print(f"triangles in the diamond graph: {count} (direct count {clique_eval(G.adjacency(), [1] * n, k)})")

nf = weft1_normal_form(c)
nf.check()
sizes = [len(nf.gates_in_layer(layer)) for layer in range(1, 6)]
print(f"five-layer normal form: gates per layer {sizes}, equal polynomial: {expand(nf.circuit) == expand(c)}")
