import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramcirc.circuit import (
    Add,
    Circuit,
    CircuitBuilder,
    CircuitError,
    Const,
    CycleDetected,
    DanglingChild,
    DenominatorZeroAtPoint,
    Div,
    EnumerationCapExceeded,
    Input,
    MalformedInput,
    Mul,
    MultipleOutputs,
    count_parse_trees,
    dumps,
    evaluate,
    from_unordered,
    loads,
    parse_trees,
    reorder,
    substitute,
)
from paramcirc.corpus import random_circuit, random_point


def test_single_input_is_valid():
    c = Circuit([Input(0)], 0, 1)
    assert c.metrics.size == 0 and c.metrics.depth == 0 and c.metrics.weft == 0


def test_self_reference_is_a_cycle():
    with pytest.raises(CycleDetected):
        Circuit([Input(0), Add(0, 1)], 1, 1)


def test_two_sinks():
    with pytest.raises(MultipleOutputs):
        Circuit([Input(0), Input(1)], 1, 2)


def test_dangling_child():
    with pytest.raises(DanglingChild):
        Circuit([Input(0), Add(0, 7)], 1, 1)


def test_cycle_in_unordered_gates():
    gates = {1: Add(2, 3), 2: Mul(1, 3), 3: Input(0), 4: Add(1, 3)}
    with pytest.raises(CycleDetected):
        from_unordered(gates, 4, 1)


def test_div_requires_flag():
    with pytest.raises(CircuitError):
        Circuit([Input(0), Const(1), Div(0, 1)], 2, 1, division_bearing=False)


def test_evaluate_examples():
    c = Circuit([Input(0), Input(1), Mul(0, 1)], 2, 2)
    assert evaluate(c, [2, 3]) == 6
    assert evaluate(Circuit([Const(5)], 0, 3), [7, 8, 9]) == 5


def test_denominator_zero():
    c = Circuit([Input(0), Const(1), Div(1, 0)], 2, 1)
    assert c.division_bearing
    with pytest.raises(DenominatorZeroAtPoint):
        c([0])
    assert evaluate(c, [2]) * 2 == 1


def test_weft_counts_unbounded_gates_on_paths():
    b = CircuitBuilder(4)
    xs = [b.input(i) for i in range(4)]
    s = b.add(*xs)  # fan-in 4 > 2
    t = b.mul(s, b.input(0), b.input(1))  # fan-in 3
    c = b.build(t)
    assert c.metrics.weft == 2
    assert c.metrics.depth == 2
    assert c.metrics.size == 7
    assert Circuit(c.gates, c.output, 4, fanin_bound=4).metrics.weft == 0


def test_bounded_fanin_has_weft_zero(rng):
    c = random_circuit(rng, n_vars=4, max_weft=0)
    assert c.metrics.weft == 0


def test_duplicate_children_square():
    c = Circuit([Input(0), Mul(0, 0)], 1, 1)
    assert c([7]) == 49
    assert c.metrics.size == 2


def test_round_trip_text(rng):
    for _ in range(20):
        c = random_circuit(rng, n_vars=5)
        text = dumps(c)
        assert dumps(loads(text)) == text
        assert loads(text) == c


def test_loads_accepts_unordered_ids():
    text = "VARS 2 FANIN 2 MODULUS 101\n7 MUL 3 5\n3 INPUT 0\n5 CONST 4\nOUTPUT 7\n"
    c = loads(text)
    assert c([10, 0]) == 40
    assert dumps(loads(dumps(c))) == dumps(c)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "VARS 1 FANIN 2\n0 INPUT 0\nOUTPUT 0\n",
        "VARS 1 FANIN 2 MODULUS 101\n0 FROB 0\nOUTPUT 0\n",
        "VARS 1 FANIN 2 MODULUS 101\n0 INPUT 0\n",
        "VARS 1 FANIN 2 MODULUS 100\n0 INPUT 0\nOUTPUT 0\n",
    ],
)
def test_malformed_text(text):
    with pytest.raises(MalformedInput):
        loads(text)


def _formula_sum_of_products():
    b = CircuitBuilder(4)
    l = b.add(b.input(0), b.input(1))
    r = b.add(b.input(2), b.input(3))
    return b.build(b.mul(l, r))


def test_parse_trees_examples():
    c = Circuit([Input(0), Input(1), Add(0, 1)], 2, 2)
    weights = sorted(w.value for _, w in parse_trees(c, [3, 5]))
    assert weights == [3, 5]
    c = Circuit([Input(0), Input(1), Mul(0, 1)], 2, 2)
    trees = list(parse_trees(c, [3, 5]))
    assert len(trees) == 1 and trees[0][1] == 15
    assert trees[0][0].selected == {0, 1, 2}


def test_parse_tree_structure():
    c = _formula_sum_of_products()
    trees = list(parse_trees(c, [1, 2, 3, 4]))
    assert len(trees) == 4 == count_parse_trees(c)
    for t, _ in trees:
        assert c.output in t.selected
        for g in t.selected:
            gate = c.gates[g]
            if gate.kind == "add":
                assert sum(ch in t.selected for ch in gate.children) == 1
                assert t.choice[g] in gate.children
            elif gate.kind == "mul":
                assert all(ch in t.selected for ch in gate.children)


def test_parse_trees_sum_to_value(rng):
    from paramcirc.transforms import to_formula

    for _ in range(15):
        c = to_formula(random_circuit(rng, n_vars=4, max_size=14, max_depth=4))
        for _ in range(20):
            x = random_point(rng, 4)
            total = sum(w.value for _, w in parse_trees(c, x)) % c.ctx.p
            assert total == c(x)


def test_parse_tree_cap():
    c = _formula_sum_of_products()
    with pytest.raises(EnumerationCapExceeded):
        list(parse_trees(c, [1, 1, 1, 1], cap=3))


def test_parse_trees_need_formula():
    c = Circuit([Input(0), Mul(0, 0)], 1, 1)
    with pytest.raises(CircuitError):
        list(parse_trees(c, [1]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_metrics_invariant_under_reordering(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n_vars=3, max_size=20)
    # a different topological order: stable sort by depth
    depths = c.gate_depths()
    order = sorted(range(len(c)), key=lambda i: (depths[i], -i))
    d = reorder(c, order)
    assert d.metrics == c.metrics
    x = random_point(rng, 3)
    assert d(x) == c(x)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_substitution_matches_bound_evaluation(seed):
    rng = np.random.default_rng(seed)
    outer = random_circuit(rng, n_vars=3, max_size=15)
    inner = {v: random_circuit(rng, n_vars=3, max_size=10) for v in range(3)}
    composed = substitute(outer, inner)
    x = random_point(rng, 3)
    assert composed(x) == outer([inner[v](x) for v in range(3)])
