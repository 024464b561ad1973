"""Command-line front end: generators, passes, oracles and verification suites.

Every command reads its input from a file argument or stdin ("-") and writes
plain text or JSON lines. Output never depends on timing, so repeated runs
with the same flags and inputs are byte-identical.
"""

from __future__ import annotations

import inspect
import json
import re
import sys
from dataclasses import dataclass

import click
import numpy as np

from .boolarith import BAFormula, ba_eval
from .circuit import Circuit, CircuitError, MalformedInput, evaluate, loads
from .corpus import random_point
from .cyclecover import (
    circuit_to_cyclecover,
    clique_poly_of,
    grid_reduction,
    k_matching_poly,
    matching_to_perk,
    partitioned_sub_poly,
)
from .exactfield import DEFAULT_MODULUS, FieldContext
from .families import (
    Graph,
    clique_all_circuit,
    gen_clique,
    gen_clique_weft1,
    gen_grid_tiling,
    gen_per_sparse,
    gen_perk,
    gen_rper,
    gen_vc,
    rper_fpt_circuit,
    sun_graph,
    vc_fpt_circuit,
    vc_sun_circuit,
)
from .polyoracle import SparsePoly
from .suites import SUITES
from .sums import BoundedSumSpec, bounded_sum_eval
from .transforms import eliminate_divisions, homogeneous_extract, to_formula, weft1_normal_form


@dataclass(frozen=True)
class RunConfig:
    modulus: int | None
    seed: int
    fanin_bound: int | None
    cap_terms: int
    cap_enum: int
    fmt: str

    @property
    def ctx(self) -> FieldContext:
        return FieldContext(self.modulus or DEFAULT_MODULUS)


class BadInput(click.ClickException):
    exit_code = 2


# input and output helpers -------------------------------------------------------


def _read(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        with open(source) as fh:
            return fh.read()
    except OSError as e:
        raise BadInput(f"cannot read {source}: {e.strerror}") from None


def _load_object(cfg: RunConfig, text: str):
    """Parse a circuit, a bounded sum (circuit plus SUM trailer) or a BA formula."""
    try:
        if text.lstrip().startswith("BA "):
            obj = BAFormula.from_text(text)
            p = obj.ctx.p
        elif text.rstrip().splitlines()[-1:] and text.rstrip().splitlines()[-1].startswith("SUM"):
            obj = BoundedSumSpec.from_text(text)
            p = obj.body.ctx.p
        else:
            obj = loads(text)
            p = obj.ctx.p
    except (MalformedInput, CircuitError, ValueError) as e:
        raise BadInput(f"malformed input: {e}") from None
    if cfg.modulus is not None and cfg.modulus != p:
        raise BadInput(f"input modulus {p} differs from --modulus {cfg.modulus}")
    return obj


def _load_circuit(cfg: RunConfig, text: str) -> Circuit:
    obj = _load_object(cfg, text)
    if isinstance(obj, BoundedSumSpec):
        return obj.body
    if not isinstance(obj, Circuit):
        raise BadInput("expected a circuit")
    return obj


_NAMED_GRAPH = re.compile(r"^(K|C|P|sun)(\d+)(?:,(\d+))?$")


def _load_graph(source: str) -> Graph:
    """A graph file, '-' for stdin, or a name: K<n>, C<n>, P<n>, sun<n>,<k>."""
    m = _NAMED_GRAPH.match(source)
    if m:
        kind, n = m.group(1), int(m.group(2))
        if kind == "sun":
            return sun_graph(n, int(m.group(3) or 1))
        return {"K": Graph.complete, "C": Graph.cycle, "P": Graph.path}[kind](n)
    try:
        return Graph.from_text(_read(source))
    except ValueError as e:
        raise BadInput(f"malformed graph: {e}") from None


def _parse_point(cfg: RunConfig, spec: str | None, n_vars: int) -> list[int]:
    if spec is None:
        return random_point(np.random.default_rng(cfg.seed), n_vars, cfg.ctx)
    try:
        point = [int(t) % cfg.ctx.p for t in spec.replace(",", " ").split()]
    except ValueError:
        raise BadInput(f"bad point {spec!r}") from None
    if len(point) != n_vars:
        raise BadInput(f"point has {len(point)} coordinates, expected {n_vars}")
    return point


def _emit(cfg: RunConfig, text: str, record: dict) -> None:
    if cfg.fmt == "jsonl":
        click.echo(json.dumps(record, sort_keys=True))
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _poly_record(f: SparsePoly) -> dict:
    return {"n_vars": f.n_vars, "terms": [[c, list(e)] for e, c in sorted(f.terms.items())]}


def _circuit_record(c: Circuit) -> dict:
    m = c.metrics
    return {"circuit": c.to_text(), "size": m.size, "depth": m.depth, "weft": m.weft}


# commands ------------------------------------------------------------------------


@click.group()
@click.option("--modulus", type=int, default=None, help="Field prime (default 2^61-1).")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random points and corpora.")
@click.option("--fanin-bound", type=int, default=None, help="Fan-in above which a gate counts toward weft.")
@click.option("--cap-terms", type=int, default=10**5, show_default=True, help="Term cap for expansions.")
@click.option("--cap-enum", type=int, default=10**6, show_default=True, help="Node cap for cover enumeration.")
@click.option("--format", "fmt", type=click.Choice(["text", "jsonl"]), default="text", show_default=True)
@click.pass_context
def cli(ctx, modulus, seed, fanin_bound, cap_terms, cap_enum, fmt):
    """Parameterized arithmetic circuits: generators, passes and identity checks."""
    if modulus is not None:
        try:
            FieldContext(modulus)
        except ValueError as e:
            raise BadInput(str(e)) from None
    ctx.obj = RunConfig(modulus, seed, fanin_bound, cap_terms, cap_enum, fmt)


POLY_FAMILIES = ("clique", "vc", "rper", "perk", "per-sparse", "grid-tiling")
CIRCUIT_FAMILIES = ("clique-weft1", "clique-all", "vc-fpt", "vc-sun", "rper-circuit")


@cli.command()
@click.argument("family", type=click.Choice(POLY_FAMILIES + CIRCUIT_FAMILIES))
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, default=0, show_default=True)
@click.option("--c", "cbound", type=int, default=1, show_default=True, help="Cycle bound for per-sparse.")
@click.option("--graph", default=None, help="Graph for vc-fpt (file or K<n>, C<n>, P<n>).")
@click.option("--with-sum", is_flag=True, help="For clique-weft1, append the bounded-sum trailer.")
@click.pass_obj
def gen(cfg: RunConfig, family, n, k, cbound, graph, with_sum):
    """Emit a family polynomial (term list) or circuit (circuit text)."""
    ctx = cfg.ctx
    try:
        if family in POLY_FAMILIES:
            f = {
                "clique": lambda: gen_clique(n, k, ctx),
                "vc": lambda: gen_vc(n, k, ctx=ctx),
                "rper": lambda: gen_rper(n, k, ctx),
                "perk": lambda: gen_perk(n, k, ctx),
                "per-sparse": lambda: gen_per_sparse(n, k, cbound, ctx=ctx),
                "grid-tiling": lambda: gen_grid_tiling(n, k, ctx),
            }[family]()
            _emit(cfg, f.to_text(), {"family": family, **_poly_record(f)})
            return
        if family == "clique-weft1":
            c, spec = gen_clique_weft1(n, k, ctx)
            text = spec.to_text() if with_sum else c.to_text()
            rec = _circuit_record(c)
            if with_sum:
                rec.update(q=spec.q, k=spec.k)
            _emit(cfg, text, {"family": family, **rec})
            return
        if family == "vc-fpt":
            G = _load_graph(graph) if graph else Graph.complete(n)
            c = vc_fpt_circuit(G, k, ctx=ctx)
        else:
            c = {
                "clique-all": lambda: clique_all_circuit(n, ctx),
                "vc-sun": lambda: vc_sun_circuit(n, k, ctx),
                "rper-circuit": lambda: rper_fpt_circuit(n, k, ctx),
            }[family]()
    except (ValueError, TypeError) as e:
        raise BadInput(str(e)) from None
    _emit(cfg, c.to_text(), {"family": family, **_circuit_record(c)})


@cli.command("eval")
@click.argument("source", default="-")
@click.option("--point", default=None, help="Comma-separated residues; random from --seed if omitted.")
@click.pass_obj
def eval_cmd(cfg: RunConfig, source, point):
    """Evaluate a circuit, a bounded sum or a BA formula at a point."""
    obj = _load_object(cfg, _read(source))
    if isinstance(obj, BAFormula):
        x = _parse_point(cfg, point, obj.n_x)
        kind, value = "ba", ba_eval(obj, x, node_cap=cfg.cap_enum)
    elif isinstance(obj, BoundedSumSpec):
        x = _parse_point(cfg, point, obj.n_free)
        kind, value = "sum", bounded_sum_eval(obj, x, cap=cfg.cap_enum)
    else:
        x = _parse_point(cfg, point, obj.n_vars)
        try:
            kind, value = "circuit", evaluate(obj, x)
        except ZeroDivisionError as e:
            raise BadInput(f"division by zero at {x}: {e}") from None
    _emit(cfg, f"{value.value}\n", {"kind": kind, "point": x, "value": value.value})


@cli.command()
@click.argument("source", default="-")
@click.pass_obj
def metrics(cfg: RunConfig, source):
    """Print size, depth and weft of a circuit."""
    c = _load_circuit(cfg, _read(source))
    if cfg.fanin_bound is not None and cfg.fanin_bound != c.fanin_bound:
        c = Circuit(c.gates, c.output, c.n_vars, cfg.fanin_bound, c.ctx, c.division_bearing)
    m = c.metrics
    _emit(cfg, f"size={m.size} depth={m.depth} weft={m.weft}\n",
          {"size": m.size, "depth": m.depth, "weft": m.weft, "fanin_bound": c.fanin_bound})


_PASS = re.compile(r"^(formula|weft1nf|hp:(\d+)|divfree:(\d+))$")


@cli.command()
@click.argument("source", default="-")
@click.option("--pass", "pass_", required=True, help="formula, weft1nf, hp:<k> or divfree:<d>.")
@click.pass_obj
def transform(cfg: RunConfig, source, pass_):
    """Apply a circuit pass and print the resulting circuit."""
    m = _PASS.match(pass_)
    if not m:
        raise BadInput(f"unknown pass {pass_!r}")
    c = _load_circuit(cfg, _read(source))
    try:
        if m.group(1) == "formula":
            out = to_formula(c, cap=cfg.cap_terms)
        elif m.group(1) == "weft1nf":
            out = weft1_normal_form(c, term_cap=cfg.cap_terms).circuit
        elif m.group(2) is not None:
            out = homogeneous_extract(c, int(m.group(2)))
        else:
            out = eliminate_divisions(c, int(m.group(3)))
    except (ValueError, RuntimeError) as e:
        raise BadInput(f"{pass_} failed: {e}") from None
    _emit(cfg, out.to_text(), {"pass": pass_, **_circuit_record(out)})


@cli.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.option("--max-k", type=int, default=None, help="Parameter bound, for suites that take one.")
@click.option("--count", type=int, default=None, help="Corpus size, for suites that take one.")
@click.pass_obj
def verify(cfg: RunConfig, suite, max_k, count):
    """Run a named identity suite; exit 1 with a counterexample on failure."""
    fn = SUITES[suite]
    accepted = inspect.signature(fn).parameters
    kwargs = {"seed": cfg.seed}
    for name, value in (("max_k", max_k), ("count", count)):
        if value is None:
            continue
        if name not in accepted:
            raise BadInput(f"suite {suite} does not take --{name.replace('_', '-')}")
        kwargs[name] = value
    rep = fn(**kwargs)
    if cfg.fmt == "jsonl":
        click.echo(json.dumps(rep.to_json(), sort_keys=True))
    else:
        click.echo(rep.line())
        if rep.details:
            click.echo("  " + " ".join(f"{k}={v}" for k, v in sorted(rep.details.items())))
        if rep.counterexample:
            click.echo(f"  counterexample: {rep.counterexample}")
    if not rep.passed:
        sys.exit(1)


@cli.group()
def reduce():
    """Run the grid, matching and cycle-cover constructions."""


@reduce.command("grid")
@click.argument("graph")
@click.option("--k", type=int, required=True)
@click.option("--unordered", is_flag=True, help="Keep both orientations (k! grids per clique).")
@click.option("--emit-graph", is_flag=True, help="Print the colored graph instead of counts.")
@click.pass_obj
def reduce_grid(cfg: RunConfig, graph, k, unordered, emit_graph):
    """Colored graph whose colorful k x k grids match the k-cliques of GRAPH."""
    G = _load_graph(graph)
    try:
        red = grid_reduction(G, k, ordered=not unordered)
    except ValueError as e:
        raise BadInput(str(e)) from None
    if emit_graph:
        _emit(cfg, red.graph.to_text(), {"graph": red.graph.to_text()})
        return
    grids = _ones(partitioned_sub_poly(red.grid, red.graph, cap=cfg.cap_enum))
    cliques = _ones(clique_poly_of(G, k))
    _emit(cfg, f"vertices={red.graph.n} edges={len(red.graph.edges)} grids={grids} cliques={cliques}\n",
          {"vertices": red.graph.n, "edges": len(red.graph.edges), "grids": grids, "cliques": cliques})


def _ones(f: SparsePoly) -> int:
    return f.evaluate([1] * f.n_vars)


@reduce.command("perk")
@click.argument("graph")
@click.option("--left", required=True, help="Comma-separated left vertices (0-based).")
@click.option("--k", type=int, required=True)
@click.pass_obj
def reduce_perk(cfg: RunConfig, graph, left, k):
    """Bipartite k-matchings as a cycle-cover sum with one 2k-cycle."""
    G = _load_graph(graph)
    try:
        L = [int(t) for t in left.split(",") if t.strip()]
        R = [v for v in range(G.n) if v not in L]
        red = matching_to_perk(G, L, R, k)
    except ValueError as e:
        raise BadInput(str(e)) from None
    value = red.value().value
    matchings = _ones(k_matching_poly(G, k))
    _emit(cfg, f"vertices={red.digraph.n} value={value} multiplicity={red.multiplicity} matchings={matchings}\n",
          {"vertices": red.digraph.n, "value": value, "multiplicity": red.multiplicity, "matchings": matchings})


@reduce.command("cyclecover")
@click.argument("source", default="-")
@click.option("--k", type=int, default=1, show_default=True, help="Selector clique parameter.")
@click.option("--point", default=None)
@click.option("--gadget", type=click.Choice(["figure", "graded"]), default="figure", show_default=True)
@click.option("--emit-graph", is_flag=True, help="Print the weighted digraph instead of the sums.")
@click.pass_obj
def reduce_cyclecover(cfg: RunConfig, source, k, point, gadget, emit_graph):
    """Digraph whose normalized pattern cover sum equals the circuit value."""
    c = _load_circuit(cfg, _read(source))
    x = _parse_point(cfg, point, c.n_vars)
    try:
        inst = circuit_to_cyclecover(c, k, x, gadget=gadget)
        if emit_graph:
            _emit(cfg, inst.graph.to_text(), {"digraph": inst.graph.to_text()})
            return
        got = inst.normalized_sum(node_cap=cfg.cap_enum).value
    except (ValueError, RuntimeError) as e:
        raise BadInput(str(e)) from None
    want = evaluate(c, x).value
    _emit(cfg, f"vertices={inst.graph.n} normalized_sum={got} circuit_value={want}\n",
          {"vertices": inst.graph.n, "normalized_sum": got, "circuit_value": want, "point": x})
    if got != want:
        sys.exit(1)


def main(argv=None):
    cli.main(args=argv, prog_name="paramcirc")
