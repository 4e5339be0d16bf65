"""Command line entry point: ``warnprop <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, cycle_process
from .factor_graph import build, components
from .formula import read_dimacs, restrict, save_dimacs
from .generator import GenParams, PlantedInstance, generate
from .harness import ExperimentSpec, first_pass_inputs, run_experiment
from .residual import solve_planted
from .wp import WPConfig, run


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _load_bools(path) -> np.ndarray:
    return np.asarray(json.loads(Path(path).read_text()), dtype=bool)


def cmd_generate(a) -> int:
    inst = generate(GenParams(n=a.n, d=a.d, p=a.p, seed=a.seed, all_true=a.all_true))
    comments = [f"planted 3-SAT n={a.n} " + (f"d={a.d}" if a.d is not None else f"p={a.p}") + f" seed={a.seed}"]
    save_dimacs(inst.formula, a.output, comments)
    if a.planted_out:
        Path(a.planted_out).write_text(json.dumps(inst.planted.tolist()))
    _emit({"n": inst.n, "m": inst.formula.m, "cnf": a.output, "planted": a.planted_out})
    return 0


def cmd_components(a) -> int:
    f = read_dimacs(a.cnf)
    if a.induced_by:
        f = restrict(f, json.loads(Path(a.induced_by).read_text()))
    _emit([c.to_dict() for c in components(build(f))])
    return 0


def cmd_core(a) -> int:
    f = read_dimacs(a.cnf)
    inst = PlantedInstance(f, _load_bools(a.planted))
    alpha, order = first_pass_inputs(build(f), a.seed)
    rep = analysis.core(inst, order, alpha, analysis.StabilityParams(a.d))
    _emit(rep.summary())
    return 0


def cmd_wp(a) -> int:
    r = run(read_dimacs(a.cnf), WPConfig(seed=a.seed, max_passes=a.max_passes))
    out = {
        "converged": r.converged,
        "passes": r.passes_used,
        "assigned_fraction": r.assigned_fraction,
        "psi": r.assignment.tolist(),
    }
    if a.json:
        _emit(out)
    else:
        state = "converged" if r.converged else "did not converge"
        print(f"{state} after {r.passes_used} passes; {r.assigned_fraction:.4f} of variables assigned")
    return 0 if r.converged else 1


def cmd_solve(a) -> int:
    f = read_dimacs(a.cnf)
    target = PlantedInstance(f, _load_bools(a.planted)) if a.planted else f
    res = solve_planted(target, WPConfig(seed=a.seed, max_passes=a.max_passes))
    path = None
    if res.assignment is not None:
        path = a.output or str(Path(a.cnf).with_suffix(".assignment.json"))
        Path(path).write_text(json.dumps(res.assignment.tolist()))
    rep = res.report
    _emit(
        {
            "status": rep.status,
            "passes": rep.passes,
            "assigned_fraction": rep.assigned_fraction,
            "residual_components": rep.residual_components,
            "psi_equals_phi": rep.psi_equals_phi,
            "assignment_path": path,
        }
    )
    return 0 if res.success else 1


def cmd_cycle(a) -> int:
    stats = cycle_process.simulate(a.L, a.trials, a.seed)
    L2 = a.L * a.L
    out = {
        "L": a.L,
        "mean_T": stats.mean,
        "sem_T": stats.sem,
        "tail_table": {str(k): stats.tail(4 * k * L2) for k in (1, 2, 3)},
        "martingale_check": cycle_process.martingale_check(a.L, max(a.trials // 10, 100), a.seed).to_dict(),
    }
    if a.exact:
        out["exact"] = cycle_process.exact_absorption(a.L).to_dict()
    _emit(out)
    return 0


def cmd_experiment(a) -> int:
    rep = run_experiment(ExperimentSpec.from_file(a.spec), a.output)
    _emit(rep.cells)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="warnprop", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a planted 3-SAT instance")
    g.add_argument("--n", type=int, required=True)
    dens = g.add_mutually_exclusive_group(required=True)
    dens.add_argument("--d", type=float)
    dens.add_argument("--p", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--planted-out")
    g.add_argument("--all-true", action="store_true", help="plant the all-TRUE assignment")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    an = sub.add_parser("analyze", help="structural diagnostics")
    asub = an.add_subparsers(dest="what", required=True)
    c = asub.add_parser("components")
    c.add_argument("cnf")
    c.add_argument("--induced-by", help="JSON list of variables to restrict to")
    c.set_defaults(func=cmd_components)
    k = asub.add_parser("core")
    k.add_argument("cnf")
    k.add_argument("--planted", required=True)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--d", type=float, required=True)
    k.set_defaults(func=cmd_core)

    w = sub.add_parser("wp", help="warning propagation")
    wsub = w.add_subparsers(dest="what", required=True)
    r = wsub.add_parser("run")
    r.add_argument("cnf")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-passes", type=int)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_wp)

    s = sub.add_parser("solve", help="WP, simplify, solve the residual")
    s.add_argument("cnf")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--planted")
    s.add_argument("--max-passes", type=int)
    s.add_argument("-o", "--output", help="where to write the assignment JSON")
    s.set_defaults(func=cmd_solve)

    cy = sub.add_parser("cycle-sim", help="ring copying process")
    cy.add_argument("--L", type=int, required=True)
    cy.add_argument("--trials", type=int, default=10000)
    cy.add_argument("--seed", type=int, default=0)
    cy.add_argument("--exact", action="store_true")
    cy.set_defaults(func=cmd_cycle)

    e = sub.add_parser("experiment", help="run an experiment grid")
    e.add_argument("--spec", required=True)
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
