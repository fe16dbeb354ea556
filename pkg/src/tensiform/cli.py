"""Command-line interface.

Exit codes: 0 success, 1 solver non-convergence, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, fileio, fixtures, linear_fdm, optimizer
from .geometry import DegenerateGeometry
from .model import CABLE, ModelError, PlainArea, PowerArea, PowerLength, SpringLength

EXIT_OK = 0
EXIT_NONCONVERGED = 1
EXIT_INPUT = 2


def _solve_options(args, trace_every: int = 16) -> optimizer.SolveOptions:
    return optimizer.SolveOptions(
        max_iterations=args.max_iter,
        gradient_tolerance=args.tol,
        seed=args.seed,
        method=args.method,
        trace_every=trace_every,
    )


def _parse_functional(text: str):
    """Parse 'plain_area' or 'power_length:w=1:p=4' style functional specs."""
    parts = text.split(":")
    name, params = parts[0], {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        params[key] = float(value)
    if name == "power_length":
        return PowerLength(w=params.get("w", 1.0), p=int(params.get("p", 2)))
    if name == "spring_length":
        return SpringLength(k=params.get("k", 1.0), rest_length=params.get("rest_length", 0.0))
    if name == "power_area":
        return PowerArea(w=params.get("w", 1.0), p=int(params.get("p", 2)))
    if name == "plain_area":
        return PlainArea()
    raise ValueError(f"unknown functional variant {name!r}")


def _default_force_densities(model) -> np.ndarray:
    """Derive q from the cable functionals: q = 2w for quadratic cables only."""
    q = np.zeros(len(model.members))
    for idx, member in enumerate(model.members):
        if member.role != CABLE:
            raise ModelError(
                f"member {member.id} is a strut; the linear solve needs explicit "
                "force densities (--q-file) for models with struts")
        f = member.functional
        if not isinstance(f, PowerLength) or f.p != 2:
            raise ModelError(
                f"member {member.id}: cannot derive a force density from "
                f"{type(f).__name__}; provide --q-file")
        q[idx] = 2.0 * f.w
    return q


def _cmd_solve_linear(args) -> int:
    model = fileio.load_model(args.model)
    if args.q_file:
        q = np.asarray(json.loads(Path(args.q_file).read_text()), dtype=float)
    else:
        q = _default_force_densities(model)
    try:
        solution = linear_fdm.solve_linear_fdm(model, q)
    except linear_fdm.SingularSystem as err:
        report = err.report
        print(f"linear solve refused: {err}", file=sys.stderr)
        print(f"null space: rank {report.rank}, nullity {report.nullity}, "
              f"tol {report.tol}", file=sys.stderr)
        for col in range(report.basis.shape[1]):
            vec = " ".join(f"{v:+.6f}" for v in report.basis[:, col])
            print(f"  kernel[{col}] = [{vec}]", file=sys.stderr)
        return EXIT_INPUT
    out = {
        "positions": [[float(v) for v in row] for row in solution.positions],
        "lengths": [float(v) for v in solution.lengths],
        "tensions": [float(v) for v in solution.tensions],
    }
    text = json.dumps(out, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_form_find(args) -> int:
    model = fileio.load_model(args.model)
    seeds = [args.seed] if args.seeds is None else list(range(args.seed, args.seed + args.seeds))
    states = []
    for seed in seeds:
        if args.init == "model":
            init = optimizer.GivenInit(model.free_coords())
        else:
            init = optimizer.RandomInit(args.init_range)
        options = optimizer.SolveOptions(
            max_iterations=args.max_iter, gradient_tolerance=args.tol, seed=seed,
            init=init, method=args.method, trace_every=16)
        states.append((seed, optimizer.minimize_constrained(model, options)))

    for seed, state in states:
        flag = "converged" if state.converged else "NOT converged"
        print(f"seed {seed}: {flag}, energy {state.energy:.9g}, "
              f"residual {state.residual_norm:.3e}, iterations {state.iterations}")

    best_seed, best = min(states, key=lambda pair: (not pair[1].converged, pair[1].energy))
    out = args.out or (Path(args.model).stem + ".state.json")
    Path(out).write_text(json.dumps(fileio.state_to_dict(model, best, seed=best_seed),
                                    indent=1) + "\n")
    print(f"wrote {out} (seed {best_seed})")
    return EXIT_OK if any(s.converged for _, s in states) else EXIT_NONCONVERGED


def _cmd_compare(args) -> int:
    model = fileio.load_model(args.model)
    entries = [_parse_functional(item) for item in args.functionals.split(",")]
    options = _solve_options(args)
    rows = analysis.compare_functionals(model, entries, options)
    header = "label,converged,energy,total_length,total_area,area_mean,area_cv"
    lines = [header]
    for row in rows:
        lines.append(f"{row.label},{row.converged},{row.energy!r},{row.total_length!r},"
                     f"{row.total_area!r},{row.area_mean!r},{row.area_cv!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_fixture(args) -> int:
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    model = fixtures.build_fixture(args.name, params)
    out = args.out or f"{args.name}.json"
    fileio.save_model(model, out)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_export(args) -> int:
    model, data = fileio.load_state(args.state)
    coords = np.asarray(data["coords"], dtype=float)
    if args.obj:
        fileio.export_obj(model, coords, args.obj)
        print(f"wrote {args.obj}")
    if args.csv:
        forces = _forces_from_state(model, data)
        report = analysis.equilibrium_residual(model, coords, forces)
        fileio.export_report_csv(report, args.csv)
        print(f"wrote {args.csv}")
    if not args.obj and not args.csv:
        print("nothing to export: pass --obj and/or --csv", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def _forces_from_state(model, data):
    from .functionals import GeneralizedForces
    f = data["forces"]
    return GeneralizedForces(
        member_forces=np.asarray(f["member_forces"], dtype=float),
        element_stresses=np.asarray(f["element_stresses"], dtype=float),
        strut_multipliers=np.asarray(f["strut_multipliers"], dtype=float),
    )


def _cmd_serve(args) -> int:
    from .server import run
    port = int(os.environ.get("TENSIFORM_PORT", args.port))
    run(port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensiform",
                                     description="form-finding for prestressed structures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-linear", help="original force density method (linear solve)")
    p.add_argument("model")
    p.add_argument("--q-file", help="JSON list with one force density per member")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve_linear)

    p = sub.add_parser("form-find", help="constrained energy minimization")
    p.add_argument("model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, help="run this many consecutive seeds")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--method", choices=[optimizer.METHOD_DESCENT, optimizer.METHOD_DYNRELAX],
                   default=optimizer.METHOD_DESCENT)
    p.add_argument("--init", choices=["random", "model"], default="random")
    p.add_argument("--init-range", type=float, default=2.5)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_form_find)

    p = sub.add_parser("compare", help="solve once per functional and tabulate")
    p.add_argument("model")
    p.add_argument("--functionals", required=True,
                   help="comma list, e.g. plain_area,power_area:w=1:p=2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--method", choices=[optimizer.METHOD_DESCENT, optimizer.METHOD_DYNRELAX],
                   default=optimizer.METHOD_DESCENT)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("fixture", help="emit a generated model file")
    p.add_argument("name", choices=fixtures.fixture_names())
    p.add_argument("--param", action="append", help="key=value, repeatable")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fixture)

    p = sub.add_parser("export", help="export a saved solve state")
    p.add_argument("state")
    p.add_argument("--obj")
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="run the HTTP solve API")
    p.add_argument("--port", type=int, default=8707)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (fileio.ModelLoadError, ModelError, DegenerateGeometry, ValueError,
            KeyError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
