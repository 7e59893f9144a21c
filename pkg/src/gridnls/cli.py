"""Command-line driver.

Subcommands: minimize, kp, critical-mass, sweep, check, testfn.  Numeric
output is printed with 17 significant digits and, with --out, written to a
file byte-identically, so repeated runs with the same flags and seed diff
clean.  Exit codes: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .families import ExpFamilyParams, compact_edge_soliton, u_eps, u_eps_closed_forms
from .functionals import run_inequality_suite
from .grid import GridSpec, build_grid, dump_function, kinetic, mass, norm_lp
from .minimize import MinimizeConfig, estimate_critical_mass, maximize_quotient, minimize_energy
from .sweep import SweepSpec, run_sweep, sweep_to_csv


def _fmt(x) -> str:
    return "%.17g" % x


def _json_text(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and stable key order."""
    pad = "  " * indent
    if isinstance(obj, dict):
        inner = ",\n".join(
            f'{pad}  "{k}": {_json_text(v, indent + 1).lstrip()}' for k, v in obj.items()
        )
        return f"{pad}{{\n{inner}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        inner = ", ".join(_json_text(v).strip() for v in obj)
        return f"{pad}[{inner}]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if obj is None:
        return pad + "null"
    if isinstance(obj, int):
        return pad + str(obj)
    if isinstance(obj, float):
        return pad + _fmt(obj)
    return pad + json.dumps(obj)


def _emit(text: str, out: str | None) -> None:
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")
    if out:
        with open(out, "w", newline="") as f:
            f.write(text if text.endswith("\n") else text + "\n")


def _add_grid_args(sp, half_width: int, mesh: int) -> None:
    sp.add_argument("--half-width", type=int, default=half_width)
    sp.add_argument("--mesh", type=int, default=mesh)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridnls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("minimize", help="minimize the energy at fixed mass")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--mass", type=float, required=True)
    _add_grid_args(sp, 10, 8)
    sp.add_argument("--max-iters", type=int, default=2000)
    sp.add_argument("--grad-tol", type=float, default=1e-7)
    sp.add_argument("--init", choices=["exp_family", "edge_soliton"], default="exp_family")
    sp.add_argument("--init-eps", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--state-out", help="dump the final state in CSV form")
    sp.add_argument("--config", help="JSON file of flag defaults")

    sp = sub.add_parser("kp", help="estimate the optimal quotient constant")
    sp.add_argument("--p", type=float, required=True)
    _add_grid_args(sp, 3, 32)
    sp.add_argument("--iters", type=int, default=400)
    sp.add_argument("--certify", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--config")

    sp = sub.add_parser("critical-mass", help="estimate the critical mass")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--method", choices=["formula", "bisection"], default="formula")
    _add_grid_args(sp, 3, 16)
    sp.add_argument("--kp", type=float, help="use this quotient constant instead of estimating")
    sp.add_argument("--bracket-lo", type=float)
    sp.add_argument("--bracket-hi", type=float)
    sp.add_argument("--width", type=float, default=1e-2)
    sp.add_argument("--out")
    sp.add_argument("--config")

    sp = sub.add_parser("sweep", help="phase-diagram sweep over (p, mu)")
    sp.add_argument("--p-lo", type=float, required=True)
    sp.add_argument("--p-hi", type=float, required=True)
    sp.add_argument("--p-step", type=float, default=1.0)
    sp.add_argument("--mu-lo", type=float, required=True)
    sp.add_argument("--mu-hi", type=float, required=True)
    sp.add_argument("--mu-step", type=float, default=1.0)
    _add_grid_args(sp, 8, 8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--config")

    sp = sub.add_parser("check", help="random-sample inequality suite")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    _add_grid_args(sp, 3, 16)
    sp.add_argument("--out")
    sp.add_argument("--config")

    sp = sub.add_parser("testfn", help="dump a test family member and its closed forms")
    sp.add_argument("--family", choices=["exp", "edge-soliton"], required=True)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--mass", type=float, default=1.0)
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--eps-scale", type=float, default=0.1)
    _add_grid_args(sp, 10, 16)
    sp.add_argument("--out", help="CSV dump path for the function")
    sp.add_argument("--config")

    return parser


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Seed parser defaults from a --config JSON file; explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    with open(argv[idx + 1]) as f:
        data = json.load(f)
    defaults = {str(k).replace("-", "_"): v for k, v in data.items()}
    for action in parser._subparsers._group_actions:
        for name, sp in action.choices.items():
            if argv and argv[0] == name:
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return argv


def cli_main(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        argv = _apply_config_defaults(parser, list(argv))
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        return _dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "minimize":
        g = build_grid(GridSpec(args.half_width, args.mesh))
        cfg = MinimizeConfig(
            p=args.p, mu=args.mass, max_iters=args.max_iters, grad_tol=args.grad_tol,
            init=args.init, init_eps=args.init_eps, seed=args.seed,
        )
        res = minimize_energy(g, cfg)
        _emit(_json_text({
            "p": args.p, "mu": args.mass, "status": res.status, "energy": res.energy,
            "iters": res.iterations, "grad_norm": res.grad_norm,
            "L": args.half_width, "m": args.mesh, "init": args.init, "seed": args.seed,
        }), args.out)
        if args.state_out:
            dump_function(res.state, args.state_out)
        return 0

    if args.command == "kp":
        g = build_grid(GridSpec(args.half_width, args.mesh))
        est = maximize_quotient(g, args.p, max_iters=args.iters, n_certify=args.certify, seed=args.seed)
        _emit(_json_text({
            "p": args.p, "value": est.value,
            "bracket_lo": est.bracket[0], "bracket_hi": est.bracket[1],
            "method": est.method, "L": args.half_width, "m": args.mesh,
        }), args.out)
        return 0

    if args.command == "critical-mass":
        g = build_grid(GridSpec(args.half_width, args.mesh))
        bracket = None
        if args.bracket_lo is not None and args.bracket_hi is not None:
            bracket = (args.bracket_lo, args.bracket_hi)
        est = estimate_critical_mass(
            g, args.p, method=args.method, kp=args.kp,
            bracket=bracket, bracket_width=args.width,
        )
        _emit(_json_text({
            "p": args.p, "value": est.value,
            "bracket_lo": est.bracket[0], "bracket_hi": est.bracket[1],
            "method": est.method, "L": args.half_width, "m": args.mesh,
        }), args.out)
        return 0

    if args.command == "sweep":
        spec = SweepSpec(
            p_range=(args.p_lo, args.p_hi, args.p_step),
            mu_range=(args.mu_lo, args.mu_hi, args.mu_step),
            grid=GridSpec(args.half_width, args.mesh),
            seed=args.seed,
        )
        _emit(sweep_to_csv(run_sweep(spec)), args.out)
        return 0

    if args.command == "check":
        g = build_grid(GridSpec(args.half_width, args.mesh))
        rows = run_inequality_suite(g, args.samples, seed=args.seed)
        lines = ["sample_id,name,p,alpha,lhs,rhs,slack"]
        for sid, rep in rows:
            p = rep.parameters.get("p", "")
            alpha = rep.parameters.get("alpha", "")
            lines.append(
                f"{sid},{rep.name},{_fmt(p) if p != '' else ''},"
                f"{_fmt(alpha) if alpha != '' else ''},"
                f"{_fmt(rep.lhs)},{_fmt(rep.rhs)},{_fmt(rep.slack)}"
            )
        _emit("\n".join(lines) + "\n", args.out)
        negative = sum(1 for _, rep in rows if rep.slack < 0)
        if negative:
            print(f"error: {negative} inequality violations", file=sys.stderr)
            return 1
        return 0

    if args.command == "testfn":
        g = build_grid(GridSpec(args.half_width, args.mesh))
        if args.family == "exp":
            params = ExpFamilyParams(args.eps, args.mass)
            u = u_eps(g, params, enforce_tail=False)
            m_exact, k_exact, lp_exact = u_eps_closed_forms(params, args.p)
            report = {
                "family": "exp", "eps": args.eps, "mu": args.mass, "p": args.p,
                "mass_closed": m_exact, "mass_quadrature": mass(u),
                "kinetic_closed": k_exact, "kinetic_quadrature": kinetic(u),
                "lp_norm_closed": lp_exact ** (1.0 / args.p),
                "lp_norm_quadrature": norm_lp(u, args.p),
            }
        else:
            u = compact_edge_soliton(g, args.eps_scale)
            report = {
                "family": "edge-soliton", "eps_scale": args.eps_scale,
                "mass_quadrature": mass(u), "kinetic_quadrature": kinetic(u),
                "l6_norm_quadrature": norm_lp(u, 6.0),
            }
        print(_json_text(report))
        if args.out:
            dump_function(u, args.out)
        return 0

    raise ValueError(f"unknown command {args.command!r}")


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
