"""Command line interface (``hybrid-tdgl``).

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import logging
import sys

from .asymptotics import gamma1_closed_form, gamma22_closed_form, gamma_hats
from .config import make_delta, make_grid, make_table, parse_config, prepare, run_config
from .convergence import convergence_study
from .errors import (ConfigError, NoRootInBracket, NumericalBlowup, QuadratureFailure, ShapeError,
                     SolveFailure)
from .gap import BETA0, OMEGA_TILDE, nu0_from_gap_normalization
from .output import write_outputs
from .scenarios import NAMES, scenario

log = logging.getLogger("hybrid_tdgl")


def _read_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _progress(every):
    def report(row):
        if every and row.n % every == 0:
            print(f"n={row.n} t={row.t:.4g} E={row.energy:.10g} max|psi|={row.max_abs_psi:.6f} "
                  f"mean|psi|={row.mean_abs_psi:.6f}", file=sys.stderr)
    return report


def _simulate(cfg, out, every, steps=None):
    if steps is not None:
        cfg = cfg.with_changes(scheme={"n_steps": steps})
    setup, res = run_config(cfg, _progress(every))
    paths = write_outputs(setup, res, out)
    for p in paths:
        print(p)
    if res.halted:
        print(f"run halted at step {res.state.n}: {res.error}", file=sys.stderr)
        return 2
    return 0


def cmd_run(args):
    return _simulate(_read_config(args.config), args.out, args.every)


def cmd_scenario(args):
    return _simulate(scenario(args.name), args.out, args.every, args.steps)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"not a comma separated list of numbers: {text!r}", "converge.ladder") from None


def cmd_converge(args):
    cfg = scenario(args.config[len("scenario:"):]) if args.config.startswith("scenario:") \
        else _read_config(args.config)
    report = convergence_study(cfg, _floats(args.ladder), args.ref, args.t)
    print(report.format())
    if args.out:
        report.write_csv(args.out)
        print(args.out)
    return 0


def cmd_coeffs(args):
    c = gamma_hats(args.beta0, args.omega)
    nu0 = nu0_from_gap_normalization(args.beta0, args.omega)
    rows = [("gamma0", c.gamma0, ""), ("gamma1", c.gamma1,
             f"closed form {gamma1_closed_form(args.beta0, args.omega):.15g}"),
            ("gamma21", c.gamma21, ""), ("gamma22", c.gamma22,
             f"closed form {gamma22_closed_form(args.beta0, args.omega):.15g}"),
            ("gamma23", c.gamma23, ""), ("nu0", nu0, "normalization identity"),
            ("nu0*gamma0-1", nu0 * c.gamma0 - 1.0, "residual")]
    print(f"beta0 = {args.beta0!r}, omega_tilde = {args.omega!r}")
    for name, val, note in rows:
        print(f"{name:>14}  {val: .15e}  {note}")
    return 0


def cmd_gaptable(args):
    cfg = _read_config(args.config)
    table = make_table(cfg, make_delta(cfg, make_grid(cfg)))
    table.save(args.out)
    print(f"{args.out}: L = {table.lipschitz_L:.6g}, x0 = {table.root(0.0):.12g}")
    return 0


def cmd_check(args):
    cfg = _read_config(args.config)
    if args.build:
        prepare(cfg)
    print(f"{args.config}: ok")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hybrid-tdgl", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="simulate a configuration file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: output.dir of the config)")
    r.add_argument("--every", type=int, default=0, help="progress line every N steps")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scenario", help="simulate a named preset")
    s.add_argument("name", choices=NAMES)
    s.add_argument("--out")
    s.add_argument("--steps", type=int, help="override the number of steps")
    s.add_argument("--every", type=int, default=0)
    s.set_defaults(func=cmd_scenario)

    c = sub.add_parser("converge", help="temporal convergence study")
    c.add_argument("config", help="config file, or scenario:<name>")
    c.add_argument("--ladder", default="0.032,0.016,0.008,0.004,0.002")
    c.add_argument("--ref", type=float, default=5e-4)
    c.add_argument("--t", type=float, default=0.064, help="comparison time")
    c.add_argument("--out", help="CSV report path")
    c.set_defaults(func=cmd_converge)

    k = sub.add_parser("coeffs", help="print the expansion coefficients")
    k.add_argument("--beta0", type=float, default=BETA0)
    k.add_argument("--omega", type=float, default=OMEGA_TILDE)
    k.set_defaults(func=cmd_coeffs)

    g = sub.add_parser("gaptable", help="build and save the nonlinearity table")
    g.add_argument("config")
    g.add_argument("--out", required=True, help=".npz path")
    g.set_defaults(func=cmd_gaptable)

    v = sub.add_parser("check", help="validate a configuration without running it")
    v.add_argument("config")
    v.add_argument("--build", action="store_true", help="also build the table and operators")
    v.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ShapeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (NumericalBlowup, SolveFailure, QuadratureFailure, NoRootInBracket) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
