"""Command-line interface.

Exit status: 0 on success, 1 on invalid input or failed verification,
2 when a numerical method does not converge (diagnostic JSON on stderr).
Settings come from built-in defaults, then a ``--config`` key=value file,
then explicit flags.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .io import grid_csv, profile_csv, read_table, table_csv, to_json, trace_csv


class NonConvergence(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(",", " ").split()]


def _add_boundary(p):
    p.add_argument("--u-minus", type=float, help="left boundary density")
    p.add_argument("--u-plus", type=float, help="right boundary density")
    p.add_argument("--alpha", type=float, help="standing-wave data u_pm = (1 pm alpha)/2")


def _add_common(p):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpburgers", allow_abbrev=False,
                     description="Stationary profiles, energies and quasi-potential asymptotics "
                                 "for viscous Burgers with Dirichlet data.")
    parser.add_argument("--version", action="version", version=f"qpburgers {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stationary", help="sample a closed-form stationary profile", allow_abbrev=False)
    _add_boundary(p)
    p.add_argument("--domain", choices=("finite", "half-plus", "half-minus", "whole", "glued"),
                   default="finite")
    p.add_argument("--ell", type=float, help="half-length: interval (-ell, ell), or (0, ell)")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--n", type=int, default=400, help="number of grid cells")
    _add_common(p)

    p = sub.add_parser("current", help="solve the current condition", allow_abbrev=False)
    _add_boundary(p)
    p.add_argument("--ell", type=float, help="symmetric half-length (L = 2 ell)")
    p.add_argument("--length", type=float, help="interval length L")
    _add_common(p)

    p = sub.add_parser("energy", help="energy of a profile or of a CSV pair", allow_abbrev=False)
    _add_boundary(p)
    p.add_argument("--domain", choices=("finite", "half-plus", "half-minus", "whole", "glued"),
                   default="finite")
    p.add_argument("--ell", type=float)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--truncation", type=float, default=40.0)
    p.add_argument("--density", type=float, default=400.0, help="grid cells per unit length")
    p.add_argument("--input", help="CSV with columns x,u,phi on the energy domain")
    _add_common(p)

    p = sub.add_parser("minimize-phi", help="inner minimization over phi", allow_abbrev=False)
    _add_boundary(p)
    p.add_argument("--ell", type=float, required=False)
    p.add_argument("--n", type=int, default=600)
    p.add_argument("--method", choices=("collocation", "dp"), default="collocation")
    p.add_argument("--levels", type=int, default=400, help="phi lattice size for DP")
    p.add_argument("--input", help="CSV with columns x,u (default: the finite-volume minimizer)")
    _add_common(p)

    p = sub.add_parser("excess", help="rescaled excess energy of the minimizer", allow_abbrev=False)
    p.add_argument("--alpha", type=float)
    p.add_argument("--ell", type=float)
    _add_common(p)

    p = sub.add_parser("gamma-dev", help="rescaled cost of a shifted recovery profile",
                       allow_abbrev=False)
    p.add_argument("--alpha", type=float)
    p.add_argument("--ell", type=float)
    p.add_argument("--z", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("sweep", help="asymptotic convergence table", allow_abbrev=False)
    p.add_argument("--kind", choices=("current", "excess", "gamma", "beta"), default="gamma")
    p.add_argument("--alphas", type=_floats, default="0.5")
    p.add_argument("--ells", type=_floats, default="8 16 24")
    p.add_argument("--zs", type=_floats, default="0")
    p.add_argument("--beta", type=float)
    p.add_argument("--csv", help="append rows to this CSV")
    _add_common(p)

    p = sub.add_parser("evolve", help="explicit Burgers evolution with a Lyapunov trace",
                       allow_abbrev=False)
    _add_boundary(p)
    p.add_argument("--ell", type=float)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--T", type=float, default=200.0)
    p.add_argument("--sample-every", type=float, default=10.0)
    p.add_argument("--amplitude", type=float, default=0.1, help="random perturbation size")
    p.add_argument("--input", help="CSV with columns x,u for the initial state")
    _add_common(p)

    p = sub.add_parser("verify", help="run the acceptance battery", allow_abbrev=False)
    p.add_argument("--suite", choices=("acceptance",), default="acceptance")
    p.add_argument("--only", type=lambda s: [int(v) for v in _floats(s)],
                   help="criterion numbers, e.g. '1 4 5'")
    p.add_argument("--tolerance", action="append", default=[], metavar="KEY=VALUE",
                   help="override a tolerance, e.g. c4.abs_error=1e-20")
    _add_common(p)
    return parser


# -- config ----------------------------------------------------------------------


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(cfg) - known - {"config"})
        if unknown:
            raise ValueError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# -- helpers -----------------------------------------------------------------------


def _boundary(args):
    from .profiles import boundary_from_alpha, make_boundary
    if args.alpha is not None:
        if args.u_minus is not None or args.u_plus is not None:
            raise ValueError("give either --alpha or --u-minus/--u-plus")
        return boundary_from_alpha(args.alpha)
    if args.u_minus is None or args.u_plus is None:
        raise ValueError("boundary data needed: --alpha or --u-minus and --u-plus")
    return make_boundary(args.u_minus, args.u_plus)


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")


def _config_echo(args) -> dict:
    return {k: (list(v) if isinstance(v, (list, tuple)) else v)
            for k, v in sorted(vars(args).items()) if v is not None and k != "config"}


def _domain(args, boundary):
    from .profiles import FiniteInterval, GluedRecovery, HalfLineMinus, HalfLinePlus, WholeLine
    if args.domain == "finite":
        if getattr(args, "a", None) is not None or getattr(args, "b", None) is not None:
            _need(args, "a", "b")
            return FiniteInterval(args.a, args.b)
        _need(args, "ell")
        return FiniteInterval(-args.ell, args.ell)
    if args.domain == "glued":
        _need(args, "ell")
        return GluedRecovery(args.z, args.ell)
    return {"half-plus": HalfLinePlus(), "half-minus": HalfLineMinus(),
            "whole": WholeLine()}[args.domain]


def _positive(args, *names):
    for name in names:
        v = getattr(args, name)
        if v is None or not (math.isfinite(v) and v > 0):
            raise ValueError(f"--{name.replace('_', '-')} must be positive")


# -- commands ------------------------------------------------------------------------


def cmd_stationary(args):
    from .profiles import sample, stationary_profile
    b = _boundary(args)
    prof = stationary_profile(b, _domain(args, b))
    lo, hi = prof.support
    if args.x_min is not None:
        lo = args.x_min
    if args.x_max is not None:
        hi = args.x_max
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("unbounded domain: give --x-min and --x-max")
    if args.format == "csv":
        return profile_csv(sample(prof, lo, hi, args.n), _config_echo(args))
    return to_json({"profile": prof.descriptor(), "flagged": prof.flagged}, _config_echo(args))


def cmd_current(args):
    from .profiles import length_for_gap, solve_current_gap
    b = _boundary(args)
    if args.length is None:
        _positive(args, "ell")
        length = 2.0 * args.ell
    else:
        _positive(args, "length")
        length = args.length
    current, gap = solve_current_gap(b, length)
    residual = abs(length_for_gap(b, gap) - length)
    payload = {"J": current, "gap": gap, "A": math.sqrt(0.25 - current), "length": length,
               "residual": residual, "flagged": current <= 0.0}
    if args.format == "csv":
        return table_csv(("length", "J", "gap", "residual"), [(length, current, gap, residual)],
                         _config_echo(args))
    return to_json(payload, _config_echo(args))


def cmd_energy(args):
    from .energy import energy_G_ell, profile_energy
    from .grid import GridFunction, PhiPath
    from .profiles import stationary_profile
    b = _boundary(args)
    if args.input:
        _positive(args, "ell")
        with open(args.input) as fh:
            table = read_table(fh.read())
        x = table["x"]
        u = GridFunction(float(x[0]), float(x[-1]), table["u"])
        phi = PhiPath(u.with_values(table["phi"]))
        rep = energy_G_ell(u, phi, args.ell, b)
        payload = {"value": math.inf} if rep == math.inf else rep.as_dict()
    else:
        prof = stationary_profile(b, _domain(args, b))
        payload = profile_energy(prof, args.density, args.truncation).as_dict()
    return to_json(payload, _config_echo(args))


def cmd_minimize(args):
    from .io import read_grid
    from .profiles import sample, stationary_profile, FiniteInterval
    from .varmin import minimize_phi_collocation, minimize_phi_dp
    b = _boundary(args)
    _positive(args, "ell")
    if args.input:
        u = read_grid(args.input)
    else:
        lo, hi = {0: (-args.ell, args.ell), 1: (0.0, args.ell), -1: (-args.ell, 0.0)}[b.sign]
        u = sample(stationary_profile(b, FiniteInterval(lo, hi)), lo, hi, args.n).u
    if args.method == "dp":
        res = minimize_phi_dp(u, args.ell, b, args.levels)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize_phi_collocation(u, args.ell, b, dp_levels=args.levels)
        if not res.converged and res.method == "Collocation":
            raise NonConvergence("collocation did not converge", res.as_dict())
    if args.format == "csv":
        return grid_csv(u, res.phi_star.grid, _config_echo(args))
    return to_json(res.as_dict(), _config_echo(args))


def _row_out(args, row):
    from .asymptotics import COLUMNS
    if args.format == "csv":
        return table_csv(COLUMNS, [row.as_csv()], _config_echo(args))
    return to_json({"alpha": row.alpha, "ell": row.ell, "z": row.z, "raw": row.raw_value,
                    "scaled": row.scaled_value, "limit": row.limit_value,
                    "gap": row.relative_gap}, _config_echo(args))


def cmd_excess(args):
    from .asymptotics import excess_asymptotic
    _need(args, "alpha")
    _positive(args, "ell")
    return _row_out(args, excess_asymptotic(args.alpha, args.ell))


def cmd_gamma(args):
    from .asymptotics import dev_gamma_cost
    _need(args, "alpha")
    _positive(args, "ell")
    return _row_out(args, dev_gamma_cost(args.alpha, args.ell, args.z))


def cmd_sweep(args):
    from .asymptotics import COLUMNS, SweepSpec, run_sweep, summary_json, write_rows
    spec = SweepSpec(tuple(args.alphas), tuple(args.ells), tuple(args.zs), 0, "",
                     args.kind, args.beta)
    rows = run_sweep(spec)
    if args.csv:
        from .io import provenance
        write_rows(rows, args.csv, provenance(_config_echo(args)))
    if args.format == "csv":
        return table_csv(COLUMNS, [r.as_csv() for r in rows], _config_echo(args))
    return to_json(json.loads(summary_json(rows, spec)), _config_echo(args))


def cmd_evolve(args):
    from .dynamics import EvolutionError, lyapunov_trace, random_initial
    from .io import read_grid
    from .profiles import sample, symmetric_profile
    b = _boundary(args)
    if not b.symmetric:
        raise ValueError("evolve works on (-ell, ell) with u_- + u_+ = 1")
    _positive(args, "ell", "T", "sample_every")
    ubar = sample(symmetric_profile(b, args.ell), -args.ell, args.ell, args.n).u
    if args.input:
        u0 = read_grid(args.input)
        if not u0.same_grid(ubar):
            raise ValueError("initial state must live on (-ell, ell) with n cells")
    else:
        u0 = random_initial(ubar, b, np.random.default_rng(args.seed), amplitude=args.amplitude)
    try:
        trace, final = lyapunov_trace(u0, args.ell, b, args.T, args.sample_every)
    except EvolutionError as exc:
        if "maximum principle" in str(exc):
            raise NonConvergence(str(exc), {"stage": "evolve"}) from exc
        raise ValueError(str(exc)) from exc
    dist = float(np.sqrt(np.sum((final.u.values - ubar.values) ** 2) * final.u.h))
    if args.format == "csv":
        return trace_csv(trace, _config_echo(args))
    return to_json({"trace": [{"t": t, "F": f} for t, f in trace], "final_time": final.time,
                    "final_l2_distance": dist}, _config_echo(args))


def cmd_verify(args):
    from .acceptance import report, run_acceptance
    overrides = {}
    for item in args.tolerance:
        key, _, value = item.partition("=")
        overrides[key.strip()] = float(value)
    results = run_acceptance(overrides, seed=args.seed, only=args.only)
    if args.format == "json":
        text = to_json({"criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                                      "measured": r.measured, "tolerance": r.tolerance,
                                      "runtime": r.runtime} for r in results]},
                       _config_echo(args))
    else:
        text = report(results) + "\n"
    return text, all(r.passed for r in results)


COMMANDS = {"stationary": cmd_stationary, "current": cmd_current, "energy": cmd_energy,
            "minimize-phi": cmd_minimize, "excess": cmd_excess, "gamma-dev": cmd_gamma,
            "sweep": cmd_sweep, "evolve": cmd_evolve, "verify": cmd_verify}


def _emit(text: str, output):
    if not text.endswith("\n"):
        text += "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    from .profiles import InfeasibleError
    try:
        args = _parse(argv)
        result = COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except NonConvergence as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "diagnostics": exc.diagnostics},
                                    default=str) + "\n")
        return 2
    except (ValueError, InfeasibleError, KeyError, OSError) as exc:
        sys.stderr.write(f"qpburgers: error: {exc}\n")
        return 1
    ok = True
    if isinstance(result, tuple):
        result, ok = result
    _emit(result, args.output)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
