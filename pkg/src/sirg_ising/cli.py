"""Command-line entry point ``sirg``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 computation limit or error. Options may also come from a ``key = value``
file given with ``--config``; flags on the command line take precedence, and
the environment variable ``SIRG_SEED`` supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import SirgError, SizeLimit
from .graph import SpinnedGraph, sample_graph
from .measures import rate_function, reference_pair_measure
from .model import ModelParams, effective_kernel, parse_kernel
from .partition import ANNEALED_MAX_N, annealed_log_partition_exact, glauber_sample, pressure_finite
from .thermo import FieldPolicy, critical_beta, sweep, sweep_to_csv, variational_pressure
from .verify import SUITES, run_suites

EXIT_VERIFY, EXIT_CONFIG, EXIT_COMPUTE = 1, 2, 3


class ConfigError(Exception):
    pass


def _field_or_solve(text):
    if text == "solve":
        return None
    return float(text)


def _floats(text):
    return [float(v) for v in text.split(",")]


def read_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _add_model_args(p, b_minus_solve=True):
    p.add_argument("--kernel", default="constant:1", help="constant:L | block:c11,c1m1,cm1m1 | product:c")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--b-plus", type=float, default=0.0)
    if b_minus_solve:
        p.add_argument("--b-minus", type=_field_or_solve, default=0.0, help="a real value or 'solve'")
        p.add_argument("--bracket", type=_floats, default=[-100.0, 100.0])
    else:
        p.add_argument("--b-minus", type=float, default=0.0)


def _add_output_args(p, default_format):
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json"], default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sirg", description="Ising models on sparse inhomogeneous random graphs")
    parser.add_argument("--config", help="key = value file of default options")
    sub = parser.add_subparsers(dest="command", required=True)
    seed_default = int(os.environ.get("SIRG_SEED", "0"))

    p = sub.add_parser("sweep", help="thermodynamic quantities on a beta grid")
    _add_model_args(p)
    p.add_argument("--beta-min", type=float, default=0.0)
    p.add_argument("--beta-max", type=float, default=2.0)
    p.add_argument("--beta-steps", type=int, default=21)
    p.add_argument("--observables", choices=["fd", "literal"], default="fd")
    p.add_argument("--pressure", choices=["closed_form", "variational"], default="closed_form",
                   help="pressure differentiated for the fd observables")
    _add_output_args(p, "csv")

    p = sub.add_parser("sample", help="draw a spinned random graph as JSON")
    _add_model_args(p, b_minus_solve=False)
    p.set_defaults(beta=0.0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--p-plus", type=float, default=0.5, help="spin law probability of +1")
    p.add_argument("--method", choices=["pairwise", "block"], default="pairwise")
    p.add_argument("--out", default="-")

    p = sub.add_parser("pressure", help="finite-n quenched and annealed pressure against the limit")
    _add_model_args(p, b_minus_solve=False)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--out", default="-")

    p = sub.add_parser("critical", help="symmetry-breaking inverse temperature")
    _add_model_args(p)
    p.add_argument("--beta-max", type=float, default=10.0)
    _add_output_args(p, "json")

    p = sub.add_parser("mcmc", help="Glauber dynamics on a sampled or loaded graph")
    _add_model_args(p, b_minus_solve=False)
    p.add_argument("--graph", help="graph JSON produced by 'sample' ('-' for stdin)")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--sweeps", type=int, default=100000)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--out", default="-")

    p = sub.add_parser("rate", help="large-deviation rate of a (spin, pair) measure")
    _add_model_args(p, b_minus_solve=False)
    p.set_defaults(beta=0.0)
    p.add_argument("--ell-plus", type=float, default=0.5)
    p.add_argument("--omega-plus", type=float, default=None, help="defaults to --ell-plus")
    p.add_argument("--pi", type=_floats, default=None, help="pi(-,-),pi(-,+),pi(+,+); defaults to C omega x omega")
    p.add_argument("--out", default="-")

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--suite", action="append", choices=[*SUITES, "all"])
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--rn-tol", type=float, default=1e-9)
    p.add_argument("--samples", type=int, default=None, help="unused; accepted for config compatibility")
    return parser


def _emit(text, out):
    if not text.endswith("\n"):
        text += "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _json(obj):
    return json.dumps(obj, indent=2)


def _json_number(v):
    # Degenerate observables and non-finite values become null
    try:
        v = float(v)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def _params(args):
    return ModelParams(args.beta, args.b_plus, args.b_minus)


def cmd_sweep(args):
    if args.beta_steps < 2:
        raise ConfigError("--beta-steps must be >= 2")
    if args.beta_min > args.beta_max:
        raise ConfigError("--beta-min must not exceed --beta-max")
    if args.beta_min < 0:
        raise ConfigError("beta must be nonnegative")
    kernel = parse_kernel(args.kernel)
    betas = np.linspace(args.beta_min, args.beta_max, args.beta_steps)
    policy = FieldPolicy(args.b_plus, args.b_minus, tuple(args.bracket))
    points = sweep(kernel, betas, policy, args.observables, args.pressure)
    if args.format == "csv":
        _emit(sweep_to_csv(points), args.out)
    else:
        rows = [{k: _json_number(v) for k, v in vars(p).items()} for p in points]
        _emit(_json(rows), args.out)
    return 0


def cmd_sample(args):
    kernel = parse_kernel(args.kernel)
    graph = sample_graph(args.n, kernel, _params(args), (1 - args.p_plus, args.p_plus), args.seed, args.method)
    _emit(graph.to_json(), args.out)
    return 0


def cmd_pressure(args):
    kernel = parse_kernel(args.kernel)
    params = _params(args)
    if args.n > ANNEALED_MAX_N:
        raise SizeLimit(f"n={args.n} exceeds the exact-enumeration cap of {ANNEALED_MAX_N}")
    graph = sample_graph(args.n, kernel, params, (0.5, 0.5), args.seed)
    result = {
        "n": args.n,
        "beta": args.beta,
        "b_plus": args.b_plus,
        "b_minus": args.b_minus,
        "phi_n": pressure_finite(graph, params),
        "phi_annealed_n": annealed_log_partition_exact(args.n, kernel, params),
        "phi_limit": variational_pressure(kernel, params)[0],
    }
    _emit(_json(result), args.out)
    return 0


def cmd_critical(args):
    kernel = parse_kernel(args.kernel)
    policy = FieldPolicy(args.b_plus, args.b_minus, tuple(args.bracket))
    beta_c = critical_beta(kernel, policy, args.beta_max)
    if args.format == "csv":
        _emit(f"kernel,beta_c\n{kernel.spec},{beta_c:.17g}\n", args.out)
    else:
        _emit(_json({"kernel": kernel.spec, "beta_c": beta_c}), args.out)
    return 0


def cmd_mcmc(args):
    params = _params(args)
    if args.graph:
        text = sys.stdin.read() if args.graph == "-" else open(args.graph).read()
        graph = SpinnedGraph.from_json(text)
    else:
        graph = sample_graph(args.n, parse_kernel(args.kernel), params, (0.5, 0.5), args.seed)
    if args.burn_in is not None and not args.sweeps > args.burn_in >= 0:
        raise ConfigError("need --sweeps > --burn-in >= 0")
    res = glauber_sample(graph, params, args.sweeps, args.burn_in, args.seed)
    _emit(_json({
        "n": graph.n,
        "beta": args.beta,
        "b_plus": args.b_plus,
        "b_minus": args.b_minus,
        "sweeps": res.sweeps,
        "burn_in": res.burn_in,
        "magnetization": res.magnetization,
        "magnetization_stderr": res.magnetization_stderr,
        "energy": res.energy,
        "energy_stderr": res.energy_stderr,
        "marginals": [float(m) for m in res.marginals],
    }), args.out)
    return 0


def cmd_rate(args):
    kernel = parse_kernel(args.kernel)
    eff = effective_kernel(kernel, _params(args))
    ell = (1 - args.ell_plus, args.ell_plus)
    w = args.ell_plus if args.omega_plus is None else args.omega_plus
    omega = (1 - w, w)
    if args.pi is None:
        pi = reference_pair_measure(omega, eff)
    else:
        if len(args.pi) != 3:
            raise ConfigError("--pi takes three values: pi(-,-),pi(-,+),pi(+,+)")
        mm, pm, pp = args.pi
        pi = np.array([[mm, pm], [pm, pp]])
    value = rate_function(omega, pi, ell, eff)
    _emit(_json({"omega": list(omega), "ell": list(ell), "pi": pi.tolist(),
                 "rate": value if math.isfinite(value) else "inf"}), args.out)
    return 0


def cmd_verify(args):
    names = None if not args.suite or "all" in args.suite else list(dict.fromkeys(args.suite))
    results = run_suites(names, seed=args.seed, rn_tol=args.rn_tol)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return 0


COMMANDS = {
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "pressure": cmd_pressure,
    "critical": cmd_critical,
    "mcmc": cmd_mcmc,
    "rate": cmd_rate,
    "verify": cmd_verify,
}


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    for action in parser._subparsers._group_actions:
        for sub in action.choices.values():
            converted = {}
            for a in sub._actions:
                if a.dest in values:
                    raw = values[a.dest]
                    converted[a.dest] = a.type(raw) if a.type else raw
            sub.set_defaults(**converted)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ConfigError, ValueError) as exc:
        print(f"sirg: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"sirg: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SirgError as exc:
        print(f"sirg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ValueError, OSError) as exc:
        print(f"sirg: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
