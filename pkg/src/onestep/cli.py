"""Command-line interface: ``onestep <subcommand> [--config FILE] [flags]``.

Subcommands
-----------
validate   check the rate model against the standing assumptions (JSON)
steady     exact stationary law and both densities at z = k/N (CSV)
evolve     master equation first moment against the mean-field ODE (CSV)
converge   log-log fits of sup|v - w| and of K over an N-sweep (JSON)
moivre     binomial pmf against its normal approximation (CSV)

A config file is a JSON object; command-line flags override its entries::

    {"model": {"kind": "linear", "a": 2, "c": 1},
     "N": 50,
     "sweep": {"min": 100, "max": 6400, "factor": 2},
     "t_end": 5.0, "dt": null, "k0": 0, "y0": null, "init": "point",
     "refine": 1, "out": "steady.csv"}

The model may also be given inline (``"kind"`` at top level). Exit codes:
0 ok, 1 usage or configuration error, 2 assumption violation, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys

import numpy as np

from . import analysis
from .errors import (
    AssumptionViolationError,
    InvalidParameterError,
    ModelViolationError,
    NumericalError,
    OneStepError,
    ReducibleChainError,
)
from .fokkerplanck import lattice_grid, require_assumptions, steady_state_v
from .master import (
    first_moment,
    integrate_master,
    point_mass,
    stable_time_step,
    stationary_distribution,
)
from .meanfield import integrate_mf
from .ouapprox import moivre_laplace, steady_state_w
from .rates import ModelKind, build_chain, model_from_dict, validate_assumptions

log = logging.getLogger("onestep")

EXIT_OK, EXIT_USAGE, EXIT_ASSUMPTION, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    """17 significant digits so doubles round-trip."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- configuration ---------------------------------------------------------

_OPTION_KEYS = (
    "N", "Ns", "t_end", "dt", "k0", "y0", "init", "refine", "out", "q", "every", "profile", "w_mass",
)


def load_config(args):
    """Merge the JSON config (if any) with command-line flags."""
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config!r} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")

    model_spec = cfg.get("model")
    if model_spec is None and "kind" in cfg:
        model_spec = {k: cfg[k] for k in ("kind", "a", "c", "beta", "gamma", "A", "C") if k in cfg}
    if args.model is not None:
        model_spec = {"kind": args.model}
        for key in ("a", "c", "beta", "gamma"):
            if getattr(args, key) is not None:
                model_spec[key] = getattr(args, key)
        if args.A is not None:
            model_spec["A"] = args.A
        if args.C is not None:
            model_spec["C"] = args.C
    if model_spec is None:
        raise UsageError("no model given: pass --model or a config with a 'model' (or 'kind') entry")
    if not isinstance(model_spec, dict) or "kind" not in model_spec:
        raise UsageError("model specification is missing 'kind'")

    opts = {k: cfg[k] for k in _OPTION_KEYS if k in cfg}
    if "sweep" in cfg:
        opts["sweep"] = cfg["sweep"]
    for key in _OPTION_KEYS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            opts[key] = val
    for key in ("N_min", "N_max", "factor"):
        val = getattr(args, key, None)
        if val is not None:
            opts.setdefault("sweep", {})[key.replace("N_", "")] = val
    try:
        model = model_from_dict(model_spec)
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from None
    return model, opts


def _require(opts, key, kind=float):
    if key not in opts or opts[key] is None:
        raise UsageError(f"missing required option {key!r}")
    try:
        return kind(opts[key])
    except (TypeError, ValueError):
        raise UsageError(f"option {key!r} must be {kind.__name__}, got {opts[key]!r}") from None


def sweep_Ns(opts):
    if opts.get("Ns"):
        return [int(n) for n in opts["Ns"]]
    sw = opts.get("sweep")
    if not sw:
        raise UsageError("converge needs 'Ns' or a 'sweep' with min, max and factor")
    try:
        lo, hi, factor = int(sw["min"]), int(sw["max"]), float(sw.get("factor", 2))
    except (KeyError, TypeError, ValueError):
        raise UsageError("sweep needs integer 'min', 'max' and a numeric 'factor'") from None
    if factor <= 1 or lo < 1 or hi < lo:
        raise UsageError("sweep needs 1 <= min <= max and factor > 1")
    Ns, n = [], float(lo)
    while round(n) <= hi:
        if not Ns or round(n) > Ns[-1]:
            Ns.append(int(round(n)))
        n *= factor
    return Ns


# -- subcommands ------------------------------------------------------------


def cmd_validate(model, opts):
    report = validate_assumptions(model)
    payload = {"model": model.to_dict(), **report.to_dict()}
    _emit(json.dumps(payload, indent=2) + "\n", opts.get("out"))
    return EXIT_OK if report.ok else EXIT_ASSUMPTION


def steady_rows(model, N, w_mass=False):
    """Rows ``k, z, p_exact, v, w`` (plus ``w_mass`` on request) at ``z = k / N``."""
    require_assumptions(model)
    p = stationary_distribution(build_chain(model, N)).p
    v = steady_state_v(model, N)
    w = steady_state_w(model, N, v.K, v.grid)
    cols = [np.arange(N + 1), v.grid, p, v.values, w.values]
    header = ["k", "z", "p_exact", "v", "w"]
    if w_mass:
        cols.append(steady_state_w(model, N, v.K, v.grid, normalization="mass").values)
        header.append("w_mass")
    return header, list(zip(*cols)), v


def cmd_steady(model, opts):
    N = _require(opts, "N", int)
    header, rows, v = steady_rows(model, N, bool(opts.get("w_mass")))
    _emit(_csv(header, rows), opts.get("out"))
    if opts.get("profile"):
        refine = int(opts.get("refine", 10))
        prof = steady_state_v(model, N, lattice_grid(N, refine), K=v.K)
        _emit(_csv(["z", "log_v", "v"], zip(prof.grid, prof.log_values, prof.values)), opts["profile"])
    return EXIT_OK


def evolve_rows(model, opts):
    N = _require(opts, "N", int)
    t_end = _require(opts, "t_end")
    chain = build_chain(model, N)
    dt = float(opts["dt"]) if opts.get("dt") is not None else stable_time_step(chain)
    init = opts.get("init", "point")
    if init == "stationary":
        p0 = stationary_distribution(chain)
    elif init == "point":
        p0 = point_mass(N, int(opts.get("k0", 0)))
    else:
        raise UsageError(f"init must be 'point' or 'stationary', got {init!r}")
    y0 = float(opts["y0"]) if opts.get("y0") is not None else first_moment(p0)
    every = int(opts.get("every", 1))
    if every < 1:
        raise UsageError("every must be a positive integer")
    ms = integrate_master(chain, p0, t_end, dt, record_every=10**9)
    mf = integrate_mf(model, y0, t_end, dt)
    idx = np.arange(0, ms.times.size, every)
    if idx[-1] != ms.times.size - 1:
        idx = np.append(idx, ms.times.size - 1)
    diff = np.abs(ms.m1 - mf.y1)
    return [(ms.times[i], ms.m1[i], mf.y1[i], diff[i]) for i in idx]


def cmd_evolve(model, opts):
    rows = evolve_rows(model, opts)
    _emit(_csv(["t", "m1", "y1", "abs_diff"], rows), opts.get("out"))
    return EXIT_OK


def converge_payload(model, Ns, refine=1):
    points = analysis.sweep(model, Ns, refine=refine)
    order = analysis.empirical_order(model, Ns, points=points)
    ks = analysis.k_scaling(model, Ns, points=points)
    return {
        "model": model.to_dict(),
        "exact_case": order.exact_case,
        "v_w": order.to_dict(),
        "K": ks.to_dict(),
    }


def cmd_converge(model, opts):
    Ns = sweep_Ns(opts)
    log.info("converge sweep over N = %s", Ns)
    payload = converge_payload(model, Ns, int(opts.get("refine", 1)))
    _emit(json.dumps(payload, indent=2) + "\n", opts.get("out"))
    return EXIT_OK


def binomial_pmf(N, q):
    k = np.arange(N + 1)
    logc = np.array([math.lgamma(N + 1) - math.lgamma(j + 1) - math.lgamma(N - j + 1) for j in k])
    return np.exp(logc + k * math.log(q) + (N - k) * math.log1p(-q))


def cmd_moivre(model, opts):
    N = _require(opts, "N", int)
    if opts.get("q") is not None:
        q = float(opts["q"])
        exact = binomial_pmf(N, q)
    elif model.kind is ModelKind.LINEAR:
        params = dict(model.params)
        q = params["a"] / (params["a"] + params["c"])
        exact = stationary_distribution(build_chain(model, N)).p
    else:
        raise UsageError("moivre needs --q unless the model is linear")
    k = np.arange(N + 1)
    approx = moivre_laplace(N, q, k)
    rows = zip(k, exact, approx, np.abs(exact - approx))
    _emit(_csv(["k", "binomial", "moivre_laplace", "abs_error"], rows), opts.get("out"))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "steady": cmd_steady,
    "evolve": cmd_evolve,
    "converge": cmd_converge,
    "moivre": cmd_moivre,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--model", choices=[k.value for k in ModelKind])
    common.add_argument("--a", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--A", type=_floats, help="ascending coefficients of A, comma separated")
    common.add_argument("--C", type=_floats, help="ascending coefficients of C, comma separated")
    common.add_argument("--N", type=int)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="onestep", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="check standing assumptions")
    p = sub.add_parser("steady", parents=[common], help="stationary law and densities at k/N")
    p.add_argument("--profile", help="also write z,log_v,v on a refined grid to this path")
    p.add_argument("--refine", type=int, help="grid refinement for --profile (default 10)")
    p.add_argument("--w-mass", dest="w_mass", action="store_true",
                   help="add a w column rescaled to mass 1/N")
    p = sub.add_parser("evolve", parents=[common], help="master equation vs mean-field ODE")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--k0", type=int)
    p.add_argument("--y0", type=float)
    p.add_argument("--init", choices=["point", "stationary"])
    p.add_argument("--every", type=int, help="emit every n-th step")
    p = sub.add_parser("converge", parents=[common], help="convergence-order fits over an N-sweep")
    p.add_argument("--Ns", type=_ints, help="comma-separated N values")
    p.add_argument("--N-min", dest="N_min", type=int)
    p.add_argument("--N-max", dest="N_max", type=int)
    p.add_argument("--factor", type=float)
    p.add_argument("--refine", type=int)
    p = sub.add_parser("moivre", parents=[common], help="binomial vs normal approximation")
    p.add_argument("--q", type=float)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        model, opts = load_config(args)
        return COMMANDS[args.command](model, opts)
    except UsageError as exc:
        print(f"onestep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AssumptionViolationError, ModelViolationError, ReducibleChainError) as exc:
        print(f"onestep: assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except NumericalError as exc:
        print(f"onestep: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidParameterError, OneStepError) as exc:
        print(f"onestep: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
