"""``parab`` command line: solve, prove, report, check.

Exit codes: 0 verified / done, 1 solver trouble, 2 bad configuration or
input, 3 contraction failure, 4 stability failure.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .errors import (BasinFailure, BoundFailure, ContractFailure, DiagonalizationError, FormatError,
                     GapFailure, SolverError, StabilityError, UsageError)
from .io import (domain_rows, read_cert, read_config, read_dump, surface_rows, write_cert,
                 write_csv, write_dump)
from .run import RunConfig, physical_error, prove_solution, solve
from .solver import ApproxSolution, SpectralModel, steady_newton

log = logging.getLogger("parab")

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_CONTRACT, EXIT_STABILITY = 0, 1, 2, 3, 4


def _threads(value):
    if value is not None:
        return value
    try:
        return int(os.environ.get("PARAB_THREADS") or 1)
    except ValueError:
        raise UsageError("PARAB_THREADS must be an integer") from None


def _params(pairs):
    out = {}
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def cmd_solve(args):
    overrides = dict(N_u=args.Nu, N_L=args.NL, M=args.M, K=args.K, tau=args.tau, t_start=args.t_start,
                     nu=args.nu, y_threshold=args.y_threshold, threads=args.threads, grid=args.grid,
                     relax_steps=args.relax_steps)
    if args.to_infinity:
        overrides["to_infinity"] = True
    params = _params(args.param)
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.config:
        cp = read_config(args.config)
        if args.preset:
            cp.read_dict({"problem": {"preset": args.preset}})
        if params:
            cp.read_dict({"problem": params})
        cfg = RunConfig.from_parser(cp, **overrides)
    else:
        cfg = RunConfig(args.preset or "swift_hohenberg", params,
                        **{k: v for k, v in overrides.items() if v is not None})
    problem, sol, manifest = solve(cfg)
    out = args.out or f"{cfg.preset}.pdump"
    write_dump(out, sol, manifest)
    with open(out + ".manifest.json", "w") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")
    print(f"wrote {out}: M={sol.M}, N_u={sol.N}, orders={sol.orders()}")
    return EXIT_OK


def _extend_to_infinity(sol):
    """Append a steady-state piece computed from the last endpoint."""
    model = SpectralModel(sol.problem, sol.N)
    ust = steady_newton(model, sol.end_state(sol.M - 1), m=sol.M + 1)
    res = float(np.max(np.abs(model.rhs(ust)) / (1 + np.abs(model.lin))))
    return ApproxSolution(sol.problem, sol.grid + [np.inf], sol.pieces + [ust[None, :]], sol.N, sol.nu,
                          sol.initial, sol.eps_in, sol.residuals + [res], sol.defects + [0.0])


def cmd_prove(args):
    sol, manifest = read_dump(args.dump)
    saved = (manifest or {}).get("config") or {}
    r_star = args.r_star if args.r_star is not None else saved.get("r_star", 1e-4)
    maximize = args.maximize_r or bool(saved.get("maximize_r"))
    if args.to_infinity and not sol.infinite:
        sol = _extend_to_infinity(sol)
    threads = _threads(args.threads)
    cert, _ = prove_solution(sol, N_L=args.NL or saved.get("N_L"), r_star=r_star, maximize=maximize,
                             threads=threads)
    phys = physical_error(sol.problem, cert.global_error)
    out = args.out or os.path.splitext(args.dump)[0] + ".pcert.json"
    write_cert(out, cert, phys)
    print(f"verified: global error {cert.global_error:.6g} (physical {phys:.6g}) -> {out}")
    if cert.steady:
        s = cert.steady
        print(f"steady state: r_min {s['r_min']:.4g}, r_max {s['r_max']:.4g}, epsilon {s['epsilon']:.4g}, "
              f"gap {s.get('alpha', float('nan')):.4g}")
    return EXIT_OK


def cmd_report(args):
    cert = read_cert(args.cert)
    sol, _ = read_dump(args.dump)
    prefix = args.out or os.path.splitext(os.path.splitext(args.cert)[0])[0]
    write_csv(prefix + "_surface.csv", ["t", "x", "u"], surface_rows(sol, args.resolution))
    write_csv(prefix + "_domains.csv", ["domain", "t_start", "t_end", "length", "K", "r"], domain_rows(sol, cert))
    summary = {"global_error": cert.global_error, "physical_error": physical_error(sol.problem, cert.global_error),
               "M": len(cert.r), "steady": cert.steady, "verified": cert.verify()}
    with open(prefix + "_summary.json", "w") as f:
        json.dump(summary, f, indent=1)
        f.write("\n")
    print(f"wrote {prefix}_surface.csv, {prefix}_domains.csv, {prefix}_summary.json")
    return EXIT_OK


def cmd_check(args):
    cert = read_cert(args.cert)
    if cert.verify():
        print(f"certificate verified: global error {cert.global_error:.6g}")
        return EXIT_OK
    print("certificate does NOT verify", file=sys.stderr)
    return EXIT_CONTRACT


def build_parser():
    ap = argparse.ArgumentParser(prog="parab", description="Rigorous integration of periodic parabolic PDEs.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute an approximate solution and write a .pdump")
    s.add_argument("--config", help=".pcfg file")
    s.add_argument("--preset")
    s.add_argument("--param", action="append", help="preset parameter key=value (repeatable)")
    s.add_argument("--alpha", help="shortcut for --param alpha=...")
    s.add_argument("--tau", type=float, help="physical end time")
    s.add_argument("--t-start", type=float, help="physical start time (relaxes the initial data)")
    s.add_argument("--M", type=int)
    s.add_argument("--Nu", type=int)
    s.add_argument("--NL", type=int)
    s.add_argument("--K", help="Chebyshev order or 'auto'")
    s.add_argument("--nu", type=float)
    s.add_argument("--grid", choices=["uniform", "adaptive"])
    s.add_argument("--y-threshold", type=float)
    s.add_argument("--relax-steps", type=int)
    s.add_argument("--to-infinity", action="store_true", help="append the steady state")
    s.add_argument("--threads", type=int)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_solve)

    p = sub.add_parser("prove", help="prove a dump and write a .pcert.json")
    p.add_argument("dump")
    p.add_argument("--NL", type=int)
    p.add_argument("--r-star", type=float, help="radius cap (default: the run's config, else 1e-4)")
    p.add_argument("--to-infinity", action="store_true")
    p.add_argument("--maximize-r", action="store_true")
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_prove)

    r = sub.add_parser("report", help="plot data from a certificate and its dump")
    r.add_argument("cert")
    r.add_argument("dump")
    r.add_argument("--resolution", type=int, default=64)
    r.add_argument("-o", "--out", help="output prefix")
    r.set_defaults(func=cmd_report)

    c = sub.add_parser("check", help="re-verify a certificate")
    c.add_argument("cert")
    c.set_defaults(func=cmd_check)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContractFailure, BoundFailure, DiagonalizationError) as exc:
        where = f" (subdomain {exc.domain})" if getattr(exc, "domain", None) else ""
        print(f"contraction failure{where}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (StabilityError, GapFailure, BasinFailure) as exc:
        print(f"stability failure: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except SolverError as exc:
        print(f"solver failure (subdomain {exc.domain}): {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
