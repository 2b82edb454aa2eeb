"""Command-line interface.

Subcommands:

* ``pid``             decompose a JSON distribution, CSV rows to stdout
* ``simulate``        run one simulation cell, write CSV/SVG/JSON outputs
* ``grid``            run a grid of cells from a JSON config
* ``verify-goldens``  recompute a golden file and compare

Exit codes: 0 on success, 2 on an assertion or verification failure, 3 on
solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, binning, goldens, report, runner, transfer
from .broja import NonConvergenceError
from .dist import DistributionError, load_json, save_json
from .pid import CCS_VARIANTS
from .runner import CellConfig, METHOD_ORDER

EXIT_OK = 0
EXIT_FAILURE = 2
EXIT_NONCONVERGENCE = 3


def _method_list(text: str):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    for m in methods:
        if m not in METHOD_ORDER:
            raise argparse.ArgumentTypeError(
                f"unknown method {m!r}; expected a comma list drawn from {METHOD_ORDER}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pidspectra",
        description="Partial information decomposition spectra of trivariate distributions")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pid", help="decompose a JSON probability array")
    p.add_argument("--input", required=True, help="distribution JSON file")
    p.add_argument("--methods", type=_method_list, default=METHOD_ORDER)
    p.add_argument("--normalize", action="store_true", help="report fractions of H(Y)")
    p.add_argument("--ccs-variant", choices=CCS_VARIANTS, default="observed-joint")
    p.add_argument("--broja-tol", type=float, default=1e-10)

    p = sub.add_parser("simulate", help="run one simulation cell")
    p.add_argument("--model", choices=runner.MODELS, required=True)
    p.add_argument("--transfer", required=True,
                   help="m1|m2|m3|m4|add|sub|mul|div")
    p.add_argument("--scenario", type=int, required=True)
    p.add_argument("--d", type=float, required=True, help="input correlation")
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--methods", type=_method_list, default=METHOD_ORDER)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--normalize", dest="normalize", action="store_true", default=None)
    group.add_argument("--absolute", dest="normalize", action="store_false")
    p.add_argument("--bins", type=int, default=binning.DEFAULT_BINS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dump-samples", action="store_true",
                   help="also write the raw samples as samples.csv")
    p.add_argument("--broja-tol", type=float, default=1e-10)

    p = sub.add_parser("grid", help="run a grid of cells from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--broja-tol", type=float, default=1e-10)

    p = sub.add_parser("verify-goldens", help="recompute and compare a golden file")
    p.add_argument("--golden", required=True)
    p.add_argument("--broja-tol", type=float, default=1e-10)
    return parser


def cmd_pid(args) -> int:
    dist = load_json(args.input)
    spectra = runner.decompose_all(dist, args.methods, args.normalize,
                                   broja_tol=args.broja_tol,
                                   ccs_variant=args.ccs_variant)
    print("method,UnqR,UnqC,Shd,Syn,Hres,HY")
    for s in spectra:
        vals = ",".join(repr(float(v)) for v in (*s.terms(), s.hy))
        print(f"{s.method},{vals}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = CellConfig(
        model=args.model, transfer=args.transfer, scenario=args.scenario,
        d=args.d, sigma=args.sigma, n=args.n, seed=args.seed,
        methods=args.methods, normalize=args.normalize, bins=args.bins)
    os.makedirs(args.out, exist_ok=True)

    dist, batch, diagnostics = runner._simulate_cell(config)
    spectra = runner.decompose_all(dist, config.methods, config.resolved_normalize,
                                   broja_tol=args.broja_tol)
    result = runner.GridResult(
        rows=[runner.GridRow(config=config, method=s.method, spectrum=s) for s in spectra],
        metadata={"seed": config.seed,
                  "rng": runner.RNG_ALGORITHM,
                  "bias": diagnostics["bias"],
                  "max_abs_t": diagnostics["max_abs_t"],
                  "clamp_fraction": diagnostics["clamp_fraction"]})
    report.emit_csv(result, os.path.join(args.out, "spectra.csv"))
    report.emit_svg(result, os.path.join(args.out, "spectra.svg"))
    save_json(dist, os.path.join(args.out, "dist.json"))
    with open(os.path.join(args.out, "metadata.json"), "w") as fh:
        json.dump(result.metadata, fh, indent=2)
        fh.write("\n")
    if args.dump_samples:
        report.emit_samples_csv(batch, os.path.join(args.out, "samples.csv"))
    return EXIT_OK


def cmd_grid(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    cells = runner.expand_grid(doc)
    result = runner.run_grid(cells, master_seed=doc.get("master_seed"),
                             jobs=args.jobs, broja_tol=args.broja_tol)
    os.makedirs(args.out, exist_ok=True)
    report.emit_csv(result, os.path.join(args.out, "grid.csv"))
    report.emit_svg(result, os.path.join(args.out, "grid.svg"))
    with open(os.path.join(args.out, "metadata.json"), "w") as fh:
        json.dump(result.metadata, fh, indent=2, default=str)
        fh.write("\n")
    for err in result.errors:
        cell = err["cell"]
        print(f"cell failed ({err['kind']}): {cell.model} {cell.transfer} "
              f"scenario {cell.scenario} d={cell.d}: {err['message']}", file=sys.stderr)
    if any(e["kind"] == "non-convergence" for e in result.errors):
        return EXIT_NONCONVERGENCE
    if result.errors:
        return EXIT_FAILURE
    return EXIT_OK


def cmd_verify_goldens(args) -> int:
    doc = goldens.load_goldens(args.golden)
    checks = goldens.verify_goldens(doc, broja_tol=args.broja_tol)
    failed = 0
    for check in checks:
        status = "ok" if check.ok else "FAIL"
        print(f"{status:4s} {check.dist_id:24s} {check.method:6s} "
              f"max err {check.max_err:.3e}  {check.message}")
        failed += 0 if check.ok else 1
    print(f"{len(checks) - failed}/{len(checks)} golden entries verified")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "pid": cmd_pid,
        "simulate": cmd_simulate,
        "grid": cmd_grid,
        "verify-goldens": cmd_verify_goldens,
    }
    try:
        return handlers[args.command](args)
    except NonConvergenceError as exc:
        print(f"solver non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (DistributionError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
