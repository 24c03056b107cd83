"""Command-line interface.

Subcommands: solve-euler, solve-prandtl, build-ansatz, solve-ns, sweep,
verify-lemmas, report-data.  Exit codes: 0 success, 2 configuration error,
3 numerical failure (a diagnostics file is written next to the outputs).
"""

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import checkpoint
from .ansatz import residual_report
from .domain import Grid2D
from .errors import ConfigError, VislimError
from .harness import (build_ansatz_products, export, import_results,
                      load_config, run_pipeline, sweep)
from .norms import lemma_suite


def _parser():
    p = argparse.ArgumentParser(prog="vislim",
                                description="zero-viscosity-limit solver suite")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON sweep config")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--long", action="store_true",
                        help="append the extra small epsilon to the sweep")
    common.add_argument("--jobs", type=int, default=1,
                        help="concurrent epsilon rows")
    common.add_argument("--epsilon", type=float, default=None,
                        help="single epsilon (defaults to the largest)")
    for name in ("solve-euler", "solve-prandtl", "build-ansatz", "solve-ns",
                 "sweep", "verify-lemmas", "report-data"):
        sub.add_parser(name, parents=[common])
    return p


def _eps_of(args, cfg):
    return args.epsilon if args.epsilon is not None else cfg.epsilons[0]


def main(argv=None):
    args = _parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve-euler":
            prod = build_ansatz_products(cfg, _eps_of(args, cfg))
            checkpoint.write_states(out / "euler0.ckpt", prod.euler0)
            checkpoint.write_states(out / "euler1.ckpt", prod.euler1)
            print(f"wrote {out}/euler0.ckpt, euler1.ckpt")
        elif args.command == "solve-prandtl":
            prod = build_ansatz_products(cfg, _eps_of(args, cfg))
            checkpoint.write_layer(out / "prandtl.ckpt", prod.prandtl)
            print(f"wrote {out}/prandtl.ckpt")
        elif args.command == "build-ansatz":
            eps = _eps_of(args, cfg)
            prod = build_ansatz_products(cfg, eps)
            checkpoint.write_states(out / f"ansatz_eps{eps}.ckpt",
                                    prod.bundle,
                                    epsilon=eps)
            rows = residual_report(prod.bundle, cfg.params,
                                   indices=[len(prod.bundle.composed) - 2])
            with open(out / f"residual_eps{eps}.json", "w") as fh:
                json.dump(rows, fh, indent=1)
            print(f"wrote {out}/ansatz_eps{eps}.ckpt and residual report")
        elif args.command == "solve-ns":
            eps = _eps_of(args, cfg)
            prod = run_pipeline(cfg, eps, with_energy=False)
            checkpoint.write_states(out / f"ns_eps{eps}.ckpt", prod.cns)
            checkpoint.write_states(out / f"ansatz_eps{eps}.ckpt",
                                    prod.bundle, epsilon=eps)
            checkpoint.write_states(out / f"euler0_eps{eps}.ckpt",
                                    prod.euler0)
            with open(out / f"errors_eps{eps}.json", "w") as fh:
                json.dump(prod.errors, fh, indent=1)
            print(f"wrote {out}/ns_eps{eps}.ckpt and error norms")
        elif args.command == "sweep":
            result = sweep(cfg, jobs=args.jobs, long=args.long)
            path = export(result, out)
            print(f"wrote {path} (+results.json, lemmas.jsonl)")
            if result.failures:
                print(f"failed rows: {result.failures}", file=sys.stderr)
                return 3
        elif args.command == "verify-lemmas":
            grid = Grid2D(64, 64, y_max=4.0, stretch=0.0)
            recs = lemma_suite(grid, seed=cfg.seed or 1234)
            with open(out / "lemmas.jsonl", "w") as fh:
                for rec in recs:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
            bad = [r for r in recs if not r["pass"]]
            print(f"{len(recs)} checks, {len(bad)} failures")
            if bad:
                return 3
        elif args.command == "report-data":
            data = import_results(out / "results.json")
            print(json.dumps(data["slopes"], indent=1, sort_keys=True))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except VislimError as e:
        diag = out / "diagnostics.json"
        with open(diag, "w") as fh:
            json.dump({"error": str(e), "type": type(e).__name__,
                       "traceback": traceback.format_exc()}, fh, indent=1)
        print(f"numerical failure: {e} (diagnostics in {diag})",
              file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
