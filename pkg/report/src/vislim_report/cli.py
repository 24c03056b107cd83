"""`report <figure-kind> --in <dir> --out <file.png>`"""

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, build


def main(argv=None):
    p = argparse.ArgumentParser(
        prog="report", description="figures from vislim sweep outputs")
    p.add_argument("kind", choices=FIGURE_KINDS)
    p.add_argument("--in", dest="indir", required=True,
                   help="directory with results.csv/results.json/checkpoints")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--columns", nargs="*", default=(),
                   help="CSV columns to plot (convergence/residual)")
    p.add_argument("--time", type=float, default=None,
                   help="profile snapshot time (default: final)")
    p.add_argument("--x-slice", type=int, default=0,
                   help="profile x node index")
    p.add_argument("--epsilon", type=float, default=None,
                   help="profile checkpoint epsilon (default: discovered)")
    args = p.parse_args(argv)
    try:
        spec = FigureSpec(args.indir, args.kind, args.out,
                          columns=tuple(args.columns), time=args.time,
                          x_slice=args.x_slice, epsilon=args.epsilon)
        out = build(spec)
    except (ValueError, FileNotFoundError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
