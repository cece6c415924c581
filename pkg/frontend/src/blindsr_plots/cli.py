"""Command-line figure rendering: phase | converge | noise."""

from __future__ import annotations

import argparse

from .plots import render_convergence, render_noise, render_phase


def build_parser():
    ap = argparse.ArgumentParser(prog="blindsr-plot")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase", help="success-rate heatmap from cells.csv")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--overlay", default=None, metavar="EXPR",
                   help="curve equation, e.g. 'r*s=20' or 'n=2.5*s'")
    p.add_argument("--out", default="phase.png", metavar="PATH")

    p = sub.add_parser("converge", help="error curves from trace_<n>.csv files")
    p.add_argument("--in", dest="infile", required=True, nargs="+", metavar="PATH")
    p.add_argument("--out", default="converge.png", metavar="PATH")

    p = sub.add_parser("noise", help="error vs SNR from noise.csv")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--out", default="noise.png", metavar="PATH")

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "phase":
        path = render_phase(args.infile, args.out, overlay=args.overlay)
    elif args.command == "converge":
        path = render_convergence(args.infile, args.out)
    else:
        path = render_noise(args.infile, args.out)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
