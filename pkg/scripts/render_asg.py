"""Render ASG distributions for a grid of (lambda, eta) pairs.

    python3 scripts/render_asg.py --out runs/render
"""

import argparse
from pathlib import Path

from asgldl.asg import NormalizationMode, render_panel
from asgldl.lattice import fibonacci_sphere


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--pairs", default="1,1,5,5,1,5,5,1,2,20,20,2", help="flat lam,eta list")
    ap.add_argument("--mode", choices=["softmax", "linear"], default="linear")
    ap.add_argument("--out", default="runs/render")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flat = [float(v) for v in args.pairs.split(",")]
    mode = NormalizationMode.linear() if args.mode == "linear" else NormalizationMode.softmax()
    files = render_panel(fibonacci_sphere(args.m), out / "panel",
                         pairs=tuple(zip(flat[::2], flat[1::2])), norm=mode)
    print("\n".join(files))


if __name__ == "__main__":
    main()
