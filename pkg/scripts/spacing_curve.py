"""Mean nearest-neighbour angle of the Fibonacci lattice as M grows.

    python3 scripts/spacing_curve.py --out runs/spacing
"""

import argparse
import math
from pathlib import Path

import numpy as np

from asgldl.lattice import spacing_curve, write_spacing_csv
from asgldl.svg import line_chart


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ms", default="50,100,200,300,600,1000,2000,4000,8000")
    ap.add_argument("--out", default="runs/spacing")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ms = [int(m) for m in args.ms.split(",")]
    rows = spacing_curve(ms)
    write_spacing_csv(rows, out / "spacing.csv")
    # equal-area estimate: each point owns 4 pi / M steradians
    estimate = np.degrees(np.sqrt(4 * math.pi / np.array(ms)))
    line_chart(out / "spacing.svg",
               {"lattice": (np.array(ms), np.array([a for _, a in rows])),
                "sqrt(4 pi / M)": (np.array(ms), estimate)},
               "Nearest-neighbour angle vs lattice size", "M", "angle (deg)")
    for (m, a), e in zip(rows, estimate):
        print(f"M={m:5d}  mean NN angle {a:7.4f} deg  (area estimate {e:7.4f})")


if __name__ == "__main__":
    main()
