"""1-D truncated-Gaussian bias over several sigmas next to the spherical decode error.

    python3 scripts/bias_report.py --out runs/bias
"""

import argparse
import json
from pathlib import Path

import numpy as np

from asgldl.asg import AsgParams, NormalizationMode
from asgldl.bias_lab import INTEGER_DEGREE_BINS, bias_sweep, biased_vs_unbiased_report
from asgldl.svg import line_chart


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigmas", default="5,10,20,30,45,60")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/bias")
    args = ap.parse_args()
    out = Path(args.out)
    summary = biased_vs_unbiased_report(out, n_trials=args.trials, seed=args.seed)

    sigmas = [float(s) for s in args.sigmas.split(",")]
    series = {}
    for sigma in sigmas:
        rows = bias_sweep(sigma, INTEGER_DEGREE_BINS)
        series[f"sigma={sigma:g}"] = (INTEGER_DEGREE_BINS, np.array([r["bias"] for r in rows]))
    line_chart(out / "bias_by_sigma.svg", series, "Expectation bias of 1-D label distributions",
               "label mu (deg)", "bias (deg)")
    with open(out / "bias_by_sigma.csv", "w") as fh:
        fh.write("mu," + ",".join(series) + "\n")
        for n, mu in enumerate(INTEGER_DEGREE_BINS):
            fh.write(f"{mu:g}," + ",".join(repr(float(s[1][n])) for s in series.values()) + "\n")
    print(json.dumps({k: v for k, v in summary.items() if k != "bias_1d"}, indent=2))


if __name__ == "__main__":
    main()
