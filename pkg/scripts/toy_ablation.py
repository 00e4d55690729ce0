"""Adaptive vs fixed (lambda, eta) on the synthetic orientation task.

Trains one adaptive run and one run per fixed pair on the same data and seed,
then writes the comparison table and the learned-parameter dump.

    python3 scripts/toy_ablation.py --out runs/ablation
"""

import argparse
import csv
from pathlib import Path

from asgldl.asg import NormalizationMode
from asgldl.trainer import TrainConfig, ablation, dump_learned_params, generate_dataset, train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--eval-n", type=int, default=500)
    ap.add_argument("--noise", type=float, default=0.1)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--lr", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pairs", default="1,1,5,5,1,5,5,1", help="flat lam,eta list")
    ap.add_argument("--mode", choices=["softmax", "linear"], default="softmax")
    ap.add_argument("--out", default="runs/ablation")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    flat = [float(v) for v in args.pairs.split(",")]
    pairs = list(zip(flat[::2], flat[1::2]))
    mode = NormalizationMode.linear() if args.mode == "linear" else NormalizationMode.softmax()
    train_data = generate_dataset(args.n, args.noise, args.seed)
    eval_data = generate_dataset(args.eval_n, args.noise, args.seed + 1)
    base = TrainConfig(m=args.m, lr=args.lr, epochs=args.epochs, seed=args.seed, mode=mode)

    rows = ablation(train_data, base, pairs, eval_data)
    with open(out / "ablation.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"{'setting':>24}  {'MAEV':>8}  {'MAE':>8}")
    for r in rows:
        print(f"{r['setting']:>24}  {r['final_maev_deg']:8.3f}  {r['final_mae_deg']:8.3f}")

    adaptive = train(base, train_data, eval_data).model
    dump_learned_params(adaptive, eval_data, out / "learned_params.csv")


if __name__ == "__main__":
    main()
