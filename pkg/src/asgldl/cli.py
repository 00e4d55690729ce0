"""Command-line front end.

Every subcommand accepts ``--config FILE`` (JSON object or ``key = value``
lines); explicit flags win over config values.  Each run writes
``manifest.json`` next to its outputs with the resolved config and a SHA-256
of every artifact.

Exit codes: 0 success, 1 validation error (bad flags, bad input, failed
check), 2 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import asg, bias_lab, lattice, loss, metrics, poseio, trainer
from .asg import AsgParams, NormalizationMode
from .errors import IncompatibleLatticeError, ValidationError
from .rotation import REPRESENTATIONS


class UsageError(ValidationError):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _mode(args) -> NormalizationMode:
    return NormalizationMode.linear() if args.mode == "linear" else NormalizationMode.softmax(args.c)


def _add_mode(p, default="softmax"):
    p.add_argument("--mode", choices=["softmax", "linear"], default=default)
    p.add_argument("--c", type=float, default=1.0, help="softmax scale")


def build_parser() -> Parser:
    parser = Parser(prog="asgldl", description="ASG label-distribution toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def cmd(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON or key=value file; explicit flags take precedence")
        return p

    p = cmd("convert", "convert pose files between rotation representations")
    p.add_argument("--from", dest="src", choices=REPRESENTATIONS, required=True)
    p.add_argument("--to", dest="dst", choices=REPRESENTATIONS, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = cmd("lattice", "Fibonacci sphere lattice points and spacing")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", help="points CSV (x,y,z)")
    p.add_argument("--stats", action="store_true", help="print min/mean/max neighbour angle")
    p.add_argument("--curve", type=_ints, help="comma-separated m values for a spacing curve")
    p.add_argument("--curve-out", help="spacing curve CSV (m,mean_angle_deg)")

    p = cmd("encode", "encode a rotation as an ASG distribution for one head")
    p.add_argument("--matrix", required=True, help="JSON rotation matrix")
    p.add_argument("--head", type=int, choices=[0, 1, 2], required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--m", type=int, default=600)
    _add_mode(p)
    p.add_argument("--out", required=True, help="distribution CSV (k,x,y,z,p)")

    p = cmd("decode", "decode distribution CSVs to a vector (1 file) or rotation (3 files)")
    p.add_argument("--dist", nargs="+", required=True)
    p.add_argument("--m", type=int, help="expected lattice size")
    p.add_argument("--out", required=True, help="JSON output")

    p = cmd("eval", "MAE / MAEV between prediction and ground-truth pose files")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--format", choices=REPRESENTATIONS, default="euler")
    p.add_argument("--out", required=True, help="per-record report CSV")

    p = cmd("gradcheck", "finite-difference check of the analytic head-loss gradient")
    p.add_argument("--m", type=int, default=60)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="first configuration seed")
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--alpha", type=float, default=0.2)
    _add_mode(p)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--out", help="JSON report")

    p = cmd("train-toy", "train the toy three-head model on synthetic data")
    p.add_argument("--m", type=int, default=600)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--lr-decay", type=float, default=0.95)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--n", type=int, default=2000, help="training samples")
    p.add_argument("--eval-n", type=int, default=0,
                   help="held-out samples for metrics (0: use the training set)")
    p.add_argument("--hidden", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--fixed-lambda", type=float)
    p.add_argument("--fixed-eta", type=float)
    p.add_argument("--compare", type=_floats,
                   help="also train fixed-parameter runs: flat list lam1,eta1,lam2,eta2,...")
    _add_mode(p)
    p.add_argument("--out", required=True, help="run directory")

    p = cmd("bias-lab", "1-D truncated-Gaussian bias vs spherical decode error")
    p.add_argument("--sigma", type=float, default=30.0)
    p.add_argument("--mus", type=_floats, default=[0.0, 60.0, 120.0, 175.0])
    p.add_argument("--m", type=int, default=600)
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--eta", type=float, default=5.0)
    _add_mode(p, default="linear")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report directory")

    p = cmd("render", "render ASG distributions (default: the four reference pairs)")
    p.add_argument("--m", type=int, default=600)
    p.add_argument("--head", type=int, choices=[0, 1, 2], default=2)
    p.add_argument("--matrix", help="JSON rotation (default identity, so r_2 = ez)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--eta", type=float)
    _add_mode(p, default="linear")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if doc is not None:
        if not isinstance(doc, dict):
            raise ValidationError(f"{path}: JSON config must be an object")
        return {k.replace("-", "_"): v for k, v in doc.items()}
    cfg = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.lstrip("-").replace("-", "_")] = v
    return cfg


def _apply_config(sub: argparse.ArgumentParser, cfg: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        a = actions.get(key)
        if a is None or key in ("help", "config"):
            raise ValidationError(f"unknown config key {key!r}")
        if isinstance(a, argparse._StoreTrueAction):
            value = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
        elif a.type in (_floats, _ints):
            value = a.type(",".join(map(str, value)) if isinstance(value, list) else str(value))
        elif a.type is not None:
            value = a.type(value)
        if a.choices is not None and value not in a.choices:
            raise ValidationError(f"config {key}={value!r} not in {list(a.choices)}")
        defaults[key] = value
        a.required = False
    sub.set_defaults(**defaults)


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        raise UsageError("no command given")
    # config values must be in place before argparse checks required flags
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    if known.config and argv[0] in choices:
        _apply_config(choices[argv[0]], load_config(known.config))
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("no command given")
    return args


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir, args: argparse.Namespace, files) -> Path:
    out_dir = Path(out_dir)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "config")}
    artifacts = {}
    for f in sorted({Path(f).resolve() for f in files}):
        artifacts[Path(os.path.relpath(f, out_dir.resolve())).as_posix()] = _sha256(f)
    doc = {"command": args.command, "config": config, "seed": getattr(args, "seed", None),
           "artifacts": artifacts}
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _beside(path) -> Path:
    return Path(path).resolve().parent


def _json_dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_convert(args) -> int:
    poses = poseio.read_poses(args.input, args.src)
    poseio.write_poses(args.out, args.dst, poses)
    print(f"converted {len(poses)} records {args.src} -> {args.dst}")
    write_manifest(_beside(args.out), args, [Path(args.out).resolve()])
    return 0


def cmd_lattice(args) -> int:
    lat = lattice.fibonacci_sphere(args.m)
    files = []
    if args.out:
        lattice.write_points_csv(lat, args.out)
        files.append(Path(args.out).resolve())
    if args.stats:
        s = lattice.neighbor_angle_stats(lat)
        print(f"m={lat.m} nearest-neighbour angle (deg): "
              f"min {s['min']:.4f} mean {s['mean']:.4f} max {s['max']:.4f}")
    if args.curve:
        rows = lattice.spacing_curve(args.curve)
        for m, a in rows:
            print(f"{m},{a:.6f}")
        if args.curve_out:
            lattice.write_spacing_csv(rows, args.curve_out)
            files.append(Path(args.curve_out).resolve())
    if files:
        write_manifest(files[0].parent, args, files)
    return 0


def cmd_encode(args) -> int:
    R = poseio.read_matrix_json(args.matrix)
    lat = lattice.fibonacci_sphere(args.m)
    p = asg.encode(R, args.head, AsgParams(args.lam, args.eta), lat, _mode(args))
    asg.write_distribution_csv(p, lat, args.out)
    write_manifest(_beside(args.out), args, [Path(args.out).resolve()])
    return 0


def _read_dist(path, head: int, m: int | None):
    p, pts = asg.read_distribution_csv(path, head)
    if m is not None and p.lattice_m != m:
        raise IncompatibleLatticeError(f"{path}: {p.lattice_m} points, expected m={m}")
    lat = lattice.fibonacci_sphere(p.lattice_m)
    if np.max(np.abs(pts - lat.points)) > 1e-9:
        raise IncompatibleLatticeError(f"{path}: points do not match the m={p.lattice_m} lattice")
    return p, lat


def cmd_decode(args) -> int:
    if len(args.dist) == 1:
        p, lat = _read_dist(args.dist[0], 2, args.m)
        v = asg.decode_vector(p, lat)
        doc = {"vector": [float(x) for x in v], "norm": float(np.linalg.norm(v))}
    elif len(args.dist) == 3:
        parts = [_read_dist(path, i, args.m) for i, path in enumerate(args.dist)]
        lat = parts[0][1]
        R = asg.decode_pose(*(p for p, _ in parts), lat)
        doc = {"matrix": [float(x) for x in R.reshape(9)]}
    else:
        raise ValidationError("--dist takes 1 file (vector) or 3 files (rotation)")
    _json_dump(doc, args.out)
    write_manifest(_beside(args.out), args, [Path(args.out).resolve()])
    return 0


def cmd_eval(args) -> int:
    report = metrics.evaluate_files(args.pred, args.gt, args.format)
    metrics.write_report_csv(report, args.out)
    sys.stdout.write(metrics.summary_text(report))
    write_manifest(_beside(args.out), args, [Path(args.out).resolve()])
    return 0


def cmd_gradcheck(args) -> int:
    rep = loss.gradcheck(args.m, args.seeds, args.step, args.alpha, _mode(args), args.seed)
    ok = rep["max_rel_err"] <= args.tol
    print(f"gradcheck m={rep['m']} seeds={rep['seeds']} step={rep['step']:g} mode={rep['mode']}: "
          f"max_rel_err={rep['max_rel_err']:.3e} (seed {rep['seed']}, component "
          f"{rep['worst_component']}) tol={args.tol:g} -> {'PASS' if ok else 'FAIL'}")
    if args.out:
        _json_dump({**rep, "tol": args.tol, "pass": ok}, args.out)
        write_manifest(_beside(args.out), args, [Path(args.out).resolve()])
    return 0 if ok else 1


def cmd_train_toy(args) -> int:
    if (args.fixed_lambda is None) != (args.fixed_eta is None):
        raise ValidationError("--fixed-lambda and --fixed-eta must be given together")
    fixed = None if args.fixed_lambda is None else AsgParams(args.fixed_lambda, args.fixed_eta)
    cfg = trainer.TrainConfig(m=args.m, alpha=args.alpha, lr=args.lr, epochs=args.epochs,
                              batch=args.batch, seed=args.seed, mode=_mode(args),
                              fixed_params=fixed, lr_decay=args.lr_decay, hidden=args.hidden,
                              workers=args.workers)
    data = trainer.generate_dataset(args.n, args.noise, args.seed)
    eval_data = trainer.generate_dataset(args.eval_n, args.noise, args.seed + 1) \
        if args.eval_n > 0 else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = trainer.train(cfg, data, eval_data)
    trainer.write_history(res.history, out / "history.csv")
    trainer.dump_learned_params(res.model, eval_data or data, out / "params.csv")
    (out / "model.json").write_text(res.model.to_json() + "\n")
    files = [out / "history.csv", out / "params.csv", out / "model.json"]
    h0, h1 = res.history[0], res.history[-1]
    print(f"epoch 0 MAEV {h0['maev_deg']:.3f} -> epoch {h1['epoch']} MAEV {h1['maev_deg']:.3f} "
          f"(MAE {h1['mae_deg']:.3f})")
    if args.compare:
        if len(args.compare) % 2:
            raise ValidationError("--compare needs lambda,eta pairs")
        pairs = list(zip(args.compare[::2], args.compare[1::2]))
        base = trainer.TrainConfig(**{**cfg.__dict__, "fixed_params": None})
        rows = trainer.ablation(data, base, pairs, eval_data)
        with open(out / "ablation.csv", "w") as fh:
            fh.write("setting,initial_maev_deg,final_maev_deg,final_mae_deg,final_loss\n")
            for r in rows:
                fh.write(f"{r['setting']},{r['initial_maev_deg']!r},{r['final_maev_deg']!r},"
                         f"{r['final_mae_deg']!r},{r['final_loss']!r}\n")
                print(f"{r['setting']:>28}: MAEV {r['final_maev_deg']:.3f}  "
                      f"MAE {r['final_mae_deg']:.3f}")
        files.append(out / "ablation.csv")
    write_manifest(out, args, files)
    return 0


def cmd_bias_lab(args) -> int:
    out = Path(args.out)
    s = bias_lab.biased_vs_unbiased_report(out, args.sigma, args.mus, args.m,
                                           AsgParams(args.lam, args.eta), _mode(args),
                                           args.trials, args.seed)
    for r in s["bias_1d"]:
        print(f"1-D sigma={args.sigma:g} mu={r['mu']:g}: bias {r['bias']:+.6f} deg")
    print(f"spherical M={args.m} ({s['mode']}): mean {s['spherical_mean_angle_deg']:.5f} deg, "
          f"max {s['spherical_max_angle_deg']:.5f} deg; min |1-D bias| over mu in [90, 179]: "
          f"{s['min_abs_bias_1d_mu_90_179']:.5f} deg")
    files = [out / n for n in ("bias_1d.csv", "bias_1d.svg", "spherical_angles.csv",
                               "spherical_angles.svg", "summary.json")]
    write_manifest(out, args, files)
    return 0


def cmd_render(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lat = lattice.fibonacci_sphere(args.m)
    R = np.eye(3) if args.matrix is None else poseio.read_matrix_json(args.matrix)
    if (args.lam is None) != (args.eta is None):
        raise ValidationError("--lambda and --eta must be given together")
    if args.lam is None:
        files = asg.render_panel(lat, out / "asg_panel", R, args.head, norm=_mode(args))
    else:
        p = asg.encode(R, args.head, AsgParams(args.lam, args.eta), lat, _mode(args))
        files = asg.render_distribution(p, lat, out / "distribution",
                                        title=f"lambda={args.lam:g}, eta={args.eta:g}")
    write_manifest(out, args, [Path(f) for f in files])
    return 0


COMMANDS = {
    "convert": cmd_convert, "lattice": cmd_lattice, "encode": cmd_encode, "decode": cmd_decode,
    "eval": cmd_eval, "gradcheck": cmd_gradcheck, "train-toy": cmd_train_toy,
    "bias-lab": cmd_bias_lab, "render": cmd_render,
}


def dispatch(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValidationError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
