"""Command-line interface.

Matrix arguments ending in .csv use the text format; anything else uses the
binary format. All emitted tables are CSV with a header row. Every failure
exits nonzero with a one-line error on stderr.
"""

import argparse
import sys

import numpy as np

from .baselines import simple_reg_prune, sparsegpt_prune, wanda_prune
from .harness import (
    BENCH_METHODS,
    SyntheticSpec,
    benchmark_csv,
    gen_synthetic,
    reg_path_csv,
    reg_path_sweep,
    run_benchmark,
    toy_problem,
)
from .linalg import layer_loss
from .matio import load_matrix, save_matrix
from .pruner import LambdaSchedule, PruneConfig, masked_gd, prune_prox

_CLI_METHODS = ["prox", "wanda", "wanda-gd", "sparsegpt", "sparsegpt-gd", "l0", "l1", "l2"]


def _canon(method: str) -> str:
    return method.replace("-gd", "+gd")


def _run_method(method, W_star, H, sched, cfg):
    method = _canon(method)
    if method == "prox":
        W, mask, _ = prune_prox(W_star, H, sched, cfg)
    elif method.startswith("wanda"):
        W, mask = wanda_prune(W_star, H)
        if method.endswith("+gd"):
            W = masked_gd(W, W_star, H, mask, cfg.gd_steps)
    elif method.startswith("sparsegpt"):
        W, mask = sparsegpt_prune(W_star, H)
        if method.endswith("+gd"):
            W = masked_gd(W, W_star, H, mask, cfg.gd_steps)
    else:
        kind = {"l0": "R0", "l1": "R1", "l2": "R2"}[method]
        W, mask, _ = simple_reg_prune(W_star, H, kind, sched, cfg)
    return W, mask


def _sched_cfg(args):
    sched = LambdaSchedule(lambda0=args.lambda0, beta=args.beta)
    if args.adaptive_lambda is not None:
        sched.adaptive = True
        sched.lambda0_tilde = args.adaptive_lambda
    cfg = PruneConfig(max_iter=args.max_iter, gd_steps=args.gd_steps)
    return sched, cfg


def _cmd_prune(args):
    W_star = load_matrix(args.weights)
    H = load_matrix(args.hessian)
    sched, cfg = _sched_cfg(args)
    W, mask = _run_method(args.method, W_star, H, sched, cfg)
    save_matrix(args.out, W)
    save_matrix(args.mask_out, mask)


def _cmd_prox_path(args):
    z = np.array([float(v) for v in args.z.split(",")])
    if z.size != 4:
        raise ValueError("--z needs exactly 4 comma-separated values")
    lo, hi, n = args.lambda_min, args.lambda_max, args.points
    if n < 2 or hi <= lo:
        raise ValueError("need --points >= 2 and --lambda-max > --lambda-min")
    if lo > 0:
        grid = np.geomspace(lo, hi, n)
    else:
        grid = np.linspace(lo, hi, n)
    rows, lam2 = reg_path_sweep(z, grid)
    with open(args.out, "w") as fh:
        fh.write(reg_path_csv(rows, lam2))


def _cmd_synth(args):
    W, H = gen_synthetic(SyntheticSpec(d=args.d, alpha=args.alpha, seed=args.seed))
    save_matrix(args.out_weights, W)
    save_matrix(args.out_hessian, H)


def _cmd_bench(args):
    alphas = [float(v) for v in args.alphas.split(",")]
    if args.methods == "all":
        methods = list(BENCH_METHODS)
    else:
        methods = [_canon(m) for m in args.methods.split(",")]
    rows = run_benchmark(
        alphas,
        args.d,
        list(range(args.seeds)),
        methods,
        cfg=PruneConfig(max_iter=args.max_iter, gd_steps=args.gd_steps),
    )
    with open(args.out, "w") as fh:
        fh.write(benchmark_csv(rows))


def _cmd_toy(args):
    W_star, H = toy_problem()
    sched, cfg = _sched_cfg(args)
    W, mask = _run_method(args.method, W_star, H, sched, cfg)
    print("method", args.method)
    print("weights", " ".join(f"{v:g}" for v in W[0]))
    print("mask", " ".join(str(int(v)) for v in mask[0]))
    print("loss", f"{layer_loss(W, W_star, H):.9g}")


def _cmd_eval_loss(args):
    W = load_matrix(args.weights)
    W_ref = load_matrix(args.ref_weights)
    H = load_matrix(args.hessian)
    print(f"{layer_loss(W, W_ref, H):.12g}")


def _add_schedule_flags(p):
    p.add_argument("--gd-steps", type=int, default=1000)
    p.add_argument("--lambda0", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=1.01)
    p.add_argument("--adaptive-lambda", type=float, default=None, metavar="LAMBDA0_TILDE",
                   help="use the weight-scale-adaptive schedule with this base value")
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0,
                   help="reserved; the pruning methods are deterministic")


def build_parser():
    ap = argparse.ArgumentParser(prog="prune24",
                                 description="2:4 structured-sparsity pruning toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="prune a weight matrix against a hessian")
    p.add_argument("--method", required=True, choices=_CLI_METHODS)
    p.add_argument("--weights", required=True)
    p.add_argument("--hessian", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out", required=True)
    _add_schedule_flags(p)
    p.set_defaults(func=_cmd_prune)

    p = sub.add_parser("prox-path", help="cell prox solution along a penalty grid")
    p.add_argument("--z", required=True, help="4 comma-separated cell values")
    p.add_argument("--lambda-min", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prox_path)

    p = sub.add_parser("synth", help="generate a synthetic (weights, hessian) pair")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-weights", required=True)
    p.add_argument("--out-hessian", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench", help="run the synthetic pruning benchmark")
    p.add_argument("--alphas", default="1.0,0.9,0.7,0.5,0.3")
    p.add_argument("--d", type=int, default=128)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--methods", default="all")
    p.add_argument("--out", required=True)
    p.add_argument("--gd-steps", type=int, default=1000)
    p.add_argument("--max-iter", type=int, default=5000)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("toy", help="run a method on the built-in toy instance")
    p.add_argument("--method", default="prox", choices=_CLI_METHODS)
    _add_schedule_flags(p)
    p.set_defaults(func=_cmd_toy)

    p = sub.add_parser("eval-loss", help="reconstruction loss between two weight files")
    p.add_argument("--weights", required=True)
    p.add_argument("--ref-weights", required=True)
    p.add_argument("--hessian", required=True)
    p.set_defaults(func=_cmd_eval_loss)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # one-line errors, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
