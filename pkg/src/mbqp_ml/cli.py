"""Command line entry point: ``mbqp-ml <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from loguru import logger


def _write_json(path, doc) -> None:
    text = json.dumps(doc)
    if path is None or str(path) == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text)


def _family_params(args) -> dict:
    out = {}
    for key in ("k", "m", "grid_w", "grid_h", "separation", "scenarios", "max_turbines"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def cmd_generate(args) -> None:
    from .generators import GenConfig, generate

    params = _family_params(args)
    if args.count == 1:
        inst = generate(GenConfig(args.family, args.n, args.density, args.seed, params))
        _write_json(args.out, inst.to_dict())
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for s in range(args.seed, args.seed + args.count):
        inst = generate(GenConfig(args.family, args.n, args.density, s, params))
        inst.save(out / f"{args.family}_n{args.n}_s{s}.json")


def cmd_relax(args) -> None:
    from .instance import MbqpInstance
    from .relaxation import solve_relaxation

    r = solve_relaxation(MbqpInstance.load(args.input), args.budget)
    _write_json(args.out, {
        "x_bar": r.x_bar.tolist(), "relaxed_objective": r.relaxed_objective,
        "max_violation": r.max_violation, "iterations": r.iterations,
    })


def cmd_solve(args) -> None:
    from .bnb import solve
    from .instance import MbqpInstance

    _write_json(args.out, solve(MbqpInstance.load(args.input), args.nodes).to_dict())


def cmd_collect(args) -> None:
    from .datagen import collect
    from .instance import MbqpInstance

    inst = MbqpInstance.load(args.input)
    ss = collect(inst, relax_budget=args.relax_budget, node_budget=args.node_budget,
                 K=args.K, p1=args.p1, p2=args.p2, seed=args.seed)
    ref = None
    if args.instance_ref:
        ref = str(Path(args.input).resolve())
    _write_json(args.out, ss.to_dict(ref))


def cmd_encode(args) -> None:
    from .graph import build_tripartite
    from .instance import MbqpInstance

    _write_json(args.out, build_tripartite(MbqpInstance.load(args.input)).to_dict())


def _load_dataset(path):
    from .datagen import SampleSet

    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    sets = [SampleSet.load(f) for f in files]
    if not sets:
        raise SystemExit(f"no datasets found in {path}")
    return sets


def cmd_train(args) -> None:
    import torch

    from .neural import TrainConfig, save_checkpoint, select_lambda, train

    torch.use_deterministic_algorithms(True)
    sets = _load_dataset(args.data)
    n_val = int(round(args.val_frac * len(sets))) if len(sets) > 1 else 0
    train_sets, val_sets = sets[: len(sets) - n_val], sets[len(sets) - n_val:]
    cfg = TrainConfig(
        loss_kind=args.loss, lambda_cl=args.lambda_cl if args.lambda_cl else 1.0,
        temperature_w=args.temperature_w, lr=args.lr, weight_decay=args.weight_decay,
        batch_size=args.batch_size, epochs=args.epochs, hidden=args.hidden, heads=args.heads, seed=args.seed,
    )
    if cfg.loss_kind == "cl+wce" and args.lambda_cl is None and val_sets:
        lam, res = select_lambda(train_sets, val_sets, cfg)
        cfg.lambda_cl = lam
    else:
        res = train(train_sets, cfg, val_sets or None)
    save_checkpoint(args.out, res.best, cfg)
    if args.log:
        _write_json(args.log, {"lambda_cl": cfg.lambda_cl, "log": res.log, "best_val_brier": res.best_val_brier})


def cmd_infer(args) -> None:
    from .heuristic import neural_dive
    from .instance import MbqpInstance
    from .neural import load_checkpoint

    inst = MbqpInstance.load(args.input)
    res = neural_dive(inst, load_checkpoint(args.model), args.p, args.node_budget)
    _write_json(args.out, res.to_dict())


def cmd_bench(args) -> None:
    from .bench import BenchConfig, run_experiment
    from .instance import MbqpInstance
    from .neural import load_checkpoint

    path = Path(args.instances)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    instances = []
    for f in files:
        inst = MbqpInstance.load(f)
        inst.name = f.stem
        instances.append(inst)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    models = {}
    if "neural_dive" in methods:
        if not args.models:
            raise SystemExit("neural_dive requires --models")
        for m in args.models.split(","):
            mp = Path(m)
            if not mp.exists():
                raise SystemExit(f"model file not found: {mp}")
            models[mp.stem] = load_checkpoint(mp)
    report = run_experiment(BenchConfig(
        instances=instances, methods=methods, models=models,
        node_budget=args.node_budget, relax_budget=args.relax_budget, p=args.p,
    ))
    report.write_csv(args.out, include_wall=not args.no_wall)
    if args.series:
        report.write_series(args.series)
    if args.summary:
        _write_json(args.summary, report.summary)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mbqp-ml", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate benchmark instances")
    p.add_argument("--family", required=True, choices=["cbqp", "qmkp", "cqkp", "wflop"])
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--density", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="N > 1 writes seed-indexed files into --out")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--grid-w", dest="grid_w", type=int)
    p.add_argument("--grid-h", dest="grid_h", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--scenarios", type=int)
    p.add_argument("--max-turbines", dest="max_turbines", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("relax", help="continuous relaxation of an instance")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--budget", type=int, default=5000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("solve", help="branch-and-bound with a node budget")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--nodes", type=int, default=200_000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("collect", help="Randomized Relax-Search training data")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--K", type=int, default=10)
    p.add_argument("--p1", type=float, default=0.9)
    p.add_argument("--p2", type=float, default=0.7)
    p.add_argument("--relax-budget", type=int, default=5000)
    p.add_argument("--node-budget", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instance-ref", action="store_true", help="store the instance path instead of inlining it")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("encode", help="dump the tripartite graph (debugging)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train a solution predictor")
    p.add_argument("--data", required=True, help="dataset JSON file or directory of them")
    p.add_argument("--loss", default="cl+wce", choices=["wce", "cl", "cl+wce"])
    p.add_argument("--lambda", dest="lambda_cl", type=float, default=None,
                   help="CL weight; omitted with cl+wce selects it from {1,2,5,7} by validation Brier score")
    p.add_argument("--temperature-w", type=float, default=-0.5)
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", default=None, help="write the training log as JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="neural diving on one instance")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--p", type=float, default=0.7)
    p.add_argument("--node-budget", type=int, default=200_000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("bench", help="compare methods by primal gap / primal integral")
    p.add_argument("--instances", required=True)
    p.add_argument("--models", default="")
    p.add_argument("--methods", default="neural_dive,relax_round,bnb")
    p.add_argument("--node-budget", type=int, default=200_000)
    p.add_argument("--relax-budget", type=int, default=5000)
    p.add_argument("--p", type=float, default=0.7)
    p.add_argument("--out", required=True)
    p.add_argument("--series", default=None)
    p.add_argument("--summary", default=None)
    p.add_argument("--no-wall", action="store_true", help="omit the wall_ms column")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logger.enable("mbqp_ml")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
