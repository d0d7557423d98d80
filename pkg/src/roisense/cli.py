"""Command-line front door: ``roisense {gen-scenes,gen-data,train,run,bench}``.

Exit status is 0 on success, 1 when a run fails and 2 on usage or
configuration errors.  ``ARS_THREADS`` caps the benchmark worker count.
"""
from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys

from .errors import MalformedDocument, RoiSenseError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SCENE_GLOB = "scene_*.json"

log = logging.getLogger("roisense")


class UsageError(Exception):
    pass


def _gen_params(args):
    from .scene import GenParams

    kw = {}
    for name in ("width", "height", "depth", "standoff", "elevation"):
        lo, hi = getattr(args, f"{name}_min"), getattr(args, f"{name}_max")
        if lo is not None or hi is not None:
            default = getattr(GenParams, name)
            kw[name] = (default[0] if lo is None else lo, default[1] if hi is None else hi)
    if args.objects_min is not None or args.objects_max is not None:
        d = GenParams.object_count
        kw["object_count"] = (d[0] if args.objects_min is None else args.objects_min,
                              d[1] if args.objects_max is None else args.objects_max)
    if args.resolution is not None:
        kw["resolution"] = args.resolution
    params = GenParams(**kw)
    try:
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return params


def cmd_gen_scenes(args) -> int:
    from .scene import generate_scene, save_scene

    if args.count < 1:
        raise UsageError("--count must be at least 1")
    params = _gen_params(args)
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        scene = generate_scene(params, seed=args.seed + i)
        path = os.path.join(args.out, f"scene_{i:04d}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(save_scene(scene))
    log.info("wrote %d scenes to %s", args.count, args.out)
    return EXIT_OK


def cmd_gen_data(args) -> int:
    from .scorer import generate_dataset

    if args.samples < 1:
        raise UsageError("--samples must be at least 1")

    def progress(i, n):
        if i % 500 == 0:
            log.info("%d / %d samples", i, n)

    data = generate_dataset(args.samples, seed=args.seed, progress=progress)
    data.save(args.out)
    log.info("wrote %d samples to %s (digest %s)", len(data), args.out, data.digest()[:16])
    return EXIT_OK


def cmd_train(args) -> int:
    from .scorer import Dataset, TrainHyper, train_surrogate

    data = Dataset.load(args.data)
    hyper = TrainHyper(lr=args.lr, batch=args.batch, epochs=args.epochs, seed=args.seed)
    if hyper.lr <= 0 or hyper.batch < 1 or hyper.epochs < 1:
        raise UsageError("--lr, --batch and --epochs must be positive")
    model, report = train_surrogate(data, hyper)
    model.save(args.out)
    summary = {k: v for k, v in report.to_dict().items() if k != "history"}
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def cmd_run(args) -> int:
    from .pipeline import PipelineConfig, run_pipeline
    from .scene import load_scene
    from .scorer import ScorerKind, ScorerModel

    scene = load_scene(args.scene)
    kind = ScorerKind(args.scorer)
    if kind.learned and not args.model:
        raise UsageError(f"--scorer {kind.value} needs --model")
    model = ScorerModel.load(args.model) if kind.learned else None
    cfg = PipelineConfig(c_max=args.c_max, budget=args.budget, scorer=kind, strategy=args.strategy,
                         seed=args.seed)
    dump_dir = None
    if args.dump_belief:
        dump_dir = os.path.splitext(args.out)[0] + "_belief"
        os.makedirs(dump_dir, exist_ok=True)
    report = run_pipeline(scene, args.prompt, cfg, model, dump_dir=dump_dir)
    report.save(args.out)
    print(f"success={report.success} reason={report.reason!r} viewpoints={report.unique_viewpoints} "
          f"moved={report.objects_moved} coverage={report.final_coverage:.3f}")
    return EXIT_OK if report.success else EXIT_FAIL


def cmd_bench(args) -> int:
    from .bench import BenchConfig, run_benchmark, with_methods, write_outputs
    from .scene import load_scene

    paths = sorted(glob.glob(os.path.join(args.scenes, SCENE_GLOB)))
    if not paths:
        raise UsageError(f"no {SCENE_GLOB} files in {args.scenes}")
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        methods = with_methods(names, oracle=args.oracle)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if any(m.scorer.learned for m in methods) and not args.model:
        raise UsageError("learned scorers need --model (or pass --oracle)")
    if args.strata < 1:
        raise UsageError("--strata must be at least 1")
    scenes = [load_scene(p) for p in paths]
    result = run_benchmark(scenes, methods, BenchConfig(c_max=args.c_max, budget=args.budget),
                           seed=args.seed, model_path=args.model)
    write_outputs(result, args.out, args.strata)
    for name, agg in result.aggregates.items():
        print(f"{name:8s} SR {agg['sr']:5.1f}%  objects {agg['objects_mean']:.2f}+-{agg['objects_std']:.2f}  "
              f"viewpoints {agg['viewpoints_mean']:.2f}+-{agg['viewpoints_std']:.2f}  "
              f"time {agg['time_mean']:.1f}+-{agg['time_std']:.1f} s (synthetic)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roisense", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-scenes", help="generate a seeded scene set")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    for name in ("width", "height", "depth", "standoff", "elevation"):
        g.add_argument(f"--{name}-min", type=float)
        g.add_argument(f"--{name}-max", type=float)
    g.add_argument("--objects-min", type=int)
    g.add_argument("--objects-max", type=int)
    g.add_argument("--resolution", type=float)
    g.set_defaults(func=cmd_gen_scenes)

    d = sub.add_parser("gen-data", help="generate surrogate training samples")
    d.add_argument("--samples", type=int, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train the coverage surrogate")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--batch", type=int, default=64)
    t.add_argument("--epochs", type=int, default=200)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("run", help="explore one prompt in one scene")
    r.add_argument("--scene", required=True)
    r.add_argument("--prompt", required=True)
    r.add_argument("--scorer", choices=["oracle-roi", "learned-roi", "oracle-scene", "learned-scene"],
                   default="oracle-roi")
    r.add_argument("--model")
    r.add_argument("--strategy", choices=["vb", "rb", "nb"], default="vb")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", required=True)
    r.add_argument("--dump-belief", action="store_true")
    r.add_argument("--c-max", type=float, default=0.8)
    r.add_argument("--budget", type=int, default=8)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="compare methods over a scene set")
    b.add_argument("--scenes", required=True)
    b.add_argument("--methods", default="ours,rs-rb,rs-nb,s-vb,s-nb")
    b.add_argument("--model")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--oracle", action="store_true")
    b.add_argument("--strata", type=int, default=3)
    b.add_argument("--c-max", type=float, default=0.8)
    b.add_argument("--budget", type=int, default=8)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"roisense {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MalformedDocument, ValueError, RoiSenseError) as exc:
        print(f"roisense {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
