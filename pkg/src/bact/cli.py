"""Command-line entry points.

Subcommands::

    bact gen-data  --out data/demo [--config cfg.yaml --seed 7 --format feat]
    bact run       [--config cfg.yaml --seed 7 --budget-pct 0.5
                    --strategy boundary --acq-fn entropy --out runs/demo]
    bact sweep     --axis weights|clip-len|acquisition [--config ... --out ...]
    bact serve     [--config ... --host 127.0.0.1 --port 8321]
    bact eval      --data data/demo --pred preds/ [--out report.json]

`run` drives the full loop against the ground-truth oracle and exports
history.json / history.csv / selections.json; `serve` runs the same
loop but blocks each round on human labels submitted over HTTP.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .annotate import export_results
from .config import (
    ExperimentConfig,
    config_to_dict,
    load_config,
    with_seed,
)
from .dataset import generate_synthetic, load_dataset, save_dataset
from .loop import CLIP_LENGTH_GRID, CLIP_STRATEGIES, run_experiment, sweep, weight_grid
from .metrics import evaluate
from .uncertainty import ACQUISITION_FNS


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, help="override every seed in the config")
    p.add_argument(
        "--budget-pct",
        type=float,
        help="label budget as a percentage of train-split frames",
    )
    p.add_argument("--strategy", choices=CLIP_STRATEGIES, help="clip selection strategy")
    p.add_argument("--acq-fn", choices=ACQUISITION_FNS, help="frame acquisition function")
    p.add_argument("--out", help="output directory")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    if getattr(args, "out", None):
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    loop = cfg.loop
    if getattr(args, "strategy", None):
        loop = dataclasses.replace(loop, clip_strategy=args.strategy)
    if getattr(args, "acq_fn", None):
        loop = dataclasses.replace(loop, acquisition=args.acq_fn)
    return dataclasses.replace(cfg, loop=loop)


def _dataset(cfg: ExperimentConfig):
    if cfg.data_path is not None:
        return load_dataset(cfg.data_path)
    return generate_synthetic(cfg.synthetic)


def _apply_budget_pct(cfg: ExperimentConfig, ds, pct) -> ExperimentConfig:
    if pct is None:
        return cfg
    total = sum(ds.video(v).T for v in ds.train_ids)
    budget = max(cfg.loop.n_init * cfg.loop.init_clips, round(total * pct / 100.0))
    return dataclasses.replace(cfg, loop=dataclasses.replace(cfg.loop, budget=budget))


def cmd_run(args) -> int:
    cfg = _load(args)
    ds = _dataset(cfg)
    cfg = _apply_budget_pct(cfg, ds, args.budget_pct)
    history = run_experiment(ds, cfg.loop)
    if not history:
        print("no rounds executed (rounds=0)")
        return 0
    export_results(history, cfg.out_dir, config=config_to_dict(cfg))
    for h in history:
        r = h.report
        print(
            f"round {h.round_index}: labeled {h.labeled_after:4d}  "
            f"acc {r.accuracy:6.2f}  edit {r.edit:6.2f}  f1@50 {r.f1[0.50][0]:6.2f}"
            + (f"  [{h.stop_reason}]" if h.stop_reason else "")
        )
    print(f"history written to {cfg.out_dir}/history.json")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    ds = _dataset(cfg)
    cfg = _apply_budget_pct(cfg, ds, args.budget_pct)
    if args.axis == "weights":
        grid = {"weights": weight_grid()}
    elif args.axis == "clip-len":
        grid = {"clip_len": list(CLIP_LENGTH_GRID)}
    else:
        grid = {"acquisition": list(ACQUISITION_FNS)}
    rows = sweep(ds, cfg.loop, grid)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for overrides, report in rows:
        desc = {
            k: (list(v) if isinstance(v, tuple) else v) for k, v in overrides.items()
        }
        records.append({"overrides": desc, "report": report.to_dict() if report else None})
    (out / "sweep.json").write_text(
        json.dumps({"axis": args.axis, "rows": records}, sort_keys=True, indent=2) + "\n"
    )
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("config,acc,edit,f1_10,f1_25,f1_50\n")
        for overrides, report in rows:
            name = ";".join(f"{k}={v}" for k, v in sorted(overrides.items()))
            vals = ",".join(str(x) for x in report.csv_row()) if report else ",,,,"
            fh.write(f"{name},{vals}\n")
    print(f"{len(rows)} configurations -> {out}/sweep.csv")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import serve_app

    cfg = _load(args)
    runtime, app = serve_app(cfg)
    if args.budget_pct is not None:
        print("--budget-pct is resolved at config load for serve; ignoring", file=sys.stderr)
    print(f"experiment {cfg.experiment_id!r} running; annotate via the HTTP API")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_eval(args) -> int:
    ds = load_dataset(args.data)
    name_to_id = {name: i for i, name in enumerate(ds.class_names)}
    preds, gts = {}, {}
    for vid in ds.test_ids:
        video = ds.video(vid)
        lines = Path(args.pred, f"{vid}.txt").read_text().splitlines()
        preds[vid] = [name_to_id[ln.strip()] for ln in lines if ln.strip()]
        gts[vid] = video.gt_labels
    report = evaluate(preds, gts, num_classes=ds.num_classes)
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2)
    print(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_gen_data(args) -> int:
    cfg = _load(args)
    if cfg.synthetic is None:
        print("config selects an on-disk dataset; nothing to generate", file=sys.stderr)
        return 2
    ds = generate_synthetic(cfg.synthetic)
    save_dataset(ds, args.out, feature_format=args.format)
    total = sum(v.T for v in ds.videos)
    print(
        f"wrote {len(ds.videos)} videos ({total} frames, "
        f"{len(ds.class_names)} classes) to {args.out}"
    )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bact", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an active-learning experiment with the oracle")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid-sweep one config axis")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--axis", choices=("weights", "clip-len", "acquisition"), default="weights"
    )
    p_sweep.set_defaults(fn=cmd_sweep)

    p_serve = sub.add_parser("serve", help="serve the human-annotation HTTP API")
    _add_common(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8321)
    p_serve.set_defaults(fn=cmd_serve)

    p_eval = sub.add_parser("eval", help="score predicted label files against a dataset")
    p_eval.add_argument("--data", required=True, help="dataset directory")
    p_eval.add_argument("--pred", required=True, help="directory of <video>.txt predictions")
    p_eval.add_argument("--out", help="optional report JSON path")
    p_eval.set_defaults(fn=cmd_eval)

    p_gen = sub.add_parser("gen-data", help="write a synthetic dataset to disk")
    p_gen.add_argument("--config", help="YAML experiment config")
    p_gen.add_argument("--seed", type=int, help="override the generator seed")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--format", choices=("feat", "csv"), default="feat")
    p_gen.set_defaults(fn=cmd_gen_data)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
