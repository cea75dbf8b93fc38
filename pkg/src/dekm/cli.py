"""Command-line entry point.

Subcommands: pretrain, run, ablate, eval, gen-synth. Configuration comes
from a JSON file (--config) with flat flag overrides; every artifact embeds
the resolved config for provenance. Timing lives in a separate section of
results.json so determinism checks can hash the rest.
"""

import os

# Cap BLAS parallelism before numpy is imported anywhere in this process.
_threads = os.environ.get("DEKM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import autoencoder as ae
from . import core, data, metrics
from .config import ExperimentConfig, load_config
from .errors import ConfigurationError, DekmError


def _load_dataset(cfg: ExperimentConfig) -> data.Dataset:
    spec = cfg.dataset
    kind = spec.get("type")
    if kind == "synthetic":
        return data.gen_synthetic(
            k=spec.get("k", cfg.dekm.get("k", 4)),
            per_cluster_n=spec.get("per_cluster_n", 500),
            latent_dim=spec.get("latent_dim", 2),
            ambient_dim=spec.get("ambient_dim", 10),
            separation=spec.get("separation", 5.0),
            seed=spec.get("seed", cfg.seed),
        )
    if kind == "csv":
        return data.load_csv(spec["path"], spec.get("has_labels", False))
    if kind == "idx":
        return data.load_idx(spec["images"], spec["labels"])
    raise ConfigurationError(f"dataset.type must be synthetic, csv or idx, got {kind!r}")


def _json_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _config_comment(cfg: ExperimentConfig) -> str:
    return "# config: " + json.dumps(cfg.to_dict(), sort_keys=True) + "\n"


def _pretrained_model(cfg: ExperimentConfig, ds: data.Dataset, seed: int):
    if cfg.checkpoint:
        model, _ = ae.load_checkpoint(cfg.checkpoint)
        if model.input_dim != ds.d:
            raise ConfigurationError(
                f"checkpoint input dim {model.input_dim} != dataset dim {ds.d}"
            )
        return model, []
    dims = cfg.encoder_dims(ds.d)
    model = ae.xavier_init(dims, seed)
    model, losses = ae.pretrain(
        model,
        ds.x,
        epochs=cfg.pretrain_epochs,
        batch_size=cfg.pretrain_batch_size,
        seed=seed,
        lr=cfg.pretrain_lr,
    )
    return model, losses


def cmd_pretrain(cfg: ExperimentConfig) -> int:
    ds = _load_dataset(cfg)
    dims = cfg.encoder_dims(ds.d)
    model = ae.xavier_init(dims, cfg.seed)
    model, losses = ae.pretrain(
        model,
        ds.x,
        epochs=cfg.pretrain_epochs,
        batch_size=cfg.pretrain_batch_size,
        seed=cfg.seed,
        lr=cfg.pretrain_lr,
    )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ae.save_checkpoint(
        out / "checkpoint.json",
        model,
        meta={"config": cfg.to_dict(), "seed": cfg.seed, "dataset": ds.name},
    )
    lines = [_config_comment(cfg), "epoch,sum_loss,mean_loss\n"]
    for i, loss in enumerate(losses):
        lines.append(f"{i},{loss!r},{loss / ds.n!r}\n")
    _write(out / "loss.csv", "".join(lines))
    print(f"wrote {out / 'checkpoint.json'} and {out / 'loss.csv'}")
    return 0


def _single_run(cfg: ExperimentConfig, ds: data.Dataset, seed: int):
    model, _ = _pretrained_model(cfg, ds, seed)
    dekm_cfg = cfg.dekm_config(seed)
    result, model, history = core.run_dekm(model, ds.x, dekm_cfg, labels=ds.labels)
    return result, model, history


def cmd_run(cfg: ExperimentConfig) -> int:
    ds = _load_dataset(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    timing = []
    history_lines = []
    last_model = None
    last_result = None
    for r in range(cfg.repeats):
        seed = cfg.seed + r
        t0 = time.perf_counter()
        result, model, history = _single_run(cfg, ds, seed)
        timing.append(time.perf_counter() - t0)
        final = history.records[-1]
        runs.append(
            {
                "repeat": r,
                "seed": seed,
                "acc": final.acc,
                "nmi": final.nmi,
                "inertia": final.inertia,
                "outer_iterations": len(history.records) - 1,
                "stopped_early": history.stopped_early,
            }
        )
        for rec in history.as_dicts():
            rec["repeat"] = r
            rec["seconds"] = None  # timing is segregated from the deterministic record
            history_lines.append(json.dumps(rec, sort_keys=True) + "\n")
        last_model, last_result = model, result

    def agg(key):
        vals = [run[key] for run in runs if run[key] is not None]
        if not vals:
            return {"mean": None, "std": None}
        return {"mean": float(np.mean(vals)), "std": float(np.std(vals))}

    results = {
        "config": cfg.to_dict(),
        "runs": runs,
        "aggregate": {"acc": agg("acc"), "nmi": agg("nmi"), "inertia": agg("inertia")},
        "timing": {"per_run_seconds": timing, "total_seconds": sum(timing)},
    }
    _write(out / "results.json", _json_dumps(results))
    _write(out / "history.jsonl", "".join(history_lines))

    h = ae.encode(last_model, ds.x)
    lines = [_config_comment(cfg)]
    lines.append(",".join([f"h{j}" for j in range(h.shape[1])] + ["cluster"]) + "\n")
    for i in range(h.shape[0]):
        cells = [repr(float(v)) for v in h[i]] + [str(int(last_result.assignments[i]))]
        lines.append(",".join(cells) + "\n")
    _write(out / "embedding.csv", "".join(lines))
    print(f"wrote {out / 'results.json'}, {out / 'history.jsonl'}, {out / 'embedding.csv'}")
    for run in runs:
        print(f"  repeat {run['repeat']}: acc={run['acc']} nmi={run['nmi']}")
    return 0


ABLATION_VARIANTS = [
    ("last_dim_Y", "mini_batch"),
    ("random_dim_Y", "mini_batch"),
    ("all_dims_Y", "mini_batch"),
    ("random_dim_H", "mini_batch"),
    ("all_dims_H", "mini_batch"),
    ("last_dim_Y", "full_batch"),
]


def cmd_ablate(cfg: ExperimentConfig) -> int:
    ds = _load_dataset(cfg)
    if ds.labels is None:
        raise ConfigurationError("ablation needs a labeled dataset to compare ACC curves")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    # One pretrained model per repeat seed, shared across all variants so
    # every curve starts from the same iteration-0 clustering.
    base_models = {}
    for r in range(cfg.repeats):
        base_models[r], _ = _pretrained_model(cfg, ds, cfg.seed + r)

    curves = {}
    for strategy, batch_mode in ABLATION_VARIANTS:
        name = strategy if batch_mode == "mini_batch" else f"{strategy}_full"
        per_repeat = []
        history_lines = []
        for r in range(cfg.repeats):
            seed = cfg.seed + r
            dekm_cfg = cfg.dekm_config(seed)
            dekm_cfg.strategy = strategy
            dekm_cfg.batch_mode = batch_mode
            _, _, history = core.run_dekm(
                base_models[r].copy(), ds.x, dekm_cfg, labels=ds.labels
            )
            per_repeat.append([rec.acc for rec in history.records])
            for rec in history.as_dicts():
                rec["repeat"] = r
                rec["variant"] = name
                history_lines.append(json.dumps(rec, sort_keys=True) + "\n")
        _write(out / f"history_{name}.jsonl", "".join(history_lines))
        depth = max(len(c) for c in per_repeat)
        padded = [c + [c[-1]] * (depth - len(c)) for c in per_repeat]
        curves[name] = np.mean(np.array(padded), axis=0)

    depth = max(len(c) for c in curves.values())
    names = [s if b == "mini_batch" else f"{s}_full" for s, b in ABLATION_VARIANTS]
    lines = [_config_comment(cfg), ",".join(["iter"] + names) + "\n"]
    for i in range(depth):
        row = [str(i)]
        for name in names:
            c = curves[name]
            row.append(repr(float(c[min(i, len(c) - 1)])))
        lines.append(",".join(row) + "\n")
    _write(out / "ablation.csv", "".join(lines))
    print(f"wrote {out / 'ablation.csv'}")
    for name in names:
        print(f"  {name}: final mean ACC {curves[name][-1]:.4f}")
    return 0


def _read_label_file(path) -> np.ndarray:
    vals = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                vals.append(int(float(line.split(",")[0])))
    if not vals:
        raise ConfigurationError(f"{path}: no labels")
    return np.array(vals, dtype=int)


def cmd_eval(labels_path, assignments_path, out_dir) -> int:
    g = _read_label_file(labels_path)
    c = _read_label_file(assignments_path)
    doc = {
        "inputs": {"labels": str(labels_path), "assignments": str(assignments_path)},
        "acc": metrics.acc(g, c),
        "nmi": metrics.nmi(g, c),
    }
    out = Path(out_dir)
    _write(out / "metrics.json", _json_dumps(doc))
    print(f"acc={doc['acc']:.6f} nmi={doc['nmi']:.6f}")
    return 0


def cmd_gen_synth(cfg: ExperimentConfig) -> int:
    spec = dict(cfg.dataset)
    spec.setdefault("type", "synthetic")
    if spec["type"] != "synthetic":
        raise ConfigurationError("gen-synth requires a synthetic dataset spec")
    cfg.dataset = spec
    ds = _load_dataset(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    data.save_csv(out / "data.csv", ds.x, ds.labels)
    meta = {k: v for k, v in ds.meta.items() if k != "latent"}
    _write(out / "metadata.json", _json_dumps({"config": cfg.to_dict(), "dataset": meta}))
    print(f"wrote {out / 'data.csv'} ({ds.n} x {ds.d}) and {out / 'metadata.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dekm",
        description="Deep embedded K-means: pretrain, run, ablate, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--iters", type=int, help="outer iteration budget")
        p.add_argument("--strategy", choices=core.STRATEGIES)
        p.add_argument("--batch-mode", dest="batch_mode", choices=core.BATCH_MODES)
        p.add_argument("--repeats", type=int)
        p.add_argument("--k", type=int, help="cluster count")
        p.add_argument("--checkpoint", help="model checkpoint to start from")

    for name in ("pretrain", "run", "ablate", "gen-synth"):
        common(sub.add_parser(name))

    p_eval = sub.add_parser("eval")
    p_eval.add_argument("labels", help="ground-truth label file, one integer per line")
    p_eval.add_argument("assignments", help="cluster assignment file, one integer per line")
    p_eval.add_argument("--out", default="out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args.labels, args.assignments, args.out)
        overrides = {
            k: getattr(args, k, None)
            for k in ("seed", "out", "iters", "strategy", "batch_mode", "repeats", "k", "checkpoint")
        }
        cfg = load_config(args.config, overrides)
        if args.command == "pretrain":
            return cmd_pretrain(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "ablate":
            return cmd_ablate(cfg)
        if args.command == "gen-synth":
            return cmd_gen_synth(cfg)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DekmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
