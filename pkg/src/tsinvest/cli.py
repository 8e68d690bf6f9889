"""Command-line entry point: synth, prepare, train, eval, simulate, bench.

Every command writes its file artifacts plus a run manifest (written last,
atomically). Failures exit with a category-specific code and a one-line
`category: message` on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, errors
from .data import (build_panels, filter_short_series, investor_centric_split,
                   load_dataset, load_panels, save_dataset, save_panels,
                   training_vocabulary)
from .data.vocab import CategoryVocabulary
from .evaluation import (MetricsReport, auc_roc, evaluate_runs, export_roc_csv,
                         roc_curve)
from .models import (build_model, config_from_json, default_config,
                     load_checkpoint, save_checkpoint)
from .portfolio import SimConfig, export_sim_csv, export_sim_json, simulate
from .synthetic import SynthConfig, generate
from .training import (TrainConfig, benchmark_step_time, fit,
                       panels_to_arrays, predict_scores, relative_time_table)

EXIT_CODES = {
    errors.ParseError: 3,
    errors.ValidationError: 4,
    errors.SplitInfeasibleError: 5,
    errors.DivergenceError: 6,
    errors.ConfigurationError: 7,
    errors.SchemaMismatchError: 8,
    errors.InfeasibleSizeError: 9,
    errors.TsInvestError: 10,
    FileNotFoundError: 2,
}


def _default_seed() -> int:
    return int(os.environ.get("TSINVEST_SEED", "0"))


def _load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} does not exist")
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        try:
            return tomllib.loads(text.decode("utf-8"))
        except Exception as exc:
            raise errors.ParseError(f"{path}: bad TOML ({exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise errors.ParseError(f"{path}: bad JSON ({exc.msg})") from exc


def _write_manifest(path: Path, command: str, config: dict, seed: int,
                    inputs: list, outputs: list, t_start: float) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": f"tsinvest-{__version__}",
        "wall_clock_seconds": time.time() - t_start,
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_synth(args) -> int:
    t0 = time.time()
    overrides = _load_config_file(args.config) if args.config else {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    overrides.setdefault("seed", _default_seed())
    try:
        config = SynthConfig(**overrides)
    except TypeError as exc:
        raise errors.ConfigurationError(f"synth config: {exc}") from exc
    records = generate(config)
    out = Path(args.out)
    save_dataset(out, records)
    _write_manifest(out.parent / (out.name + ".manifest.json"), "synth",
                    config.__dict__, config.seed, [args.config or ""], [out], t0)
    print(f"wrote {len(records)} records to {out}")
    return 0


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = text.split("/")
    if len(parts) != 3:
        raise errors.ValidationError(f"--split expects train/val/test, got {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def cmd_prepare(args) -> int:
    t0 = time.time()
    records = load_dataset(args.data)
    records = filter_short_series(records)
    fractions = _parse_fractions(args.split)
    split = investor_centric_split(records, fractions, args.seed)
    vocab = training_vocabulary(split.train)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for part in split.parts:
        part_records = split.part(part)
        if part == "validation" and not part_records:
            print("warning: empty validation split (no validation file written)",
                  file=sys.stderr)
            continue
        panels = build_panels(part_records, vocab, args.task)
        path = out / f"{part}.jsonl"
        save_panels(path, panels)
        outputs.append(path)
    vocab_path = out / "vocab.json"
    with open(vocab_path, "w", encoding="utf-8") as fh:
        json.dump(vocab.to_json(), fh, indent=1, sort_keys=True)
    outputs.append(vocab_path)
    config = {"task": args.task, "split": args.split, "seed": args.seed}
    _write_manifest(out / "run_manifest.json", "prepare", config, args.seed,
                    [args.data], outputs, t0)
    print(f"prepared {[len(split.part(p)) for p in split.parts]} "
          f"(train/validation/test) companies into {out}")
    return 0


def _load_part(panels_dir, part: str, required: bool = True):
    path = Path(panels_dir) / f"{part}.jsonl"
    if not path.exists():
        if required:
            raise FileNotFoundError(f"missing panel file {path}")
        return []
    return load_panels(path)


def _load_vocab(panels_dir) -> CategoryVocabulary:
    path = Path(panels_dir) / "vocab.json"
    if not path.exists():
        raise FileNotFoundError(f"missing vocabulary file {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return CategoryVocabulary.from_json(json.load(fh))


def cmd_train(args) -> int:
    t0 = time.time()
    train_panels = _load_part(args.panels, "train")
    val_panels = _load_part(args.panels, "validation", required=False)
    vocab = _load_vocab(args.panels)
    file_config = _load_config_file(args.config) if args.config else {}
    try:
        train_config = TrainConfig(**file_config.get("train", {}))
        if args.seed is not None:
            train_config.seed = args.seed
        model_overrides = file_config.get("model", {})
        if model_overrides:
            model_config = config_from_json(args.model, model_overrides)
        else:
            model_config = default_config(args.model)
    except (TypeError, ValueError) as exc:
        raise errors.ConfigurationError(f"train config: {exc}") from exc
    model = build_model(args.model, model_config, vocab.size, train_config.seed)
    model, report = fit(model, train_panels, val_panels, train_config)
    out = Path(args.out)
    ckpt_dir = out / "checkpoint"
    save_checkpoint(ckpt_dir, model, vocab, train_config.task)
    report_path = out / "train_report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=1, sort_keys=True)
    tc_path = out / "train_config.json"
    with open(tc_path, "w", encoding="utf-8") as fh:
        json.dump({"train": train_config.to_json(),
                   "model": model_config.to_json()}, fh, indent=1, sort_keys=True)
    _write_manifest(out / "run_manifest.json", "train",
                    {"model": args.model, "train": train_config.to_json(),
                     "model_config": model_config.to_json()},
                    train_config.seed, [args.panels],
                    [ckpt_dir, report_path, tc_path], t0)
    print(f"trained {args.model}: selected epoch {report.selected_epoch}, "
          f"final loss {report.epoch_losses[-1]:.4f}")
    return 0


def cmd_eval(args) -> int:
    t0 = time.time()
    model, vocab, task = load_checkpoint(args.checkpoint)
    test_panels = _load_part(args.panels, "test")
    x, mask, y = panels_to_arrays(test_panels)
    scores0 = predict_scores(model, x, mask)

    if args.seeds <= 1:
        report = evaluate_runs(lambda seed: (scores0, y), 1, args.threshold)
    else:
        train_panels = _load_part(args.panels, "train")
        val_panels = _load_part(args.panels, "validation", required=False)
        tc_file = Path(args.checkpoint).parent / "train_config.json"
        stored = json.loads(tc_file.read_text()) if tc_file.exists() else {}
        base_tc = stored.get("train", {})

        def run(seed: int):
            if seed == 0:
                return scores0, y  # the checkpoint itself
            tc = TrainConfig(**{**base_tc, "seed": seed})
            m = build_model(model.name, model.config, vocab.size, seed)
            m, _ = fit(m, train_panels, val_panels, tc)
            return predict_scores(m, x, mask), y

        report = evaluate_runs(run, args.seeds, args.threshold)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.json"
    report.save(metrics_path)
    roc_path = out / "roc.csv"
    export_roc_csv(roc_curve(scores0, y), roc_path)
    _write_manifest(out / "run_manifest.json", "eval",
                    {"seeds": args.seeds, "threshold": args.threshold,
                     "task": task},
                    args.seeds, [args.panels, args.checkpoint],
                    [metrics_path, roc_path], t0)
    print(f"eval: accuracy {report.accuracy:.3f}, precision "
          f"{report.precision if report.precision is not None else 'undefined'}, "
          f"auc {report.auc_roc:.3f}")
    return 0


def cmd_simulate(args) -> int:
    t0 = time.time()
    test_panels = _load_part(args.panels, "test")
    x, mask, y = panels_to_arrays(test_panels)
    scores_by_model = {}
    for ckpt in args.checkpoints:
        model, _, _ = load_checkpoint(ckpt)
        scores_by_model[model.name] = predict_scores(model, x, mask)
    config = SimConfig(
        portfolio_sizes=[int(s) for s in args.sizes.split(",")],
        n_repeats=args.repeats, seed=args.seed, threshold=args.threshold)
    result = simulate(scores_by_model, y, config)
    out = Path(args.out)
    export_sim_csv(result, out)
    json_path = out.with_suffix(".json")
    export_sim_json(result, json_path)
    _write_manifest(out.parent / (out.name + ".manifest.json"), "simulate",
                    {"sizes": config.portfolio_sizes, "repeats": config.n_repeats,
                     "threshold": config.threshold},
                    config.seed, [args.panels, *args.checkpoints],
                    [out, json_path], t0)
    print(f"simulated {len(scores_by_model)} models x "
          f"{len(config.portfolio_sizes)} sizes into {out}")
    return 0


def cmd_bench(args) -> int:
    t0 = time.time()
    train_panels = _load_part(args.panels, "train")
    vocab = _load_vocab(args.panels)
    x, mask, y = panels_to_arrays(train_panels)
    n = min(len(x), args.batch_size)
    x, mask, y = x[:n], mask[:n], y[:n]
    names = ("ugru", "mgru", "te", "tmtsc") if args.models == "all" \
        else tuple(args.models.split(","))
    seconds = {}
    for name in names:
        model = build_model(name, default_config(name), vocab.size, args.seed)
        seconds[name] = benchmark_step_time(model, x, mask, y, args.steps)
    rows = relative_time_table(seconds)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("model,sec_per_step,relative_time\n")
        for row in rows:
            fh.write(f"{row['model']},{row['sec_per_step']:.6f},"
                     f"{row['relative_time']:.1f}\n")
    _write_manifest(out.parent / (out.name + ".manifest.json"), "bench",
                    {"models": list(names), "steps": args.steps,
                     "batch_size": n},
                    args.seed, [args.panels], [out], t0)
    print(f"benchmarked {len(names)} models into {out}")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsinvest",
        description="Company-success time series classifiers: data prep, "
                    "training, evaluation, and portfolio simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset JSONL")
    p.add_argument("--config", default=None, help="SynthConfig TOML/JSON (default: built-in defaults)")
    p.add_argument("--seed", type=int, default=None, help="override config seed (default: config/TSINVEST_SEED)")
    p.add_argument("--out", required=True, help="output dataset JSONL path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prepare", help="preprocess records into panel splits")
    p.add_argument("--data", required=True, help="input dataset JSONL")
    p.add_argument("--task", choices=("vc", "gc"), default="vc", help="label task (default: vc)")
    p.add_argument("--split", default="0.73/0.13/0.14", help="train/val/test fractions (default: 0.73/0.13/0.14)")
    p.add_argument("--seed", type=int, default=_default_seed(), help="split seed (default: 0 or TSINVEST_SEED)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train one model on prepared panels")
    p.add_argument("--panels", required=True, help="directory from `prepare`")
    p.add_argument("--model", choices=("tmtsc", "ugru", "mgru", "te"),
                   required=True, help="model to train")
    p.add_argument("--config", default=None, help="TOML/JSON with [train] and [model] sections (default: built-in)")
    p.add_argument("--seed", type=int, default=None, help="override training seed (default: config)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    p.add_argument("--panels", required=True, help="directory from `prepare`")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds; >1 retrains per seed (default: 1)")
    p.add_argument("--threshold", type=float, default=0.5, help="decision threshold (default: 0.5)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="Monte-Carlo portfolio simulation")
    p.add_argument("--panels", required=True, help="directory from `prepare`")
    p.add_argument("--checkpoints", nargs="+", required=True, help="one checkpoint directory per model")
    p.add_argument("--sizes", default="10,25,50,100", help="comma-separated portfolio sizes (default: 10,25,50,100)")
    p.add_argument("--repeats", type=int, default=100, help="repeats per size (default: 100)")
    p.add_argument("--threshold", type=float, default=0.5, help="endorsement threshold (default: 0.5)")
    p.add_argument("--seed", type=int, default=_default_seed(), help="sampling seed (default: 0 or TSINVEST_SEED)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="per-step training-time comparison")
    p.add_argument("--panels", required=True, help="directory from `prepare`")
    p.add_argument("--models", default="all", help="'all' or comma-separated model names (default: all)")
    p.add_argument("--steps", type=int, default=50, help="timed steps per model (default: 50)")
    p.add_argument("--batch-size", type=int, default=512, help="benchmark batch size (default: 512)")
    p.add_argument("--seed", type=int, default=_default_seed(), help="init seed (default: 0 or TSINVEST_SEED)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # one-line machine-parsable category on stderr
        for cls, code in EXIT_CODES.items():
            if isinstance(exc, cls):
                print(f"{cls.__name__}: {exc}", file=sys.stderr)
                return code
        print(f"InternalError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
