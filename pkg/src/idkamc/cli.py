"""Command-line entry point: ``idkamc {gen,fit,run,simmatrix,bench}``.

Exit codes: 0 success, 2 usage or configuration error, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys
from collections import Counter

import numpy as np

from . import __version__, harness, isokernel
from .channel import ChannelCondition
from .classifier import OgdModel, fit_partitionings, save_model
from .constellation import ALL_FORMATS, parse_formats
from .errors import ConfigError, FileFormatError
from .io import DatasetFile, read_dataset, write_dataset

log = logging.getLogger("idkamc")


class UsageError(Exception):
    pass


def _level(text: str, name: str):
    """``"15"`` -> 15.0, ``"10,20"`` -> [10.0, 20.0] (uniform range)."""
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name}: expected a number or lo,hi, got {text!r}") from None
    if len(vals) == 1:
        return vals[0]
    if len(vals) == 2:
        return vals
    raise UsageError(f"--{name}: expected a number or lo,hi, got {text!r}")


def _ints(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated integers, got {text!r}") from None


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}") from None


def _condition_spec(args) -> harness.ConditionSpec:
    return harness.ConditionSpec.from_value({
        "snr_db": _level(args.snr, "snr"),
        "phase_noise_dbc_hz": _level(args.phase_noise, "phase-noise"),
        "iq_imbalance_db": _level(args.iq_imbalance, "iq-imbalance"),
    })


def _add_condition_args(p, snr="15"):
    p.add_argument("--snr", default=snr, help="SNR in dB, or lo,hi for a uniform range")
    p.add_argument("--phase-noise", default="-9999", help="phase noise in dBc/Hz, or lo,hi")
    p.add_argument("--iq-imbalance", default="0", help="I/Q amplitude imbalance in dB, or lo,hi")


def _writer(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


# --- commands ------------------------------------------------------------

def cmd_gen(args) -> int:
    formats = parse_formats(args.formats)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if args.length < 1:
        raise UsageError("--length must be at least 1")
    spec = _condition_spec(args)
    rng = np.random.default_rng(args.seed)
    ids = np.array([f.id for f in formats])[rng.integers(len(formats), size=args.n)]
    conds = [spec.draw(rng) for _ in range(args.n)]
    signals = [harness.generate_set(formats, [i], args.length, c, rng)[0] for i, c in zip(ids, conds)]
    ds = DatasetFile.from_signals([f.name for f in formats], signals, ids, conds)
    write_dataset(args.out, ds)
    counts = Counter(int(i) for i in ids)
    print(f"wrote {len(ds)} signals of length {ds.signal_length} to {args.out}")
    for f in formats:
        print(f"  {f.name:>7}: {counts.get(f.id, 0)}")
    c = ds.conditions
    for j, name in enumerate(harness.CONDITION_FIELDS):
        print(f"  {name}: [{c[:, j].min():g}, {c[:, j].max():g}]")
    return 0


def cmd_fit(args) -> int:
    ds = read_dataset(args.data)
    formats = parse_formats(ds.format_names)
    ids = ds.format_ids
    signals = ds.signals()
    parts = fit_partitionings(signals, ids, formats, args.psi, args.t, seed=args.seed)
    model = OgdModel(formats, parts, args.lr, args.update_rule)
    model.warm_start(signals, ids, args.batch_size, args.epochs)
    parts_path = save_model(model, args.out)
    acc = float(np.mean(model.predict_batch(signals) == ids))
    print(f"fitted {model.m} formats (psi={args.psi}, t={args.t}) on {len(ds)} signals")
    print(f"training accuracy after warm start: {acc:.4f}")
    print(f"wrote {args.out} and {parts_path}")
    return 0


def cmd_run(args) -> int:
    if not os.path.isfile(args.config):
        raise UsageError(f"config file not found: {args.config}")
    cfg = harness.ExperimentConfig.from_json(args.config)
    overrides = {}
    for key in ("trials", "seed", "batch_size", "signal_length"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.train_samples is not None:
        overrides["train"] = harness.TrainSpec(args.train_samples, cfg.train.condition)
    if args.batches_per_lot is not None or args.lots is not None:
        overrides["stream"] = tuple(
            harness.LotSpec(
                args.batches_per_lot if args.batches_per_lot is not None else lot.num_batches,
                lot.condition, lot.labels_available,
                args.lots if args.lots is not None else lot.lots,
            )
            for lot in cfg.stream
        )
    if overrides:
        cfg = cfg.replace(**overrides)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    result = harness.run_experiment(cfg, threads=threads, keep_weights=False)
    paths = harness.write_metrics(result, args.out)
    print(f"{cfg.trials} trial(s), {cfg.num_batches} batches each, formats: "
          f"{','.join(f.name for f in cfg.formats)}")
    for row in result.summary():
        if row["batch_end"] == cfg.num_batches - 1:
            print(f"  {row['classifier']:>10}: final-window accuracy {row['mean_accuracy']:.4f}"
                  f" (se {row['stderr']:.4f})")
    for key, path in paths.items():
        print(f"  {key}: {path}")
    return 0


def cmd_simmatrix(args) -> int:
    formats = parse_formats(args.formats)
    snrs = _floats(args.snr, "snr")
    cells = [(f, ChannelCondition(snr_db=s)) for f, s in itertools.product(formats, snrs)]
    if len(cells) < 2:
        raise UsageError("need at least two (format, SNR) cells")
    labels, mat = harness.similarity_matrix(cells, args.seed, args.psi, args.t, args.length)
    fh, close = _writer(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(["cell"] + labels)
        for name, row in zip(labels, mat):
            w.writerow([name] + [repr(float(v)) for v in row])
    finally:
        if close:
            fh.close()
    return 0


def cmd_bench(args) -> int:
    sizes = _ints(args.sizes, "sizes")
    if len(sizes) < 2:
        raise UsageError("--sizes needs at least two values")
    if args.config:
        if not os.path.isfile(args.config):
            raise UsageError(f"config file not found: {args.config}")
        cfg = harness.ExperimentConfig.from_json(args.config)
    else:
        formats = parse_formats(args.formats)
        cfg = harness.ExperimentConfig(
            formats=tuple(formats),
            train=harness.TrainSpec(args.train_samples, harness.ConditionSpec(snr_db=15.0)),
            stream=(harness.LotSpec(1, harness.ConditionSpec(snr_db=15.0)),),
            batch_size=args.batch_size, signal_length=args.length, seed=args.seed,
        )
    rows = harness.runtime_benchmark(cfg, sizes)
    fh, close = _writer(args.out)
    try:
        w = csv.DictWriter(fh, ["size", "classifier", "train_time", "stream_time", "total_time", "ratio"])
        w.writeheader()
        w.writerows(rows)
    finally:
        if close:
            fh.close()
    for clf in ("idk_ogd", "fknn"):
        pts = [(r["size"], r["stream_time"]) for r in rows if r["classifier"] == clf]
        if len(pts) >= 2:
            _, _, r2 = harness.fit_line(*zip(*pts))
            print(f"{clf}: streaming time vs size, linear fit R^2 = {r2:.4f}", file=sys.stderr)
    return 0


# --- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    all_names = ",".join(f.name for f in ALL_FORMATS)
    p = argparse.ArgumentParser(prog="idkamc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a labeled dataset file")
    g.add_argument("--formats", default=all_names)
    g.add_argument("--n", type=int, required=True, help="number of signals")
    g.add_argument("--length", type=int, default=1024, help="samples per signal")
    _add_condition_args(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="dataset.idkd")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="fit partitionings and warm-start IDK-OGD on a dataset")
    f.add_argument("--data", required=True)
    f.add_argument("--psi", type=int, default=isokernel.DEFAULT_PSI)
    f.add_argument("--t", type=int, default=isokernel.DEFAULT_T)
    f.add_argument("--lr", type=float, default=0.01)
    f.add_argument("--epochs", type=int, default=1, help="warm-start passes over the data")
    f.add_argument("--batch-size", type=int, default=100)
    f.add_argument("--update-rule", choices=("ovr", "literal"), default="ovr")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default="model.idkm")
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("run", help="run a streaming experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--out", default="results")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--batch-size", type=int)
    r.add_argument("--signal-length", type=int)
    r.add_argument("--train-samples", type=int)
    r.add_argument("--batches-per-lot", type=int, help="override num_batches of every lot")
    r.add_argument("--lots", type=int, help="override the repeat count of every lot")
    r.add_argument("--threads", type=int, help="parallel trials (default: number of cores)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("simmatrix", help="IDK similarity matrix over format x SNR cells")
    s.add_argument("--formats", default="8PSK,16APSK")
    s.add_argument("--snr", default="15,20", help="comma-separated SNR values in dB")
    s.add_argument("--psi", type=int, default=isokernel.DEFAULT_PSI)
    s.add_argument("--t", type=int, default=isokernel.DEFAULT_T)
    s.add_argument("--length", type=int, default=1024)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_simmatrix)

    b = sub.add_parser("bench", help="runtime versus test-stream size")
    b.add_argument("--sizes", default="1000,2000,4000,8000")
    b.add_argument("--config", help="JSON config; otherwise built from the flags below")
    b.add_argument("--formats", default="BPSK,QPSK,8PSK,16QAM")
    b.add_argument("--length", type=int, default=256)
    b.add_argument("--batch-size", type=int, default=100)
    b.add_argument("--train-samples", type=int, default=200)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError, FileFormatError) as exc:
        print(f"idkamc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"idkamc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort report
        log.debug("internal error", exc_info=True)
        print(f"idkamc {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
