"""Streaming experiment runner.

A run fits per-format partitionings on a training set, warm-starts IDK-OGD,
builds the fKNN store, then feeds stratified test batches grouped into lots.
Every lot draws one channel condition; the batches of a lot share it.

Seeding: trial ``i`` of a run with seed ``s`` derives all its streams from
``SeedSequence([s, i])``, so trials are independent and can run in any order.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend, baselines, isokernel
from .channel import ChannelCondition, apply_condition
from .classifier import LabeledBatch, OgdModel, fit_partitionings, UPDATE_RULES
from .constellation import ModulationFormat, generate_signal, get_format
from .errors import ConfigError

log = logging.getLogger(__name__)

CLASSIFIERS = ("idk_ogd", "idk_static", "fknn")
CONDITION_FIELDS = ("snr_db", "phase_noise_dbc_hz", "iq_imbalance_db")


# --- configuration -------------------------------------------------------

@dataclass(frozen=True)
class ConditionSpec:
    """Channel condition with each field fixed, a ``[lo, hi]`` range or a choice list.

    Ranges are sampled uniformly; ``{"choices": [...]}`` picks one value.
    """

    snr_db: object = 100.0
    phase_noise_dbc_hz: object = -9999.0
    iq_imbalance_db: object = 0.0

    @classmethod
    def from_value(cls, value, where="condition"):
        if isinstance(value, ConditionSpec):
            return value
        if isinstance(value, ChannelCondition):
            return cls(**value.as_dict())
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object", [f"{where}: expected an object"])
        unknown = sorted(set(value) - set(CONDITION_FIELDS))
        if unknown:
            msg = f"{where}: unknown fields {unknown}"
            raise ConfigError(msg, [msg])
        parsed = {}
        for name in CONDITION_FIELDS:
            if name in value:
                parsed[name] = _parse_level(value[name], f"{where}.{name}")
        return cls(**parsed)

    @property
    def fixed(self) -> bool:
        return all(isinstance(v, float) for v in self._levels())

    def _levels(self):
        return [getattr(self, n) for n in CONDITION_FIELDS]

    def draw(self, rng: np.random.Generator) -> ChannelCondition:
        """Draw a concrete condition; fixed fields consume no randomness."""
        values = []
        for level in self._levels():
            if isinstance(level, float):
                values.append(level)
            elif isinstance(level, tuple) and level[0] == "range":
                values.append(float(rng.uniform(level[1], level[2])))
            else:
                values.append(float(level[1][int(rng.integers(len(level[1])))]))
        return ChannelCondition(*values)

    def to_json(self):
        out = {}
        for name, level in zip(CONDITION_FIELDS, self._levels()):
            if isinstance(level, float):
                out[name] = level
            elif level[0] == "range":
                out[name] = [level[1], level[2]]
            else:
                out[name] = {"choices": list(level[1])}
        return out

    def describe(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _parse_level(value, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: not a number", [f"{where}: not a number"])
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        lo, hi = float(value[0]), float(value[1])
        if not lo <= hi:
            raise ConfigError(f"{where}: range low exceeds high", [f"{where}: range low {lo} exceeds high {hi}"])
        return ("range", lo, hi)
    if isinstance(value, dict) and set(value) == {"choices"} and value["choices"]:
        choices = value["choices"]
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in choices):
            return ("choices", tuple(float(v) for v in choices))
    msg = f"{where}: expected a number, [lo, hi] or {{\"choices\": [...]}}"
    raise ConfigError(msg, [msg])


@dataclass(frozen=True)
class LotSpec:
    num_batches: int
    condition: ConditionSpec = field(default_factory=ConditionSpec)
    labels_available: bool = True
    lots: int = 1


@dataclass(frozen=True)
class TrainSpec:
    num_samples: int
    condition: ConditionSpec = field(default_factory=ConditionSpec)


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment.

    ``stream`` entries with ``lots > 1`` expand into that many lots, each
    drawing its own condition.
    """

    formats: tuple
    train: TrainSpec
    stream: tuple
    batch_size: int = 100
    signal_length: int = 1024
    trials: int = 1
    seed: int = 0
    psi: int = isokernel.DEFAULT_PSI
    t: int = isokernel.DEFAULT_T
    learning_rate: float = 0.01
    warm_start_epochs: int = 1
    update_rule: str = "ovr"
    k: int = baselines.DEFAULT_K
    classifiers: tuple = ("idk_ogd", "fknn")
    window: int = 10

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError("invalid experiment config:\n  " + "\n  ".join(problems), problems)

    def problems(self) -> list[str]:
        p = []
        if len(self.formats) < 2:
            p.append("formats: need at least two formats")
        if len({f.id for f in self.formats}) != len(self.formats):
            p.append("formats: duplicates")
        if self.batch_size < 1:
            p.append("batch_size: must be >= 1")
        elif self.formats and self.batch_size % len(self.formats):
            p.append(f"batch_size: {self.batch_size} is not divisible by the {len(self.formats)} formats")
        if self.signal_length < 1:
            p.append("signal_length: must be >= 1")
        if self.trials < 1:
            p.append("trials: must be >= 1")
        if self.train.num_samples < len(self.formats):
            p.append("train.num_samples: need at least one signal per format")
        if not self.stream:
            p.append("stream: need at least one lot")
        for i, lot in enumerate(self.stream):
            if lot.num_batches < 1:
                p.append(f"stream[{i}].num_batches: must be >= 1")
            if lot.lots < 1:
                p.append(f"stream[{i}].lots: must be >= 1")
        if self.psi < 2:
            p.append("psi: must be >= 2")
        if self.t < 1:
            p.append("t: must be >= 1")
        if not self.learning_rate > 0:
            p.append("learning_rate: must be > 0")
        if self.warm_start_epochs < 0:
            p.append("warm_start_epochs: must be >= 0")
        if self.update_rule not in UPDATE_RULES:
            p.append(f"update_rule: must be one of {list(UPDATE_RULES)}")
        if self.k < 1:
            p.append("k: must be >= 1")
        if not self.classifiers:
            p.append("classifiers: need at least one")
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                p.append(f"classifiers: unknown {c!r}; expected any of {list(CLASSIFIERS)}")
        if self.window < 1:
            p.append("window: must be >= 1")
        return p

    @property
    def m(self) -> int:
        return len(self.formats)

    @property
    def lots(self) -> list[LotSpec]:
        """The stream with repeated lots expanded."""
        return [lot for spec in self.stream for lot in [spec] * spec.lots]

    @property
    def num_batches(self) -> int:
        return sum(lot.num_batches for lot in self.lots)

    def replace(self, **changes) -> "ExperimentConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ExperimentConfig(**data)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        problems = []
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object", ["config must be a JSON object"])
        known = {"formats", "train", "stream", "batch_size", "signal_length", "trials", "seed",
                 "idk", "fknn", "classifiers", "window", "description"}
        for key in sorted(set(data) - known):
            problems.append(f"{key}: unknown field")

        def grab(fn, where, default=None):
            try:
                return fn()
            except ConfigError as exc:
                problems.extend(exc.problems or [f"{where}: {exc}"])
            except (TypeError, ValueError, KeyError) as exc:
                problems.append(f"{where}: {exc}")
            return default

        formats = grab(lambda: tuple(get_format(f) for f in data["formats"]), "formats", ())
        train = data.get("train", {})
        train_spec = grab(lambda: TrainSpec(
            int(train["num_samples"]),
            ConditionSpec.from_value(train.get("condition", {}), "train.condition"),
        ), "train")
        lots = []
        for i, lot in enumerate(data.get("stream", [])):
            spec = grab(lambda: LotSpec(
                int(lot["num_batches"]),
                ConditionSpec.from_value(lot.get("condition", {}), f"stream[{i}].condition"),
                bool(lot.get("labels_available", True)),
                int(lot.get("lots", 1)),
            ), f"stream[{i}]")
            if spec is not None:
                lots.append(spec)
        idk = data.get("idk", {})
        fknn = data.get("fknn", {})
        for key in sorted(set(idk) - {"psi", "t", "learning_rate", "warm_start_epochs", "update_rule"}):
            problems.append(f"idk.{key}: unknown field")
        for key in sorted(set(fknn) - {"k"}):
            problems.append(f"fknn.{key}: unknown field")
        if "stream" not in data:
            problems.append("stream: missing")
        if train_spec is None and "train" not in data:
            problems.append("train: missing")
        if problems:
            raise ConfigError("invalid experiment config:\n  " + "\n  ".join(problems), problems)
        kwargs = dict(
            formats=formats, train=train_spec, stream=tuple(lots),
            batch_size=data.get("batch_size", 100), signal_length=data.get("signal_length", 1024),
            trials=data.get("trials", 1), seed=data.get("seed", 0),
            psi=idk.get("psi", isokernel.DEFAULT_PSI), t=idk.get("t", isokernel.DEFAULT_T),
            learning_rate=idk.get("learning_rate", 0.01),
            warm_start_epochs=idk.get("warm_start_epochs", 1),
            update_rule=idk.get("update_rule", "ovr"), k=fknn.get("k", baselines.DEFAULT_K),
            classifiers=tuple(data.get("classifiers", ("idk_ogd", "fknn"))),
            window=data.get("window", 10),
        )
        for key in ("batch_size", "signal_length", "trials", "seed", "psi", "t", "warm_start_epochs", "k", "window"):
            if not isinstance(kwargs[key], int) or isinstance(kwargs[key], bool):
                problems.append(f"{key}: must be an integer")
        if problems:
            raise ConfigError("invalid experiment config:\n  " + "\n  ".join(problems), problems)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})", [f"config: {exc}"]) from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "formats": [f.name for f in self.formats],
            "seed": self.seed,
            "trials": self.trials,
            "batch_size": self.batch_size,
            "signal_length": self.signal_length,
            "train": {"num_samples": self.train.num_samples, "condition": self.train.condition.to_json()},
            "stream": [
                {"num_batches": lot.num_batches, "condition": lot.condition.to_json(),
                 "labels_available": lot.labels_available, "lots": lot.lots}
                for lot in self.stream
            ],
            "classifiers": list(self.classifiers),
            "idk": {"psi": self.psi, "t": self.t, "learning_rate": self.learning_rate,
                    "warm_start_epochs": self.warm_start_epochs, "update_rule": self.update_rule},
            "fknn": {"k": self.k},
            "window": self.window,
        }


# --- data generation -----------------------------------------------------

def generate_set(formats: Sequence[ModulationFormat], labels, length: int, condition,
                 rng: np.random.Generator):
    """Signals for ``labels`` (format ids); ``condition`` is a spec drawn per signal
    or a fixed :class:`ChannelCondition`."""
    out = []
    for label in labels:
        cond = condition.draw(rng) if isinstance(condition, ConditionSpec) else condition
        out.append(apply_condition(generate_signal(int(label), length, rng), cond, rng))
    return out


def training_labels(formats, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random format assignment; the first ``m`` draws are a permutation
    of the formats so every format is present."""
    ids = np.array([f.id for f in formats], dtype=np.int64)
    head = rng.permutation(ids)
    tail = ids[rng.integers(ids.size, size=n - ids.size)]
    return np.concatenate([head, tail])


def stratified_labels(formats, batch_size: int, rng: np.random.Generator) -> np.ndarray:
    ids = np.array([f.id for f in formats], dtype=np.int64)
    return rng.permutation(np.repeat(ids, batch_size // ids.size))


# --- running -------------------------------------------------------------

@dataclass
class TrialResult:
    trial: int
    seed_entropy: tuple
    rows: list  # one dict per batch
    confusion: dict  # classifier -> (n_batches, m, m) int64
    timings: list  # (trial, batch, classifier, stage, seconds)
    warm_weights: list | None = None
    final_weights: list | None = None


@dataclass
class MetricsLog:
    config: ExperimentConfig
    trials: list

    @property
    def rows(self) -> list[dict]:
        return [r for tr in self.trials for r in tr.rows]

    def accuracy(self, classifier: str) -> np.ndarray:
        """Per-batch accuracies, shape ``(trials, batches)``."""
        return np.array([[r[f"acc_{classifier}"] for r in tr.rows] for tr in self.trials])

    def confusion(self, classifier: str, batches: slice = slice(None)) -> np.ndarray:
        """Confusion counts summed over trials and the selected batches (rows: true format)."""
        return sum(tr.confusion[classifier][batches].sum(axis=0) for tr in self.trials)

    def summary(self) -> list[dict]:
        """Windowed mean accuracy and its standard error over trials."""
        out = []
        w = self.config.window
        n = self.config.num_batches
        for clf in self.config.classifiers:
            acc = self.accuracy(clf)
            for start in range(0, n, w):
                per_trial = acc[:, start:start + w].mean(axis=1)
                k = per_trial.size
                se = float(per_trial.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
                out.append({"classifier": clf, "batch_start": start, "batch_end": min(n, start + w) - 1,
                            "mean_accuracy": float(per_trial.mean()), "stderr": se, "trials": k})
        return out


def _trial_streams(config: ExperimentConfig, trial: int):
    ss = np.random.SeedSequence([config.seed, trial])
    data_ss, fit_ss, stream_ss = ss.spawn(3)
    return ss.entropy, np.random.default_rng(data_ss), fit_ss, np.random.default_rng(stream_ss)


def run_trial(config: ExperimentConfig, trial: int, keep_weights: bool = True) -> TrialResult:
    """Run one trial of ``config``; deterministic given ``(config.seed, trial)``."""
    entropy, data_rng, fit_ss, stream_rng = _trial_streams(config, trial)
    formats = list(config.formats)
    col = {f.id: j for j, f in enumerate(formats)}
    use = set(config.classifiers)
    timings = []

    t0 = time.perf_counter()
    train_y = training_labels(formats, config.train.num_samples, data_rng)
    train_x = generate_set(formats, train_y, config.signal_length, config.train.condition, data_rng)
    timings.append((trial, -1, "all", "generate_train", time.perf_counter() - t0))

    model = frozen = store = None
    warm = None
    if use & {"idk_ogd", "idk_static"}:
        t0 = time.perf_counter()
        parts = fit_partitionings(train_x, train_y, formats, config.psi, config.t, seed=fit_ss)
        for p in parts:
            p.index  # build lookup tables up front so they count as fit time
        timings.append((trial, -1, "idk_ogd", "fit", time.perf_counter() - t0))
        t0 = time.perf_counter()
        model = OgdModel(formats, parts, config.learning_rate, config.update_rule)
        model.warm_start(train_x, train_y, config.batch_size, config.warm_start_epochs)
        timings.append((trial, -1, "idk_ogd", "warm_start", time.perf_counter() - t0))
        warm = [w.copy() for w in model.weights]
        if "idk_static" in use:
            frozen = model.copy()
        if "idk_ogd" not in use:
            model = None
    if "fknn" in use:
        t0 = time.perf_counter()
        store = baselines.KnnStore(config.k, baselines.extract_many(train_x), train_y)
        timings.append((trial, -1, "fknn", "fit", time.perf_counter() - t0))

    rows = []
    n_batches = config.num_batches
    confusion = {c: np.zeros((n_batches, config.m, config.m), dtype=np.int64) for c in config.classifiers}
    b = 0
    for lot_index, lot in enumerate(config.lots):
        cond = lot.condition.draw(stream_rng)
        log.info("trial %d lot %d: %s", trial, lot_index, cond)
        for _ in range(lot.num_batches):
            labels = stratified_labels(formats, config.batch_size, stream_rng)
            signals = generate_set(formats, labels, config.signal_length, cond, stream_rng)
            batch = LabeledBatch(signals, labels if lot.labels_available else None, cond)
            preds = {}
            emb = None
            if model is not None or frozen is not None:
                t0 = time.perf_counter()
                emb = (model or frozen).embed_batch(signals)
                t_embed = time.perf_counter() - t0
            if model is not None:
                t0 = time.perf_counter()
                pred, g = model._predict_from(emb)
                t_pred = time.perf_counter() - t0 + t_embed
                t0 = time.perf_counter()
                if batch.has_labels:
                    model._update_from(emb, g, batch.labels, pred)
                timings.append((trial, b, "idk_ogd", "predict", t_pred))
                timings.append((trial, b, "idk_ogd", "update", time.perf_counter() - t0))
                preds["idk_ogd"] = pred
            if frozen is not None:
                preds["idk_static"] = frozen._predict_from(emb)[0]
            if store is not None:
                t0 = time.perf_counter()
                feats = baselines.extract_many(signals)
                preds["fknn"] = baselines.knn_predict_many(store, feats)
                timings.append((trial, b, "fknn", "predict", time.perf_counter() - t0))
                t0 = time.perf_counter()
                if batch.has_labels:
                    store.add(feats, batch.labels)
                timings.append((trial, b, "fknn", "update", time.perf_counter() - t0))

            row = {"trial": trial, "batch": b, "lot": lot_index,
                   "snr_db": cond.snr_db, "phase_noise_dbc_hz": cond.phase_noise_dbc_hz,
                   "iq_imbalance_db": cond.iq_imbalance_db,
                   "labels_available": int(lot.labels_available), "n": len(labels)}
            true_cols = np.array([col[int(y)] for y in labels])
            for clf in config.classifiers:
                pred_cols = np.array([col[int(p)] for p in preds[clf]])
                np.add.at(confusion[clf][b], (true_cols, pred_cols), 1)
                row[f"acc_{clf}"] = float(np.mean(pred_cols == true_cols))
            rows.append(row)
            b += 1

    final = None
    if keep_weights and model is not None:
        final = [w.copy() for w in model.weights]
    return TrialResult(trial, tuple(np.atleast_1d(entropy).tolist()), rows, confusion, timings,
                       warm if keep_weights else None, final)


def run_experiment(config: ExperimentConfig, threads: int = 1, keep_weights: bool = True) -> MetricsLog:
    """Run every trial; trials run on a thread pool when ``threads > 1``.

    The compiled kernels release the GIL, so threads give real parallelism.
    Results do not depend on ``threads``.
    """
    trials = range(config.trials)
    if threads > 1 and config.trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: run_trial(config, i, keep_weights), trials))
    else:
        results = [run_trial(config, i, keep_weights) for i in trials]
    return MetricsLog(config, results)


# --- outputs -------------------------------------------------------------

METRICS_COLUMNS = ("trial", "batch", "lot", "snr_db", "phase_noise_dbc_hz", "iq_imbalance_db",
                   "labels_available", "n")


def write_metrics(log_: MetricsLog, outdir) -> dict:
    """Write metrics.csv, confusion.csv, summary.csv, timings.csv and manifest.json.

    All files except timings.csv are deterministic given the config.
    """
    os.makedirs(outdir, exist_ok=True)
    cfg = log_.config
    paths = {k: os.path.join(outdir, f"{k}.csv") for k in ("metrics", "confusion", "summary", "timings")}
    paths["manifest"] = os.path.join(outdir, "manifest.json")

    cols = list(METRICS_COLUMNS) + [f"acc_{c}" for c in cfg.classifiers]
    with open(paths["metrics"], "w", newline="") as fh:
        w = csv.DictWriter(fh, cols)
        w.writeheader()
        w.writerows(log_.rows)

    with open(paths["confusion"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["classifier", "true_format", "predicted_format", "count"])
        for clf in cfg.classifiers:
            cm = log_.confusion(clf)
            for i, ft in enumerate(cfg.formats):
                for j, fp in enumerate(cfg.formats):
                    w.writerow([clf, ft.name, fp.name, int(cm[i, j])])

    summary = log_.summary()
    with open(paths["summary"], "w", newline="") as fh:
        w = csv.DictWriter(fh, ["classifier", "batch_start", "batch_end", "mean_accuracy", "stderr", "trials"])
        w.writeheader()
        w.writerows(summary)

    with open(paths["timings"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "batch", "classifier", "stage", "seconds"])
        for tr in log_.trials:
            w.writerows(tr.timings)

    manifest = {
        "config": cfg.to_dict(),
        "trial_seed_entropy": {str(tr.trial): list(tr.seed_entropy) for tr in log_.trials},
        "backend": _backend.NAME,
        "files": {k: os.path.basename(v) for k, v in paths.items() if k != "manifest"},
    }
    with open(paths["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


# --- diagnostics ---------------------------------------------------------

def similarity_matrix(cells, seed=None, psi: int = isokernel.DEFAULT_PSI, t: int = isokernel.DEFAULT_T,
                      length: int = 1024):
    """Pairwise IDK similarities of one signal per (format, condition) cell.

    One partitioning is fitted on the pooled points of all cells so the
    embeddings share a space. Returns ``(labels, matrix)``.
    """
    cells = [(get_format(f), c if isinstance(c, ChannelCondition) else ChannelCondition(**c))
             for f, c in cells]
    if len(cells) < 2:
        raise ConfigError("similarity matrix needs at least two cells", ["cells: need at least two"])
    rng = np.random.default_rng(seed)
    signals = [apply_condition(generate_signal(f, length, rng), c, rng) for f, c in cells]
    part = isokernel.fit(np.concatenate(signals), psi, t, rng)
    emb = isokernel.embed_many(part, signals)
    labels = [f"{f.name}@{_cond_label(c)}" for f, c in cells]
    return labels, isokernel.similarity_matrix(emb, t)


def _cond_label(c: ChannelCondition) -> str:
    parts = [f"{c.snr_db:g}dB"]
    if c.phase_noise_dbc_hz > -9999:
        parts.append(f"pn{c.phase_noise_dbc_hz:g}")
    if c.iq_imbalance_db:
        parts.append(f"iq{c.iq_imbalance_db:g}")
    return "/".join(parts)


def runtime_benchmark(config: ExperimentConfig, sizes: Sequence[int], classifiers=("idk_ogd", "fknn")):
    """Time training and streaming for growing test-stream sizes.

    Each size is a fresh run: train on ``config.train``, then stream ``size``
    signals (rounded up to whole batches) under the first lot's condition
    with labels. Returns rows of (size, classifier, train_time, stream_time,
    total_time, ratio) where ratio is total over train time.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2:
        raise ConfigError("benchmark needs at least two sizes", ["sizes: need at least two"])
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
        raise ConfigError("benchmark sizes must be positive and increasing", ["sizes: must increase"])
    lot = config.stream[0]
    rows = []
    for size in sizes:
        n_batches = -(-size // config.batch_size)
        cfg = config.replace(
            stream=(LotSpec(n_batches, lot.condition, True, 1),), trials=1,
            classifiers=tuple(c for c in classifiers),
        )
        res = run_trial(cfg, 0, keep_weights=False)
        for clf in classifiers:
            train = sum(s for (_, b, c, st, s) in res.timings if b < 0 and c == clf)
            stream = sum(s for (_, b, c, st, s) in res.timings if b >= 0 and c == clf)
            rows.append({"size": n_batches * config.batch_size, "classifier": clf,
                         "train_time": train, "stream_time": stream,
                         "total_time": train + stream, "ratio": (train + stream) / train})
    return rows


def fit_line(x, y):
    """Least-squares line through ``(x, y)``; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def config_as_json(config: ExperimentConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


__all__ = [
    "CLASSIFIERS", "ConditionSpec", "LotSpec", "TrainSpec", "ExperimentConfig", "MetricsLog",
    "TrialResult", "run_trial", "run_experiment", "write_metrics", "similarity_matrix",
    "runtime_benchmark", "fit_line", "generate_set", "training_labels", "stratified_labels",
]
