"""Command-line driver: synth, extract, detect, eval, bench, report.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .core import (
    DEFAULT_SEED,
    DetectionError,
    DetectionReport,
    Stage,
    VerdictClass,
    _json_default,
    summarize,
)
from .ingest import (
    filter_pair,
    generate,
    load_boxes,
    load_csv,
    load_synth_spec,
    shipped_spec,
    read_dataset,
    write_dataset,
)
from .kmeans import KMeansParams, kmeans_detect, with_parallel
from .lof import LofParams, lof_detect
from .metrics import compare, evaluate, render_table
from .pipeline import MsdKmeansParams, msd_kmeans_detect
from .stats import IqrParams, MsdParams, ZScoreParams, miqr_detect, msd_detect, zscore_detect

log = logging.getLogger("msdkmeans")

DETECTORS = ("msd", "zscore", "miqr", "kmeans", "lof", "msd-kmeans")
SHIPPED_SPECS = ("default", "recovery")
CLASS_NAMES = {VerdictClass.NORMAL: "normal", VerdictClass.GLOBAL_OUTLIER: "global_outlier",
               VerdictClass.LOCAL_OUTLIER: "local_outlier"}
STAGE_NAMES = {Stage.SINGLE: "single", Stage.MSD: "msd", Stage.KMEANS: "kmeans"}


class UsageError(Exception):
    pass


# -- detector configuration --------------------------------------------------

def _seed(args) -> int:
    if args.seed is None:
        log.info("no --seed given, using default seed %d", DEFAULT_SEED)
        return DEFAULT_SEED
    return args.seed


def build_detectors(args, names) -> dict:
    """Validate every flag into parameter objects before any data is read."""
    seed = _seed(args)
    kmp = KMeansParams(k=args.k, seed=seed, max_iterations=args.max_iterations,
                       threshold_multiplier=args.threshold_multiplier,
                       parallel=args.parallel, workers=args.workers)
    msd = MsdParams(args.msd_multiplier)
    table = {
        "msd": (msd_detect, msd),
        "zscore": (zscore_detect, ZScoreParams(args.z)),
        "miqr": (miqr_detect, IqrParams(args.iqr_k)),
        "kmeans": (kmeans_detect, kmp),
        "lof": (lof_detect, LofParams(args.lof_k, args.lof_threshold, args.sample_size, seed)),
        "msd-kmeans": (msd_kmeans_detect, MsdKmeansParams(msd, kmp)),
    }
    return {name: table[name] for name in names}


def _add_detector_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("detector parameters")
    g.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {DEFAULT_SEED})")
    g.add_argument("--k", type=int, default=2, help="number of K-means clusters")
    g.add_argument("--max-iterations", type=int, default=300)
    g.add_argument("-m", "--msd-multiplier", type=float, default=1.0,
                   help="standard deviations for the MSD fence")
    g.add_argument("--threshold-multiplier", type=float, default=1.5,
                   help="std multiplier for the per-cluster distance threshold")
    g.add_argument("--z", type=float, default=3.0, help="Z-score threshold")
    g.add_argument("--iqr-k", type=float, default=1.5, help="IQR fence multiplier")
    g.add_argument("--lof-k", type=int, default=20, help="LOF neighbourhood size")
    g.add_argument("--lof-threshold", type=float, default=1.5)
    g.add_argument("--sample-size", type=int, default=None,
                   help="score LOF on a seeded subsample of this size")
    g.add_argument("--parallel", action="store_true", help="run K-means assignment on a thread pool")
    g.add_argument("--workers", type=int, default=4)
    p.add_argument("--format", choices=("text", "structured"), default="text")


# -- file helpers ------------------------------------------------------------

def write_verdicts(report: DetectionReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "class", "stage", "score"])
        for v in report.verdicts():
            w.writerow([v.index, CLASS_NAMES[v.cls], STAGE_NAMES[v.stage], repr(v.score)])


def read_verdicts(path) -> dict[int, tuple[str, str, float]]:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["index", "class", "stage", "score"]:
            raise UsageError(f"{path}: not a verdict file (header {reader.fieldnames})")
        for row in reader:
            out[int(row["index"])] = (row["class"], row["stage"], float(row["score"]))
    return out


def _dump(doc, path=None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# -- commands ----------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.spec in SHIPPED_SPECS and not Path(args.spec).exists():
        spec = shipped_spec(args.spec)
    else:
        spec = load_synth_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    data = generate(spec)
    write_dataset(data, args.output)
    print(f"wrote {data.n} rows ({int(data.labels.sum())} outliers) to {args.output}")
    return 0


def cmd_extract(args) -> int:
    source, dest = load_boxes(args.boxes)
    records = load_csv(args.input)
    data = filter_pair(records, source, dest)
    write_dataset(data, args.output)
    print(f"parsed {len(records)} trips ({records.dropped} dropped); "
          f"{data.n} in the source/destination pair -> {args.output}")
    return 0


def cmd_detect(args) -> int:
    fn, params = build_detectors(args, [args.detector])[args.detector]
    data = read_dataset(args.input)
    report = fn(data, params)
    write_verdicts(report, args.output)
    doc = {
        "command": "detect",
        "version": __version__,
        "input": str(args.input),
        "seed": _seed(args),
        "report": report.to_dict(),
    }
    summary_path = args.summary or Path(args.output).with_suffix(".summary.json")
    _dump(doc, summary_path)
    if args.format == "structured":
        print(_dump(doc))
    else:
        print(summarize(report))
    return 0


def cmd_eval(args) -> int:
    names = args.detector or list(DETECTORS)
    detectors = build_detectors(args, names)
    data = read_dataset(args.input)
    if data.labels is None:
        raise UsageError("labels required: input has no label column")
    rows = []
    for name, (fn, params) in detectors.items():
        report = fn(data, params)
        rows.append((name, evaluate(report, data.labels), report))
    ranked = compare([(name, m) for name, m, _ in rows])
    doc = {
        "command": "eval",
        "version": __version__,
        "input": str(args.input),
        "seed": _seed(args),
        "ranking": [name for name, _ in ranked],
        "results": {name: {"metrics": m.to_dict(), "report": r.to_dict()} for name, m, r in rows},
    }
    if args.output:
        _dump(doc, args.output)
    if args.format == "structured":
        print(_dump(doc))
    else:
        print(render_table([(name, m) for name, m, _ in rows]))
        for name, m, _ in rows:
            for key, reason in m.undefined.items():
                print(f"  {name}: {key} {reason}")
    return 0


def _median_ms(fn, data, params, repeats) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(data, params)
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def cmd_bench(args) -> int:
    names = args.detector or list(DETECTORS)
    detectors = build_detectors(args, names)
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    data = read_dataset(args.input)
    rows = []
    for name, (fn, params) in detectors.items():
        serial = _median_ms(fn, data, params, args.repeats)
        rows.append({"detector": name, "mode": "serial", "median_ms": serial, "speedup": None})
        if name in ("kmeans", "msd-kmeans"):
            if name == "kmeans":
                par = with_parallel(params, args.workers)
            else:
                par = MsdKmeansParams(params.msd, with_parallel(params.kmeans, args.workers))
            t = _median_ms(fn, data, par, args.repeats)
            rows.append({"detector": name, "mode": f"parallel x{args.workers}",
                         "median_ms": t, "speedup": serial / t if t > 0 else None})
    doc = {"command": "bench", "version": __version__, "input": str(args.input), "n": data.n,
           "repeats": args.repeats, "seed": _seed(args), "rows": rows}
    if args.output:
        _dump(doc, args.output)
    if args.format == "structured":
        print(_dump(doc))
    else:
        print(f"{'Detector':<12} {'Mode':<14} {'Median (ms)':>12} {'Speedup':>8}")
        for r in rows:
            sp = "" if r["speedup"] is None else f"{r['speedup']:.2f}x"
            print(f"{r['detector']:<12} {r['mode']:<14} {r['median_ms']:>12.1f} {sp:>8}")
    return 0


def cmd_report(args) -> int:
    verdicts = read_verdicts(args.verdicts)
    data = read_dataset(args.input)
    if set(verdicts) != set(int(i) for i in data.index):
        raise UsageError("verdict indices do not match the feature file")
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ["index"] + [f"feature_{j}" for j in range(data.dimension)] + ["score"]
    files = {"normal": "normal.csv", "global_outlier": "global_outliers.csv",
             "local_outlier": "local_outliers.csv"}
    handles = {cls: open(out / name, "w", newline="") for cls, name in files.items()}
    try:
        writers = {cls: csv.writer(fh, lineterminator="\n") for cls, fh in handles.items()}
        for w in writers.values():
            w.writerow(header)
        for pos in range(data.n):
            idx = int(data.index[pos])
            cls, _, score = verdicts[idx]
            writers[cls].writerow([idx] + [repr(float(v)) for v in data.points[pos]] + [repr(score)])
    finally:
        for fh in handles.values():
            fh.close()
    print(f"wrote {', '.join(files.values())} to {out}")
    return 0


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msdkmeans", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a labeled synthetic interchange CSV")
    p.add_argument("spec", help="synthetic spec file (key = value), or a shipped spec name: "
                   + ", ".join(SHIPPED_SPECS))
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="filter a taxi-trip CSV to one source/destination pair")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--boxes", default=None, help="JSON with source/dest boxes (default: SoHo -> JFK)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("detect", help="run one detector and write per-point verdicts")
    p.add_argument("--detector", choices=DETECTORS, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="verdict CSV path")
    p.add_argument("--summary", default=None, help="structured summary path")
    _add_detector_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detectors against labels and rank them")
    p.add_argument("--detector", choices=DETECTORS, action="append")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    _add_detector_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="median-of-N timing per detector")
    p.add_argument("--detector", choices=DETECTORS, action="append")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--repeats", type=int, default=5)
    _add_detector_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="split points into per-class series files for plotting")
    p.add_argument("--verdicts", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (UsageError, DetectionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
