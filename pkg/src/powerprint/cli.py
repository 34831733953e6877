"""``powerprint`` command line: synth, extract, train, predict, eval, compare, ncc, detect, bench.

Every command is reproducible from its flags: all randomness flows from
``--seed``, and ``--threads`` changes only speed, never output bytes.
Wall-clock timings never go into ``--out`` files; they are printed, or
written to ``--timing-out`` when asked for.  ``bench`` is the exception,
since timing is its output.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import descriptors as desc
from .eventdetect import (DEFAULT_SMOOTH_WINDOW, DEFAULT_THRESHOLD_WATTS, detect_edges,
                          segment_between)
from .evaluation import (comparison_csv, kfold_eval, compare_descriptors, mean_off_diagonal,
                         ncc_matrix, report_csv, text_table, timing_csv)
from .iknn import KNN_METRICS, IknnConfig, KnnConfig, fit, predict_many
from .modelfile import load_model, save_model
from .signals import (MIN_SIGNAL_LENGTH, Dataset, format_float, load_csv, read_records,
                      write_csv, write_records)
from .synthetic import BENCHMARK_ARCHETYPES, benchmark_config, generate_synthetic

PROG = "powerprint"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one machine-parsable line instead of usage + message
        self.exit(2, f"{PROG}: error: usage: {message}\n")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return v


def _non_negative_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number >= 0, got {text}")
    return v


def _descriptor_name(text):
    name = text.upper()
    if name not in desc.KINDS:
        raise argparse.ArgumentTypeError(
            f"unknown descriptor {text!r}; choose one of: {', '.join(k.lower() for k in desc.KINDS)}"
        )
    return name


def _add_descriptor(p):
    p.add_argument("--descriptor", type=_descriptor_name, default="LPH",
                   help="lph, lbp, ldp, ltep, ltrp or bsif (default: lph)")
    p.add_argument("--thr", type=_non_negative_float, default=desc.DEFAULT_LTEP_THRESHOLD,
                   help="LTEP threshold in normalized units (default: %(default)s)")
    p.add_argument("--bsif-seed", type=_seed, default=desc.DEFAULT_BSIF_SEED,
                   help="seed of the BSIF filter bank (default: %(default)s)")


def _add_classifier(p):
    p.add_argument("--classifier", default="iknn", choices=("iknn",) + tuple(f"knn-{m}" for m in KNN_METRICS),
                   help="iknn (default) or a plain KNN baseline")
    p.add_argument("--k", type=_positive_int, default=5, help="neighbors (default: 5)")
    p.add_argument("--m", type=_positive_int, default=None,
                   help="IKNN subgroups (default: max(2, floor(sqrt(n_train))))")
    p.add_argument("--classifier-seed", type=_seed, default=0,
                   help="seed of the IKNN subgroup initialization (default: 0)")


def _add_threads(p):
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                   help="worker threads (default: available cores)")


def _kind(args):
    return desc.DescriptorKind(args.descriptor, args.thr, args.bsif_seed)


def _classifier(args):
    if args.classifier == "iknn":
        return IknnConfig(args.k, args.m, args.classifier_seed)
    return KnnConfig(args.k, args.classifier[4:])


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _labeled(dataset: Dataset):
    if any(s.label is None for s in dataset.signals):
        raise CliError("every record needs a label for this command")
    return dataset


# -- commands ------------------------------------------------------------------

def cmd_synth(args):
    cfg = benchmark_config(args.classes, args.per_class, args.length, args.seed)
    ds = generate_synthetic(cfg)
    write_csv(ds, args.out)
    print(f"wrote {len(ds)} signatures ({len(ds.class_names)} classes) to {args.out}")


def cmd_extract(args):
    kind = _kind(args)
    signals = read_records(getattr(args, "in"))
    X = desc.extract_many(kind, signals, threads=args.threads)
    write_records(args.out, ((s.label, s.source_id, row) for s, row in zip(signals, X)))
    print(f"wrote {len(signals)} {kind.name} histograms ({kind.length} bins) to {args.out}")


def _histograms(signals, kind, raw, threads):
    if raw:
        return desc.extract_many(kind, signals, threads=threads)
    lengths = {len(s) for s in signals}
    if lengths != {kind.length}:
        got = ", ".join(str(n) for n in sorted(lengths))
        raise CliError(f"dimension mismatch: {kind.name} histograms have {kind.length} bins, "
                       f"input rows have {got}")
    return np.vstack([s.samples for s in signals])


def cmd_train(args):
    kind = _kind(args)
    ds = _labeled(load_csv(getattr(args, "in")))
    X = _histograms(ds.signals, kind, args.raw, args.threads)
    cfg = IknnConfig(args.k, args.m, args.classifier_seed)
    model = fit(X, ds.labels, cfg, ds.class_names, descriptor=kind)
    save_model(model, args.out)
    preds = [p.label for p in predict_many(model, X)]
    acc = np.mean([p == t for p, t in zip(preds, ds.labels)])
    print(f"trained IKNN on {len(ds)} {kind.name} histograms; "
          f"{model.n_groups} subgroups; training-set accuracy {acc:.4f}")


def cmd_predict(args):
    model = load_model(args.model)
    signals = read_records(getattr(args, "in"))
    X = _histograms(signals, model.descriptor, args.raw, args.threads)
    preds = predict_many(model, X)
    lines = ["source_id,true_label,predicted,score"]
    for s, p in zip(signals, preds):
        lines.append(f"{s.source_id},{s.label or ''},{p.label},{format_float(p.score)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    labeled = [(s.label, p.label) for s, p in zip(signals, preds) if s.label is not None]
    msg = f"wrote {len(preds)} predictions to {args.out}"
    if labeled:
        msg += f"; accuracy {np.mean([t == p for t, p in labeled]):.4f} on {len(labeled)} labeled rows"
    print(msg)


def cmd_eval(args):
    ds = _labeled(load_csv(getattr(args, "in")))
    report = kfold_eval(ds, _kind(args), _classifier(args), args.folds, args.seed, args.threads)
    _write_text(args.out, report_csv(report))
    if args.timing_out:
        _write_text(args.timing_out, timing_csv([report]))
    print(text_table([report]))


def _parse_kinds(text, args):
    if text.lower() == "all":
        names = ["LDP", "LTEP", "LTRP", "LBP", "BSIF", "LPH"]
    else:
        try:
            names = [_descriptor_name(t.strip()) for t in text.split(",") if t.strip()]
        except argparse.ArgumentTypeError as exc:
            raise CliError(str(exc)) from None
    if not names:
        raise CliError("no descriptors given")
    return [desc.DescriptorKind(n, args.thr, args.bsif_seed) for n in names]


def cmd_compare(args):
    ds = _labeled(load_csv(getattr(args, "in")))
    reports = compare_descriptors(ds, _parse_kinds(args.descriptors, args), _classifier(args),
                                  args.folds, args.seed, args.threads)
    _write_text(args.out, comparison_csv(reports))
    if args.timing_out:
        _write_text(args.timing_out, timing_csv(reports))
    print(text_table(reports))


def cmd_ncc(args):
    ds = _labeled(load_csv(getattr(args, "in")))
    kind = _kind(args)
    rng = np.random.default_rng(args.seed)
    labels = np.array(ds.labels, dtype=object)
    lines = ["class,representation,row," + ",".join(f"s{i + 1}" for i in range(args.per_class))]
    summary = []
    for name in ds.class_names:
        members = np.flatnonzero(labels == name)
        if members.size < args.per_class:
            raise CliError(f"class {name!r} has {members.size} signatures, need {args.per_class}")
        picked = np.sort(rng.choice(members, args.per_class, replace=False))
        signals = [ds.signals[i] for i in picked]
        raw = ncc_matrix([s.samples for s in signals])
        hist = ncc_matrix(desc.extract_many(kind, signals))
        for rep, mat in (("raw", raw), (kind.name, hist)):
            for i, row in enumerate(mat):
                lines.append(f"{name},{rep},{i + 1}," + ",".join(format_float(v) for v in row))
        summary.append((name, mean_off_diagonal(raw), mean_off_diagonal(hist)))
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"{'class':<20} {'raw':>8} {kind.name:>8}")
    for name, r, h in summary:
        print(f"{name:<20} {r:>8.4f} {h:>8.4f}")


def cmd_detect(args):
    signals = read_records(getattr(args, "in"))
    ev_lines = ["source_id,index,kind,delta_watts"]
    seg_rows = []
    for s in signals:
        events = detect_edges(s, args.threshold_watts, args.smooth_window)
        for e in events:
            ev_lines.append(f"{s.source_id},{e.index},{e.kind},{format_float(e.delta_watts)}")
        for seg in segment_between(s, events):
            seg_rows.append((None, f"{s.source_id}:{seg.start}-{seg.end}", seg.samples))
    _write_text(args.out, "\n".join(ev_lines) + "\n")
    msg = f"wrote {len(ev_lines) - 1} events to {args.out}"
    if args.segments_out:
        write_records(args.segments_out, seg_rows)
        msg += f" and {len(seg_rows)} segments to {args.segments_out}"
    print(msg)


def _best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cmd_bench(args):
    if getattr(args, "in"):
        ds = _labeled(load_csv(getattr(args, "in")))
    else:
        ds = generate_synthetic(benchmark_config(seed=args.seed))
    lines = ["stage,descriptor,seconds,per_signature_us"]
    n = len(ds)
    for name in desc.KINDS:
        kind = desc.DescriptorKind(name, args.thr, args.bsif_seed)
        desc.extract_many(kind, ds.signals[:1])  # warm caches (BSIF bank)
        t = _best_time(lambda: desc.extract_many(kind, ds.signals, threads=args.threads), args.repeats)
        lines.append(f"extract,{name},{t:.6f},{1e6 * t / n:.2f}")
        print(f"extract {name:<5} {t:8.4f} s  ({1e6 * t / n:7.1f} us/signature)")
    X = desc.extract_many("LPH", ds.signals)
    cfg = IknnConfig(args.k, args.m, args.classifier_seed)
    t_fit = _best_time(lambda: fit(X, ds.labels, cfg, ds.class_names), args.repeats)
    model = fit(X, ds.labels, cfg, ds.class_names)
    t_pred = _best_time(lambda: predict_many(model, X), args.repeats)
    lines.append(f"fit,LPH,{t_fit:.6f},{1e6 * t_fit / n:.2f}")
    lines.append(f"predict,LPH,{t_pred:.6f},{1e6 * t_pred / n:.2f}")
    print(f"IKNN fit     {t_fit:8.4f} s   predict {t_pred:8.4f} s  on {n} LPH histograms")
    if args.out:
        _write_text(args.out, "\n".join(lines) + "\n")


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset")
    p.add_argument("--seed", type=_seed, default=1)
    p.add_argument("--classes", type=_positive_int, default=len(BENCHMARK_ARCHETYPES),
                   help=f"number of built-in archetypes, 1..{len(BENCHMARK_ARCHETYPES)}")
    p.add_argument("--per-class", type=_positive_int, default=40)
    p.add_argument("--length", type=int, default=400, help=f"samples per signature (>= {MIN_SIGNAL_LENGTH})")
    p.add_argument("--out", required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="descriptor histograms for every record")
    _add_descriptor(p)
    p.add_argument("--in", required=True, help="signal CSV")
    p.add_argument("--out", required=True, help="histogram CSV")
    _add_threads(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit an IKNN model and save it")
    _add_descriptor(p)
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--m", type=_positive_int, default=None)
    p.add_argument("--classifier-seed", type=_seed, default=0)
    p.add_argument("--raw", action="store_true", help="input holds raw signals; extract first")
    p.add_argument("--in", required=True, help="labeled histogram CSV (signal CSV with --raw)")
    p.add_argument("--out", required=True, help="model file")
    _add_threads(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label records with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--raw", action="store_true", help="input holds raw signals; extract first")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True, help="prediction CSV")
    _add_threads(p)
    p.set_defaults(func=cmd_predict)

    for name, helptext in (("eval", "stratified k-fold evaluation of one descriptor"),
                           ("compare", "k-fold evaluation of several descriptors on shared folds")):
        p = sub.add_parser(name, help=helptext)
        _add_descriptor(p)
        if name == "compare":
            p.add_argument("--descriptors", default="all", help="'all' or a comma list")
        _add_classifier(p)
        p.add_argument("--folds", type=_positive_int, default=10)
        p.add_argument("--seed", type=_seed, default=0, help="fold assignment seed")
        p.add_argument("--in", required=True, help="labeled signal CSV")
        p.add_argument("--out", required=True, help="report CSV")
        p.add_argument("--timing-out", help="optional CSV of wall-clock timings")
        _add_threads(p)
        p.set_defaults(func=cmd_eval if name == "eval" else cmd_compare)

    p = sub.add_parser("ncc", help="intra-class NCC matrices of raw signals and histograms")
    _add_descriptor(p)
    p.add_argument("--per-class", type=_positive_int, default=6)
    p.add_argument("--seed", type=_seed, default=0, help="seed of the per-class sampler")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_ncc)

    p = sub.add_parser("detect", help="on/off events and event segments of aggregate signals")
    p.add_argument("--threshold-watts", type=float, default=DEFAULT_THRESHOLD_WATTS)
    p.add_argument("--smooth-window", type=_positive_int, default=DEFAULT_SMOOTH_WINDOW)
    p.add_argument("--in", required=True, help="signal CSV of aggregates")
    p.add_argument("--out", required=True, help="events CSV")
    p.add_argument("--segments-out", help="signal CSV of baseline-corrected segments")
    _add_threads(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="time every descriptor and the IKNN (output is wall-clock)")
    _add_descriptor(p)
    p.add_argument("--in", help="labeled signal CSV (default: the synthetic benchmark)")
    p.add_argument("--seed", type=_seed, default=1)
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--m", type=_positive_int, default=None)
    p.add_argument("--classifier-seed", type=_seed, default=0)
    p.add_argument("--out")
    _add_threads(p)
    p.set_defaults(func=cmd_bench)
    return parser


def _validate(args):
    if args.command == "synth":
        if args.length < MIN_SIGNAL_LENGTH:
            raise CliError(f"--length must be >= {MIN_SIGNAL_LENGTH}, got {args.length}")
        if args.classes > len(BENCHMARK_ARCHETYPES):
            raise CliError(f"--classes must be <= {len(BENCHMARK_ARCHETYPES)}")
    if args.command == "detect":
        if not args.threshold_watts > 0:
            raise CliError("--threshold-watts must be positive")
        if args.smooth_window % 2 == 0:
            raise CliError("--smooth-window must be odd")
    if args.command in ("eval", "compare") and args.folds < 2:
        raise CliError("--folds must be >= 2")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        args.func(args)
    except (CliError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
