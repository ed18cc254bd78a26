"""Command-line entry point.

Exit codes: 0 when every criterion passes, 2 when a run completed but a
criterion failed, 1 for operational errors (bad config, I/O, crashes).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile

from .experiments import DESCRIPTIONS, KINDS, ExperimentReport, parse_config, run_experiment
from .experiments.common import THREADS_ENV, default_threads
from .plotting import report_plots

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2
log = logging.getLogger("waveguide_nls")


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="waveguide-nls",
                                description="Numerical experiments for the energy-critical NLS on waveguides.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment and write report JSON and CSV")
    r.add_argument("--config", required=True, metavar="PATH")
    r.add_argument("--out", required=True, metavar="DIR")
    r.add_argument("--seed", type=_u64)
    r.add_argument("--ensemble", type=_positive)
    r.add_argument("--threads", type=_positive,
                   help=f"worker threads (default: ${THREADS_ENV} or the CPU count)")
    r.add_argument("-v", "--verbose", action="store_true")
    v = sub.add_parser("validate", help="check a config and print its normalized form")
    v.add_argument("--config", required=True, metavar="PATH")
    pl = sub.add_parser("plot", help="render SVG plots from a report")
    pl.add_argument("--report", required=True, metavar="PATH")
    pl.add_argument("--out", required=True, metavar="DIR")
    sub.add_parser("list-kinds", help="list experiment kinds")
    return p


def _error(msg) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _load(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_config(path)


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
        cfg = cfg.with_overrides(seed=args.seed, ensemble=args.ensemble)
    except (OSError, ValueError) as exc:
        return _error(exc)
    threads = args.threads
    try:
        threads = threads or default_threads()
    except ValueError as exc:
        return _error(exc)
    log.info("running %s with %d thread(s)", cfg.kind, threads)
    try:
        report = run_experiment(cfg, threads)
    except Exception as exc:  # operational failure inside a run
        return _error(f"experiment failed: {type(exc).__name__}: {exc}")
    try:
        os.makedirs(args.out, exist_ok=True)
        _write_atomic(os.path.join(args.out, cfg.output["report"]), report.to_json() + "\n")
        _write_atomic(os.path.join(args.out, cfg.output["csv"]), report.csv_text())
    except OSError as exc:
        return _error(f"cannot write outputs: {exc}")
    for c in report.criteria:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: value={c['value']} threshold={c['threshold']}")
    if report.passed:
        return EXIT_OK
    print(f"criteria violated for {cfg.kind}", file=sys.stderr)
    return EXIT_FAILED


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except (OSError, ValueError) as exc:
        return _error(exc)
    print(cfg.to_json())
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        report = ExperimentReport.load(args.report)
        plots = report_plots(report)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, KeyError):
            exc = f"malformed report: missing {exc}"
        return _error(exc)
    try:
        os.makedirs(args.out, exist_ok=True)
        for name, text in plots.items():
            _write_atomic(os.path.join(args.out, name), text)
            print(os.path.join(args.out, name))
    except OSError as exc:
        return _error(f"cannot write plots: {exc}")
    return EXIT_OK


def cmd_list_kinds(args) -> int:
    for kind in KINDS:
        print(f"{kind:14s} {DESCRIPTIONS[kind]}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse signals usage errors with 2, which is reserved for failed criteria
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "validate": cmd_validate, "plot": cmd_plot,
               "list-kinds": cmd_list_kinds}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
