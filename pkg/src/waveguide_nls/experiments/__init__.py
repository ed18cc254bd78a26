"""Experiment harness: configs, runners and reports."""
from __future__ import annotations

import platform
import time

import numpy as np
import scipy

from .common import default_threads, run_tasks
from .config import KINDS, SCHEMA, ConfigError, ExperimentConfig, default_config, parse_config
from .dynamics import (conservation_evaluate, conservation_records, focusing_evaluate,
                       focusing_records, picard_evaluate, picard_records, smalldata_evaluate,
                       smalldata_records, tail_evaluate, tail_records)
from .report import ExperimentReport, loglog_fit, member_seed
from .scaling import (bilinear_evaluate, bilinear_sweep_records, strichartz_evaluate,
                      strichartz_sweep_records)

RUNNERS = {
    "strichartz": (strichartz_sweep_records, strichartz_evaluate),
    "bilinear": (bilinear_sweep_records, bilinear_evaluate),
    "conservation": (conservation_records, conservation_evaluate),
    "smalldata": (smalldata_records, smalldata_evaluate),
    "focusing": (focusing_records, focusing_evaluate),
    "picard": (picard_records, picard_evaluate),
    "tail": (tail_records, tail_evaluate),
}

DESCRIPTIONS = {
    "strichartz": "sup-ratio of free-wave L^p norms to L^2 data versus the frequency cutoff N",
    "bilinear": "L^2 norm of products of high- and low-frequency free waves versus N1",
    "conservation": "mass, energy and momentum drift of the split-step solver",
    "smalldata": "H^1 growth of small data over a long window, both signs",
    "focusing": "max|u| growth for negative-energy data, focusing against defocusing",
    "picard": "contraction factors of the Picard iteration across data sizes",
    "tail": "high-frequency tail ||P_{>N} u||_{H^1} along the flow",
}


def evaluate(config: ExperimentConfig, records: list):
    """Summary and criteria computed from the records alone."""
    return RUNNERS[config.kind][1](config, records)


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    threads = default_threads() if threads is None else threads
    start = time.perf_counter()
    records = RUNNERS[config.kind][0](config, threads)
    summary, criteria = evaluate(config, records)
    meta = {"wall_clock_s": time.perf_counter() - start, "threads": threads,
            "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}
    return ExperimentReport(config.kind, config.to_dict(), records, summary, criteria, meta)


def recheck(report: ExperimentReport):
    """Recompute summary and criteria from a report's stored records."""
    cfg = parse_config(report.config)
    return evaluate(cfg, report.records)


__all__ = ["KINDS", "SCHEMA", "ConfigError", "ExperimentConfig", "ExperimentReport", "RUNNERS",
           "DESCRIPTIONS", "default_config", "evaluate", "loglog_fit", "member_seed", "parse_config",
           "recheck", "run_experiment", "run_tasks"]
