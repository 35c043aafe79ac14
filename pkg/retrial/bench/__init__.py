"""Matched-pair benchmark: methods, harness, statistics and reports."""

from retrial.bench.harness import BenchConfig, TrialRecord, load_bench_config, read_records, run_matched  # noqa: F401
from retrial.bench.methods import Method, get_method, list_methods, register  # noqa: F401
from retrial.bench.report import write_records  # noqa: F401
from retrial.bench.summary import Summary, summarize  # noqa: F401
