"""Command-line entry point: ``python -m retrial <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from retrial.bench.harness import BenchConfig, load_bench_config, read_records, run_matched
from retrial.bench.methods import Method, deploy_config_for
from retrial.bench.report import report
from retrial.bench.summary import summarize
from retrial.bench.charts import line_trace
from retrial.config import get_settings
from retrial.core.errors import RetrialError
from retrial.core.rng import SeedStream
from retrial.core.types import Backend
from retrial.db.dao import register_run
from retrial.demogen.expert import generate_demos
from retrial.demogen.storage import read_dataset, write_dataset
from retrial.demogen.validation import validate_dataset
from retrial.deploy.runner import run_episode
from retrial.graspworld.scenario import ScenarioConfig, Variant, load_scenario
from retrial.monitor.engine import MonitorConfig
from retrial.monitor.trace import emit_trace
from retrial.policy.retrieval import build_policy
from retrial.valuefn.report import monotonicity_report
from retrial.valuefn.storage import load_model, save_model
from retrial.valuefn.train import TrainConfig, train

logger = logging.getLogger("retrial.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

SCHEMAS = {
    "scenario": ScenarioConfig,
    "bench": BenchConfig,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; usage errors here are exit 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _schema_text(name: str) -> str:
    return json.dumps(SCHEMAS[name].model_json_schema(), indent=2, sort_keys=True)


def _epilog() -> str:
    parts = ["config schemas (JSON):"]
    for name in SCHEMAS:
        parts.append(f"\n[{name}]\n{_schema_text(name)}")
    return "\n".join(parts)


# ── subcommands ──────────────────────────────────────────────────────────────

def cmd_gen_demos(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig.for_variant(args.variant)
    ds = generate_demos(cfg, args.count, SeedStream(args.seed))
    validate_dataset(ds)
    path = write_dataset(ds, args.out)
    print(f"wrote {ds.count} demos (mean length {ds.mean_length:.1f}) to {path}")
    return EXIT_OK


def cmd_train_value(args: argparse.Namespace) -> int:
    ds = read_dataset(args.demos)
    cfg = TrainConfig.from_settings(args.seed, steps=args.steps, lr=args.lr, batch=args.batch)
    model = train(ds, args.backend, cfg)
    path = save_model(model, args.out)
    rep = monotonicity_report(model, ds)
    print(
        f"wrote {model.backend.value} value model to {path} "
        f"(loss {model.meta['loss_head']:.4f} -> {model.meta['loss_tail']:.4f}, "
        f"median spearman {rep.median:.3f})"
    )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    cfg, base_dir = load_bench_config(args.config)
    records = run_matched(cfg, base_dir)
    summary = summarize(records)
    written = report(summary, records, args.out)
    register_run(cfg.model_dump(mode="json"), summary)
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    records = read_records(args.records)
    summary = summarize(records)
    written = report(summary, records, args.out)
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    ds = read_dataset(args.demos)
    model = load_model(args.value)
    monitor = MonitorConfig.from_settings(ds.mean_length, model.backend)
    if args.k is not None:
        monitor = replace(monitor, k=args.k)
    deploy_cfg = deploy_config_for(Method.OURS_FULL.value, monitor, record_trace=True)
    res = run_episode(
        ScenarioConfig.for_variant(args.variant),
        build_policy(ds),
        model,
        deploy_cfg,
        SeedStream(args.scenario_seed),
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = emit_trace(res.verdicts, monitor, out / "trace.csv")
    line_trace(
        out / "trace.svg",
        [v.step for v in res.verdicts],
        [v.delta for v in res.verdicts],
        [v.triggered for v in res.verdicts],
        title=f"Monitor trace ({model.backend.value}, k={monitor.k}, {args.variant})",
        y_label="progress vs expected",
    )
    print(
        f"episode success={res.success} steps={res.steps} recoveries={res.recoveries}; "
        f"wrote {n} trace rows to {out}"
    )
    return EXIT_OK


def cmd_schema(args: argparse.Namespace) -> int:
    print(_schema_text(args.name))
    return EXIT_OK


# ── parser ───────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="retrial",
        description="Value-guided trial-and-error deployment in a hidden-parameter grasp world.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-demos", help="generate scripted expert demonstrations")
    p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.TRAIN.value)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scenario", help="scenario config JSON (overrides --variant)")
    p.set_defaults(func=cmd_gen_demos)

    p = sub.add_parser("train-value", help="train a value function on demonstrations")
    p.add_argument("--demos", required=True)
    p.add_argument("--backend", choices=[b.value for b in Backend], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_value)

    p = sub.add_parser("eval", help="run the matched-pair benchmark and write a report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="rebuild a report from trials.jsonl")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("trace", help="run one monitored episode and export its trace")
    p.add_argument("--demos", required=True)
    p.add_argument("--value", required=True)
    p.add_argument("--scenario-seed", type=int, required=True)
    p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.BLOCKED.value)
    p.add_argument("--k", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("schema", help="print a config JSON schema")
    p.add_argument("name", choices=sorted(SCHEMAS))
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RetrialError, OSError) as exc:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
