"""Command line entry point: ``oscillab <experiment> --config file.json``."""

import argparse
import json
import sys

from .experiments import EXPERIMENTS, run_experiment
from .reports import ExperimentConfig, emit_report


def build_parser():
    p = argparse.ArgumentParser(prog="oscillab", description="Run a numerical experiment and write CSV/JSON reports.")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", help="JSON config; defaults are used when omitted")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="output directory (overrides the config)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.config:
        try:
            cfg = ExperimentConfig.from_json(args.config)
        except (OSError, ValueError, TypeError) as exc:
            print(f"oscillab: bad config: {exc}", file=sys.stderr)
            return 2
        if cfg.experiment != args.experiment:
            print(f"oscillab: config is for {cfg.experiment!r}, not {args.experiment!r}", file=sys.stderr)
            return 2
    else:
        cfg = ExperimentConfig(args.experiment)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output = args.out
    report = run_experiment(cfg)
    # the output directory is left out so reruns elsewhere stay byte-identical
    report.notes["config"] = {k: v for k, v in cfg.to_dict().items() if k != "output"}
    try:
        paths = emit_report(report, cfg.output)
    except OSError as exc:
        print(f"oscillab: {exc}", file=sys.stderr)
        return 2
    for name, g in sorted(report.gates.items()):
        print(f"{'PASS' if g['passed'] else 'FAIL'} {name}: value={json.dumps(g['value'])} threshold={json.dumps(g['threshold'])}")
    for path in paths:
        print(f"wrote {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
