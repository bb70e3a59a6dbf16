"""Command-line front end: ``remotal-lab run | list | validate-config``."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, LabError
from .scenarios import list_scenarios, resolve_target, run_all, validate


def _cmd_list(args):
    for name, desc in list_scenarios():
        print(f"{name}\t{desc}")
    return 0


def _cmd_validate(args):
    scenarios = resolve_target(args.config)
    validate(scenarios, base=args.config)
    print(f"ok: {len(scenarios)} scenario(s)")
    return 0


def _cmd_run(args):
    scenarios = []
    for target in args.targets:
        batch = resolve_target(target)
        validate(batch, base=target)
        scenarios.extend(batch)
    outcomes = run_all(scenarios, args.out, jobs=args.jobs, seed=args.seed)
    failed = 0
    for o in outcomes:
        print(f"{'PASS' if o.passed else 'FAIL'} {o.name} -> {o.report_path}")
        for f in o.failures:
            print(f"    {f['key']}: expected {f['expected']!r}, got {f['got']!r}")
        failed += not o.passed
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="remotal-lab", description="Windowed statistical convergence and farthest-point lab.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenarios from config files or built-in names (paper:...)")
    run.add_argument("targets", nargs="+", metavar="config.json|paper:name")
    run.add_argument("--out", default="out", help="output directory (default: ./out)")
    run.add_argument("--jobs", type=int, default=1, help="parallel scenario workers")
    run.add_argument("--seed", type=int, default=None, help="override battery seeds")
    run.set_defaults(func=_cmd_run)

    ls = sub.add_parser("list", help="list built-in scenarios")
    ls.set_defaults(func=_cmd_list)

    val = sub.add_parser("validate-config", help="parse and check a config without running it")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"remotal-lab: config error at {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"remotal-lab: I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 3
    except LabError as exc:
        print(f"remotal-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
