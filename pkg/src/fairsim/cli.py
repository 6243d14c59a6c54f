"""Command line entry point: ``fairsim {run,sweep,validate,synth}``.

Exit codes: 0 success, 1 invalid configuration or input, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import ENV_CONFIG, Bundle, load_bundle, validate_bundle
from .engine import ALGORITHMS, RunSpec, sweep
from .errors import ConfigError, FairSimError, MismatchedScenario, ParseError, SchemaError
from .report import atomic_write, emit_csv, emit_summary
from .trajectory import PATTERNS, dumps_csv, load_csv, synthesize

log = logging.getLogger("fairsim")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _algos(text: str) -> List[str]:
    names = [a.strip().upper() for a in text.split(",") if a.strip()]
    bad = [a for a in names if a not in ALGORITHMS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {bad}; choose from {', '.join(ALGORITHMS)}")
    return names


def _pair(text: str):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX, got {text!r}")
    return lo, hi


def _loads(text: str):
    out = []
    for item in text.split(","):
        try:
            u, d = item.strip().split("+")
            out.append((int(u), int(d)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"load {item!r} is not UCV+DCV")
    return out


def _ratios(text: str):
    """``w2:w1`` preference ratios, e.g. ``1:20,20:1``."""
    out = []
    for item in text.split(","):
        try:
            w2, w1 = (float(x) for x in item.strip().split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"weights {item!r} are not W2:W1")
        out.append((item.strip(), (w1, w2, w1, w2)))
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"JSON config (default: ${ENV_CONFIG})")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted-key override, repeatable")


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="trajectory CSV")
    p.add_argument("--pattern", choices=PATTERNS, default="constant_speed_ring",
                   help="synthetic pattern when no --scenario is given")
    p.add_argument("--ucv", type=int, default=10)
    p.add_argument("--dcv", type=int, default=10)
    p.add_argument("--seconds", type=float, default=10.0)
    p.add_argument("--radius", type=_pair, metavar="MIN,MAX", help="ring radius range for synthetic patterns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario under one or more algorithms")
    _add_common(p)
    _add_source(p)
    p.add_argument("--algo", type=_algos, default=["FAIR"], help="comma list, e.g. fair,sa_max")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep", help="sweep load points and/or preference weights")
    _add_common(p)
    _add_source(p)
    p.add_argument("--algo", type=_algos, default=["FAIR", "SA_MAX", "DA_MAX"])
    p.add_argument("--loads", type=_loads, help="synthetic loads, e.g. 4+4,7+8,10+10")
    p.add_argument("--weights", type=_ratios, help="w2:w1 ratios, e.g. 1:20,20:1")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate", help="check a config (and optionally a scenario)")
    _add_common(p)
    p.add_argument("--scenario")

    p = sub.add_parser("synth", help="write a synthetic trajectory CSV")
    p.add_argument("--pattern", choices=PATTERNS, required=True)
    p.add_argument("--ucv", type=int, required=True)
    p.add_argument("--dcv", type=int, required=True)
    p.add_argument("--seconds", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=_pair, metavar="MIN,MAX")
    p.add_argument("--out", required=True)
    return parser


def _synth(args, n_ucv, n_dcv, seed):
    opts = {"radius_range": args.radius} if args.radius else {}
    return synthesize(args.pattern, n_ucv, n_dcv, args.seconds, seed, **opts)


def _specs(args, bundle: Bundle, scenario, weights_label=None, weights=None, point=None):
    cfg = bundle.sim if weights is None else replace(bundle.sim, default_weights=weights)
    label = {}
    if point is not None:
        label["point"] = point
    if weights_label is not None:
        label["weights"] = weights_label
    return [
        RunSpec(scenario, a, cfg, bundle.energy, bundle.contention, args.duration, args.seed, bundle.rate_table, dict(label))
        for a in args.algo
    ]


def _finish(ledgers, bundle: Bundle, out: str) -> int:
    for L in ledgers:
        L.meta["overrides"] = list(bundle.overrides)
    emit_csv(ledgers, out)
    failed = [L for L in ledgers if "error" in L.meta]
    for L in failed:
        print(f"error: {L.algorithm}: {L.meta['error']}", file=sys.stderr)
    for L in ledgers:
        if "error" not in L.meta:
            g = L.aggregates
            print(f"{L.algorithm:7s} {L.meta.get('label', {})} util={g['channel_utilization']:.4f} "
                  f"fps_ucv={g['fps_ucv']:.3f} fps_dcv={g['fps_dcv']:.3f}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_run(args) -> int:
    bundle = load_bundle(args.config, args.overrides)
    scenario = load_csv(args.scenario) if args.scenario else _synth(args, args.ucv, args.dcv, args.seed)
    ledgers = sweep(_specs(args, bundle, scenario), workers=args.workers)
    code = _finish(ledgers, bundle, args.out)
    try:
        summary = emit_summary(ledgers)
        json.dump(summary, sys.stdout, sort_keys=True, indent=2)
        sys.stdout.write("\n")
    except MismatchedScenario:
        pass
    return code


def cmd_sweep(args) -> int:
    bundle = load_bundle(args.config, args.overrides)
    if args.scenario and args.loads:
        raise ConfigError("--loads only applies to synthetic scenarios")
    loads = args.loads or [(args.ucv, args.dcv)]
    weight_points = args.weights or [(None, None)]
    specs = []
    for n_u, n_d in loads:
        scenario = load_csv(args.scenario) if args.scenario else _synth(args, n_u, n_d, args.seed)
        n_u, n_d = scenario.role_counts()
        for wl, w in weight_points:
            point = f"{n_u}+{n_d}" if wl is None else f"{n_u}+{n_d}@{wl}"
            specs.extend(_specs(args, bundle, scenario, wl, w, point))
    return _finish(sweep(specs, workers=args.workers), bundle, args.out)


def cmd_validate(args) -> int:
    bundle = load_bundle(args.config, args.overrides)
    problems = validate_bundle(bundle)
    if args.scenario:
        try:
            load_csv(args.scenario)
        except (ParseError, SchemaError, FairSimError, OSError) as exc:
            problems.append(f"scenario: {exc}")
    for p in problems:
        print(f"invalid: {p}", file=sys.stderr)
    if problems:
        return EXIT_INVALID
    print("ok", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    scenario = _synth(args, args.ucv, args.dcv, args.seed)
    atomic_write(Path(args.out), dumps_csv(scenario))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate, "synth": cmd_synth}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParseError, SchemaError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FairSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
