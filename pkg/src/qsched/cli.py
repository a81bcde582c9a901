"""Command-line front end: ``qsched schedule|compare|validate|generate``.

Exit codes:
  0  success
  1  input error (unreadable or malformed circuit, platform, schedule or flag)
  2  infeasible constraints or oracle limit exceeded
  3  a schedule failed validation
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .circuit import Circuit, CircuitError, build_depgraph, load_circuit
from .generate import DEFAULT_MIX, parse_mix, random_circuit
from .listsched import schedule_list
from .oracle import LimitExceeded, OracleLimits, schedule_optimal
from .platform import PlatformConfig, PlatformError, default_platform, load_platform
from .qsdc import SchedulerOptions, schedule_asap, schedule_qsdc
from .schedule import (CompareReport, Schedule, ScheduleError, compute_metrics, render_gantt,
                       validate)
from .sdc import InfeasibleSystem

log = logging.getLogger("qsched")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INVALID = 0, 1, 2, 3

ALGOS = ("qsdc", "list", "asap", "oracle")
# extra names accepted by ``compare --algos`` for ablations
COMPARE_ALGOS = ("qsdc", "qsdc-off", "list", "list-nostack", "oracle")

CIRCUIT_SUFFIXES = (".qc", ".txt", ".json")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad flags are input errors; argparse's default status 2 means "infeasible" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- argument helpers -------------------------------------------------------------


def _max_stacking(text: str) -> tuple[tuple[str, int], int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected type:instance:n, got {text!r}")
    try:
        return (parts[0], int(parts[1])), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected type:instance:n, got {text!r}") from None


def _on_off(text: str) -> bool:
    if text.lower() in ("on", "1", "yes", "true"):
        return True
    if text.lower() in ("off", "0", "no", "false"):
        return False
    raise argparse.ArgumentTypeError("expected on or off")


def _add_platform_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--platform", metavar="P", help="platform JSON (default: built-in Surface-17)")


def _add_scheduler_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scheduler options")
    g.add_argument("--qsdc", type=_on_off, default=True, metavar="on|off",
                   help="allow instrument stacking in QSDC (default on)")
    g.add_argument("--max-stacking", type=_max_stacking, action="append", default=[],
                   metavar="TYPE:INST:N", help="cap stacking on one instrument instance")
    g.add_argument("--horizon-slack", type=int, default=0, metavar="N",
                   help="extra cycles on the ALAP horizon used for the linear order")
    g.add_argument("--pin", nargs=3, type=int, action="append", default=[], metavar=("A", "B", "L"),
                   help="gate B starts exactly L cycles after gate A")
    g.add_argument("--no-stacking", action="store_true",
                   help="forbid instrument sharing in list and oracle")
    g.add_argument("--no-compact", action="store_true",
                   help="skip the left-shift pass after QSDC legalization")
    g.add_argument("--window", type=int, default=1000, metavar="N",
                   help="gates per QSDC legalization window, 0 for the whole circuit (default 1000)")
    g.add_argument("--oracle-max-gates", type=int, default=OracleLimits.max_gates, metavar="N")
    g.add_argument("--oracle-max-makespan", type=int, default=OracleLimits.max_makespan, metavar="N")
    g.add_argument("--oracle-timeout-s", type=float, default=OracleLimits.timeout_s, metavar="T")


def _platform(args) -> PlatformConfig:
    return load_platform(args.platform) if args.platform else default_platform()


def _options(args) -> SchedulerOptions:
    if args.window < 0:
        raise UsageError("--window must be >= 0")
    return SchedulerOptions(
        qsdc_enabled=args.qsdc,
        max_stacking=dict(args.max_stacking),
        horizon_slack=args.horizon_slack,
        pins=[tuple(p) for p in args.pin],
        compact=not args.no_compact,
        window=args.window or None,
    )


def _limits(args) -> OracleLimits:
    return OracleLimits(args.oracle_max_gates, args.oracle_max_makespan, args.oracle_timeout_s)


def _check_options(options: SchedulerOptions, platform: PlatformConfig, circuit: Circuit) -> None:
    for key in options.max_stacking:
        if key not in platform.instances():
            raise UsageError(f"--max-stacking: no instrument {key[0]}:{key[1]}")
        options.stacking_for(key, platform)  # range check
    for a, b, _ in options.pins:
        for g in (a, b):
            if not 0 <= g < len(circuit.gates):
                raise UsageError(f"--pin: no gate {g}")
        if a == b:
            raise UsageError("--pin needs two distinct gates")


def run_algo(algo: str, circuit: Circuit, platform: PlatformConfig, options: SchedulerOptions,
             limits: OracleLimits, stacking: bool = True, trace: dict | None = None) -> Schedule:
    if algo == "qsdc":
        return schedule_qsdc(circuit, platform, options, trace=trace)
    if algo == "qsdc-off":
        off = SchedulerOptions(**{**options.__dict__, "qsdc_enabled": False})
        return schedule_qsdc(circuit, platform, off, trace=trace)
    if algo == "list":
        return schedule_list(circuit, platform, options, stacking=stacking)
    if algo == "list-nostack":
        return schedule_list(circuit, platform, options, stacking=False)
    if algo == "asap":
        return schedule_asap(circuit, platform, options)
    if algo == "oracle":
        if options.pins:
            raise UsageError("the oracle does not support --pin")
        stack = stacking and options.qsdc_enabled
        seed = schedule_list(circuit, platform, stacking=stack) if len(circuit.gates) else None
        return schedule_optimal(circuit, platform, limits, stacking=stack, upper_bound=seed).schedule
    raise UsageError(f"unknown algorithm {algo!r}")


# -- subcommands -------------------------------------------------------------------


def cmd_schedule(args) -> int:
    platform = _platform(args)
    circuit = load_circuit(args.circuit)
    options = _options(args)
    _check_options(options, platform, circuit)
    want_trace = args.dump_constraints or args.dump_order
    trace = {} if want_trace else None
    sched = run_algo(args.algo, circuit, platform, options, _limits(args),
                     stacking=not args.no_stacking, trace=trace)
    if args.out:
        Path(args.out).write_text(sched.to_json())
    if trace and args.dump_order:
        print("order: " + " ".join(map(str, trace.get("order", []))))
    if trace and args.dump_constraints:
        print("constraints:")
        print("".join(trace.get("constraints", [])), end="")
    print(f"latency: {sched.latency_cycles} cycles ({sched.latency_ns} ns)")
    if args.algo == "asap":
        print("note: asap ignores instruments; the result is a lower bound, not a legal schedule")
    if args.gantt:
        print(render_gantt(sched, platform), end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    platform = _platform(args)
    circuit = load_circuit(args.circuit)
    sched = Schedule.from_json(Path(args.schedule).read_text())
    if sched.circuit.gates != circuit.gates:
        raise UsageError("schedule was produced for a different circuit")
    violations = validate(sched, build_depgraph(circuit, platform), platform)
    for v in violations:
        print(v)
    if violations:
        print(f"{len(violations)} violation(s)", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: latency {sched.latency_cycles} cycles ({sched.latency_ns} ns)")
    return EXIT_OK


def _gather_circuits(args, platform: PlatformConfig) -> dict[str, Circuit]:
    circuits: dict[str, Circuit] = {}
    if args.circuits:
        root = Path(args.circuits)
        if not root.is_dir():
            raise UsageError(f"{root} is not a directory")
        for path in sorted(root.iterdir()):
            if path.suffix in CIRCUIT_SUFFIXES and path.is_file():
                circuits[path.stem] = load_circuit(path)
    if args.gen:
        lo, hi = args.gen_gates
        rng = random.Random(args.seed)
        mix = parse_mix(args.mix) if args.mix else DEFAULT_MIX
        for i in range(args.gen):
            n = rng.randint(lo, hi)
            circuits[f"gen{i:04d}"] = random_circuit(n, platform, args.qubits, mix,
                                                     seed=rng.randrange(2**32))
    return circuits


def _gate_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        lo_i, hi_i = int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX, got {text!r}") from None
    if lo_i < 0 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"bad gate range {text!r}")
    return lo_i, hi_i


def _compare_one(name, circuit, platform, options, limits, algos, stacking, oracle_small):
    """Schedule one circuit with every algorithm; returns (name, schedules, times, problems)."""
    scheds, times, problems = {}, {}, []
    dg = build_depgraph(circuit, platform)
    for algo in algos:
        t0 = time.perf_counter()
        scheds[algo] = run_algo(algo, circuit, platform, options, limits, stacking)
        times[algo] = time.perf_counter() - t0
    if oracle_small and "oracle" not in algos and len(circuit.gates) <= limits.max_gates:
        t0 = time.perf_counter()
        try:
            scheds["oracle"] = run_algo("oracle", circuit, platform, options, limits, stacking)
            times["oracle"] = time.perf_counter() - t0
        except LimitExceeded as exc:
            log.info("%s: oracle skipped (%s)", name, exc)
    for algo, sched in scheds.items():
        capacities = None
        if algo in ("qsdc", "qsdc-off"):
            opts = options if algo == "qsdc" else SchedulerOptions(qsdc_enabled=False)
            capacities = {k: opts.stacking_for(k, platform) for k in platform.instances()}
        elif algo == "list-nostack" or not stacking:
            capacities = {k: 1 for k in platform.instances()}
        for v in validate(sched, dg, platform, capacities):
            problems.append(f"{name}/{algo}: {v}")
    return name, scheds, times, problems


def cmd_compare(args) -> int:
    platform = _platform(args)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in COMPARE_ALGOS:
            raise UsageError(f"--algos: unknown algorithm {a!r} (choose from {', '.join(COMPARE_ALGOS)})")
    if not algos:
        raise UsageError("--algos is empty")
    options = _options(args)
    if options.pins:
        raise UsageError("--pin is per circuit; use it with 'schedule'")
    limits = _limits(args)
    circuits = _gather_circuits(args, platform)
    jobs = [(name, c, platform, options, limits, algos, not args.no_stacking, args.oracle_small)
            for name, c in circuits.items()]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_compare_one, *zip(*jobs)))
    else:
        outcomes = [_compare_one(*job) for job in jobs]

    problems = [p for _, _, _, ps in outcomes for p in ps]
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        print(f"validation failed: {len(problems)} violation(s)", file=sys.stderr)
        return EXIT_INVALID

    results = {name: scheds for name, scheds, _, _ in outcomes}
    wall = {} if args.no_timing else {
        (name, algo): t for name, _, times, _ in outcomes for algo, t in times.items()
    }
    report = compute_metrics(results, wall)
    if not report.platform_hash:
        report.platform_hash = platform.digest()
    for row in report.rows:
        opt = results[row.circuit].get("oracle")
        if opt is not None:
            row.gap = row.latency_cycles / opt.latency_cycles if opt.latency_cycles else 1.0
    baseline = args.baseline or ("list" if "list" in algos else algos[-1])
    if baseline not in report.algos and report.rows:
        raise UsageError(f"--baseline {baseline!r} is not among the algorithms")
    text = report.to_text(baseline if report.rows else None)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_generate(args) -> int:
    platform = _platform(args)
    mix = parse_mix(args.mix) if args.mix else None
    if args.gates < 0:
        raise UsageError("--gates must be >= 0")
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    texts = [random_circuit(args.gates, platform, args.qubits, mix, seed=args.seed + i).to_text()
             for i in range(args.count)]
    if args.count == 1:
        if args.out:
            Path(args.out).write_text(texts[0])
        else:
            sys.stdout.write(texts[0])
        return EXIT_OK
    if not args.out:
        raise UsageError("--count > 1 needs --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, text in enumerate(texts):
        (out / f"gen{i:04d}.qc").write_text(text)
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qsched", description="Resource-constrained scheduling for quantum control hardware.",
        epilog="exit codes: 0 ok, 1 input error, 2 infeasible/limit, 3 validation failure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="schedule one circuit")
    _add_platform_arg(p)
    p.add_argument("--circuit", required=True, metavar="C")
    p.add_argument("--algo", choices=ALGOS, default="qsdc")
    p.add_argument("--out", metavar="S.json", help="write the schedule as JSON")
    p.add_argument("--gantt", action="store_true", help="print a text timeline")
    p.add_argument("--dump-constraints", action="store_true")
    p.add_argument("--dump-order", action="store_true")
    _add_scheduler_args(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("compare", help="schedule many circuits with several algorithms")
    _add_platform_arg(p)
    p.add_argument("--circuits", metavar="DIR", help="directory of .qc/.txt/.json circuits")
    p.add_argument("--algos", default="qsdc,list", help=f"comma list from {','.join(COMPARE_ALGOS)}")
    p.add_argument("--baseline", help="algorithm speedups are measured against (default list)")
    p.add_argument("--oracle-small", action="store_true",
                   help="add optimal schedules and gaps where the oracle fits")
    p.add_argument("--gen", type=int, default=0, metavar="N", help="add N seeded random circuits")
    p.add_argument("--gen-gates", type=_gate_range, default=(20, 200), metavar="MIN:MAX")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qubits", type=int, default=None)
    p.add_argument("--mix", help="opcode mix for --gen, e.g. x:0.5,measure:0.5")
    p.add_argument("--jobs", type=int, default=1, help="circuits scheduled in parallel")
    p.add_argument("--no-timing", action="store_true", help="report zero wall times")
    p.add_argument("--out", metavar="R.json", help="write the report as JSON")
    _add_scheduler_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a schedule against its circuit and platform")
    _add_platform_arg(p)
    p.add_argument("--circuit", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="write seeded random circuits")
    _add_platform_arg(p)
    p.add_argument("--gates", type=int, required=True)
    p.add_argument("--qubits", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mix", help="opcode mix, e.g. x:0.5,measure:0.5")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", help="file (or directory with --count > 1); default stdout")
    p.set_defaults(func=cmd_generate)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("QSCHED_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleSystem, LimitExceeded) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CircuitError, PlatformError, ScheduleError, UsageError, OSError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
