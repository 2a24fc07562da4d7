"""``nosig`` command line.

Usage::

    nosig steer --scenario FILE --out DIR [--seed N]
    nosig channel-check --scenario FILE --out DIR [--seed N]
    nosig signal-test --scenario FILE --out DIR [--seed N] [--shots N]
    nosig demo NAME --out DIR [--seed N] [--shots N]

Exit codes: 0 expected result, 1 well-formed run with a negative verdict,
2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import TypeAdapter, ValidationError

from . import demos
from .channels import is_completely_positive, is_positive_sampled, is_trace_preserving, kraus_from_choi
from .encoding import (
    FORMAT_VERSION,
    csv_rows,
    dumps,
    protocol_to_json,
    signaling_report_to_json,
    steering_report_to_json,
)
from .errors import MismatchedDensityError, NosigError, NotCompletelyPositiveError
from .schema import (
    ChannelCheckScenario,
    DemoInputs,
    DemoScenario,
    Scenario,
    SignalTestScenario,
    SteerScenario,
    ensemble_from_members,
)
from .signaling_lab import compare_ensembles, signaling_test, simulate_experiment
from .state_core import purify
from .steering import build_steering, verify_steering

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2
COMMANDS = ("steer", "channel-check", "signal-test", "demo")


class InputError(Exception):
    pass


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def run_steer(sc: SteerScenario, out: Path) -> int:
    try:
        shared = sc.inputs.shared.to_domain()
        target = ensemble_from_members(sc.inputs.target)
        protocol = build_steering(target, shared)
    except MismatchedDensityError as exc:
        raise InputError(f"target ensemble does not match the shared state: trace distance {exc.trace_distance:.17g}") from exc
    rep = verify_steering(protocol, shared)
    _write(out, sc.outputs.protocol, dumps(protocol_to_json(protocol)))
    _write(out, sc.outputs.report, dumps({
        "formatVersion": FORMAT_VERSION, "command": "steer", "verification": steering_report_to_json(rep),
    }))
    print(f"steer: max deviation {rep.max_deviation:.3e}")
    return EXIT_OK if rep.passed else EXIT_NEGATIVE


def run_channel_check(sc: ChannelCheckScenario, out: Path) -> int:
    m = sc.inputs.channel.to_domain()
    choi = m.choi()
    cp, min_eig = is_completely_positive(choi)
    tp, tp_dev = is_trace_preserving(choi)
    positive, worst = is_positive_sampled(m, sc.inputs.nSamples, sc.seed)
    try:
        rank = len(kraus_from_choi(choi).operators)
    except NotCompletelyPositiveError:
        rank = None
    report = {
        "formatVersion": FORMAT_VERSION,
        "command": "channel-check",
        "cp": cp,
        "tp": tp,
        "tpDeviation": tp_dev,
        "minChoiEigenvalue": min_eig,
        "krausRank": rank,
        "positiveSampled": positive,
        "positiveSampledWorst": worst,
        "positivityCheck": "sampled, necessary condition",
        "nSamples": sc.inputs.nSamples,
    }
    _write(out, sc.outputs.report, dumps(report))
    print(f"channel-check: cp={cp} tp={tp} positiveSampled={positive}")
    return EXIT_OK if cp and tp else EXIT_NEGATIVE


def run_signal_test(sc: SignalTestScenario, out: Path, shots: int | None = None) -> int:
    inp = sc.inputs
    g = inp.dynamics.to_domain()
    rho = inp.rho.to_domain()
    shots = inp.shots if shots is None else shots
    if (inp.ensembleA is None) != (inp.ensembleB is None):
        raise InputError("ensembleA and ensembleB must be given together")
    try:
        if inp.ensembleA is not None:
            report = compare_ensembles(g, ensemble_from_members(inp.ensembleA), ensemble_from_members(inp.ensembleB))
        else:
            m = inp.m if inp.m is not None else max(rho.rank() + 1, 2)
            report = signaling_test(g, rho, inp.nPairs, m, sc.seed)
    except MismatchedDensityError as exc:
        raise InputError(f"ensembles mix to different states: trace distance {exc.trace_distance:.17g}") from exc
    records = []
    if shots > 0:
        shared = purify(report.rho)
        proto_a = build_steering(report.ensemble_a, shared)
        proto_b = build_steering(report.ensemble_b, shared)
        record, report = simulate_experiment(g, shared, proto_a, proto_b, shots, sc.seed)
        records.append(record)
        _write(out, sc.outputs.csv, csv_rows(records))
    _write(out, sc.outputs.report, dumps({
        "formatVersion": FORMAT_VERSION, "command": "signal-test", "dynamics": g.label,
        "report": signaling_report_to_json(report),
    }))
    print(f"signal-test: {report.verdict} (residual {report.residual:.3e})")
    return EXIT_OK if report.verdict == inp.expect else EXIT_NEGATIVE


def run_demo(sc: DemoScenario, out: Path, shots: int | None = None) -> int:
    name = sc.inputs.name
    shots = shots if shots is not None else sc.inputs.shots
    kwargs = {"seed": sc.seed}
    if shots is not None:
        kwargs["shots"] = shots
    reproduced, report, records = demos.DEMOS[name](**kwargs)
    _write(out, sc.outputs.report, dumps({
        "formatVersion": FORMAT_VERSION, "command": "demo", "name": name, "seed": sc.seed,
        "reproduced": reproduced, "report": report,
    }))
    if records:
        _write(out, sc.outputs.csv, csv_rows(records))
    print(f"demo {name}: {'reproduced' if reproduced else 'NOT reproduced'}")
    return EXIT_OK if reproduced else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nosig", description="No-signaling tests for quantum dynamics.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("name", nargs="?", help="demo name (demo command only)")
    p.add_argument("--scenario", type=Path)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    return p


def _load_scenario(args) -> object:
    if args.scenario is None:
        if args.command != "demo" or args.name is None:
            raise InputError("--scenario is required (or a demo name for the demo command)")
        seed = demos.DEMO_SEED if args.seed is None else args.seed
        return DemoScenario(formatVersion=1, command="demo", seed=seed, inputs=DemoInputs(name=args.name))
    if args.name is not None:
        raise InputError("give either a demo name or --scenario, not both")
    try:
        text = args.scenario.read_text()
    except OSError as exc:
        raise InputError(f"cannot read scenario: {exc}") from exc
    sc = TypeAdapter(Scenario).validate_json(text)
    if sc.command != args.command:
        raise InputError(f"scenario is for '{sc.command}', not '{args.command}'")
    if args.seed is not None:
        sc = sc.model_copy(update={"seed": args.seed})
    return sc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.shots is not None and args.shots < 0:
        print("error: --shots must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        sc = _load_scenario(args)
        if isinstance(sc, SteerScenario):
            return run_steer(sc, args.out)
        if isinstance(sc, ChannelCheckScenario):
            return run_channel_check(sc, args.out)
        if isinstance(sc, SignalTestScenario):
            return run_signal_test(sc, args.out, args.shots)
        return run_demo(sc, args.out, args.shots)
    except (InputError, ValidationError, NosigError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
