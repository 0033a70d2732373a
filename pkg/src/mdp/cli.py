"""Command-line interface.

    mdp run    --scenario FILE [--trace FILE] [--out FILE]
    mdp verify --scenario FILE [--deviation-grid LO..HI]
    mdp serve  --scenario FILE --port N [--host HOST] [--tick-rate HZ]
    mdp replay --trace FILE

Exit codes: 0 ok, 2 configuration / validation, 3 aborted round,
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, EncodingError
from .harness.encoding import decode_canonical, encode_canonical
from .harness.runner import run_scenario, verify_scenario
from .harness.scenario import Scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_MISMATCH = 4


def _load_scenario(path: str) -> Scenario:
    if not Path(path).exists():
        raise ConfigError("scenario file not found: %s" % path)
    return Scenario.load(path)


def cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario)
    result = run_scenario(scenario)
    record = {
        "session": scenario.session,
        "completed": result.completed,
        "ticks": result.ticks,
        "outcomes": result.outcomes,
        "ledger": result.ledger,
        "ledger_total": result.ledger_total,
        "violations": result.violations,
        "trace_hash": result.trace_hash(),
    }
    payload = encode_canonical(record) + b"\n"
    if args.out:
        Path(args.out).write_bytes(payload)
    sys.stdout.buffer.write(payload)
    if args.trace:
        Path(args.trace).write_bytes(encode_canonical(result.trace) + b"\n")
    if result.violations:
        return EXIT_MISMATCH
    done = result.done_outcomes()
    aborted = any(o["status"].startswith("aborted") for o in result.outcomes.values())
    if not result.completed or aborted or not done:
        return EXIT_ABORTED
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _load_scenario(args.scenario)
    lo, hi = _parse_grid(args.deviation_grid)
    report = verify_scenario(scenario, lo, hi)
    sys.stdout.buffer.write(encode_canonical(report) + b"\n")
    return EXIT_OK if report["ok"] else EXIT_MISMATCH


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise ConfigError("deviation grid must look like 0..20") from exc
    if lo > hi:
        raise ConfigError("empty deviation grid %s" % text)
    return lo, hi


def cmd_replay(args) -> int:
    raw = Path(args.trace).read_bytes()
    trace = decode_canonical(raw)
    if not isinstance(trace, list):
        raise ConfigError("trace file must hold a list of events")
    last = -1
    for event in trace:
        tick = int(event["tick"])
        if tick < last:
            raise ConfigError("trace ticks are not monotone at %r" % event)
        last = tick
        head = "%6d  %-18s" % (tick, event["kind"])
        rest = " ".join("%s=%s" % (k, v) for k, v in sorted(event.items())
                        if k not in ("tick", "kind"))
        print(head + rest)
    print("# %d events, final tick %d" % (len(trace), last))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway.app import create_app
    from .gateway.driver import SessionDriver

    scenario = _load_scenario(args.scenario)
    scenario.validate(allow_interactive=True)
    driver = SessionDriver(scenario, tick_rate=args.tick_rate)
    app = create_app(driver)
    driver.start_background()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        driver.stop_background()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdp",
        description="Distributed mechanism design platform: run, verify and "
                    "serve auction/decision sessions on a simulated network.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario to quiescence")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--trace", help="write the full event trace here")
    p_run.add_argument("--out", help="also write the outcome record here")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser(
        "verify",
        help="run the stack AND the brute-force oracle; exact-compare "
             "(caps: matching n<=6, single-minded n<=12)")
    p_verify.add_argument("--scenario", required=True)
    p_verify.add_argument("--deviation-grid", default="0..20",
                          help="integer grid LO..HI for strategy-proof checks")
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", help="serve the gateway API for a session")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--tick-rate", type=float, default=200.0,
                         help="simulation ticks per wall-clock second")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="pretty-print a recorded trace")
    p_replay.add_argument("--trace", required=True)
    p_replay.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EncodingError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
