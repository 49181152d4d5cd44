"""Command line front end.

Four subcommands: `gen` writes a single seeded instance to JSON, `run`
corrects every instance of a config grid and stores the reports, `verify`
sweeps the property suites, and `report` renders stored reports to CSV and
an optional scatter plot.  The exit code is nonzero exactly when some
instance failed or some assertion suite did.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import FAMILIES, InstanceSpec, Report, run_experiment, verify_suite, write_csv, write_plot


def _common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--backend", choices=("exact", "float"), default="exact")
    parser.add_argument("--schedule", type=str, default=None,
                        help="comma separated ball radii, e.g. 8,4,2")
    parser.add_argument("--tol", type=float, default=None)


def _parse_schedule(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_gen(args) -> int:
    spec = InstanceSpec(family=args.family, d=args.d, n=args.n,
                        noise_rank=args.noise_rank, seed=args.seed,
                        backend=args.backend)
    t = spec.build()
    text = json.dumps({"spec": spec.to_json(), "tuple": t.to_json()}, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_run(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    if args.schedule:
        config["schedule"] = _parse_schedule(args.schedule)
    if args.tol is not None:
        config["tol"] = args.tol
    reports = run_experiment(config)
    for r in reports:
        s = r.spec
        if r.error is not None:
            print(f"{s.family} d={s.d} noise={s.noise_rank} seed={s.seed}  "
                  f"error: {r.error}")
        else:
            print(f"{s.family} d={s.d} noise={s.noise_rank} seed={s.seed}  "
                  f"defect={r.delta_in} distance={r.distance} "
                  f"coverage={r.coverage} failed={r.assertions_failed} "
                  f"({r.runtime_ms} ms)")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([r.to_json() for r in reports], fh, indent=2)
        print(f"wrote {args.out}")
    bad = sum(1 for r in reports if r.error is not None or r.assertions_failed)
    print(f"{len(reports)} instances, {bad} failing")
    return 1 if bad else 0


def cmd_verify(args) -> int:
    cfg = {"seed": args.seed}
    if args.counts:
        cfg["counts"] = json.loads(args.counts)
    out = verify_suite(cfg)
    for c in out["checks"]:
        extra = " ".join(f"{k}={v}" for k, v in c.items() if k not in ("name", "ok"))
        print(f"{c['name']}: {'ok' if c['ok'] else 'FAIL'}  {extra}")
    print("passed" if out["passed"] else "FAILED")
    return 0 if out["passed"] else 1


def cmd_report(args) -> int:
    with open(args.reports) as fh:
        reports = [Report.from_json(obj) for obj in json.load(fh)]
    write_csv(reports, args.csv, stable=args.stable)
    print(f"wrote {args.csv} ({len(reports)} rows)")
    if args.plot:
        write_plot(reports, args.plot)
        print(f"wrote {args.plot}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rankcorrect",
        description="correct almost commuting matrix tuples in the rank metric",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write one seeded instance as JSON")
    gen.add_argument("--family", choices=FAMILIES, default="commuting_plus_noise")
    gen.add_argument("--d", type=int, default=16)
    gen.add_argument("--n", type=int, default=2)
    gen.add_argument("--noise-rank", type=int, default=0, dest="noise_rank")
    gen.add_argument("--out", type=str, default=None)
    _common_flags(gen)
    gen.set_defaults(fn=cmd_gen)

    run = sub.add_parser("run", help="correct every instance of a config grid")
    run.add_argument("--config", required=True)
    run.add_argument("--out", type=str, default=None)
    _common_flags(run)
    run.set_defaults(fn=cmd_run)

    verify = sub.add_parser("verify", help="run the property suites")
    verify.add_argument("--counts", type=str, default=None,
                        help='JSON object of per-check trial counts')
    _common_flags(verify)
    verify.set_defaults(fn=cmd_verify)

    report = sub.add_parser("report", help="render stored reports")
    report.add_argument("--reports", required=True)
    report.add_argument("--csv", required=True)
    report.add_argument("--plot", type=str, default=None)
    report.add_argument("--stable", action="store_true",
                        help="zero the timing column for byte-stable output")
    _common_flags(report)
    report.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
