"""Command line front end.

Four subcommands: exact (coefficient table and moments of the query-count
distribution, optionally evaluated at a point), simulate (config-driven
Monte Carlo batch with JSON report and per-trial CSV), verify (empirical
checks of the package's headline claims, one PASS/FAIL line each) and serve
(the annotation session HTTP service).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .harness import (
    ExperimentConfig,
    ValidationReport,
    exhaustive_distribution,
    exhaustive_mean,
    optimal_average_game_tree,
    run_experiment,
    validate_asymptotics,
    validate_closed_forms,
    validate_insertion_mean,
    validate_random_mean,
    validate_two_class_productive,
)
from .qmath import complexity_polynomial, exact_moments, pgf_closed_form_1, pgf_closed_form_2


def _cmd_exact(args) -> int:
    poly = complexity_polynomial(args.n)
    mean, variance = exact_moments(args.n) if args.n >= 1 else (Fraction(0), Fraction(0))
    rows: list[tuple[str, object]] = [
        (f"a_{power}", count) for power, count in sorted(poly.coeffs.items())
    ]
    rows.append(("mean", float(mean)))
    rows.append(("variance", float(variance)))
    if args.q is not None:
        rows.append((f"pgf_q={args.q:g}", float(poly.pgf(args.q))))
        rows.append((f"closed_form_1_q={args.q:g}", pgf_closed_form_1(args.n, args.q)))
        rows.append((f"closed_form_2_q={args.q:g}", pgf_closed_form_2(args.n, args.q)))
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["key", "value"])
        writer.writerows(rows)
    else:
        payload = {
            "n": args.n,
            "coefficients": {str(p): c for p, c in sorted(poly.coeffs.items())},
            "mean": float(mean),
            "mean_exact": str(mean),
            "variance": float(variance),
            "variance_exact": str(variance),
        }
        if args.q is not None:
            payload["q"] = args.q
            payload["pgf"] = float(poly.pgf(args.q))
            payload["closed_form_1"] = pgf_closed_form_1(args.n, args.q)
            payload["closed_form_2"] = pgf_closed_form_2(args.n, args.q)
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_simulate(args) -> int:
    with open(args.config, encoding="utf-8") as f:
        config = ExperimentConfig.from_dict(json.load(f))
    report = run_experiment(config)
    text = report.to_json(include_counts=args.counts)
    print(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    if args.csv:
        report.write_csv(args.csv)
    return 0


def _theorem_one(seed: int) -> list[ValidationReport]:
    reports = []
    for n in (2, 3, 4):
        tree = optimal_average_game_tree(n)
        chordal = exhaustive_mean("clique", n, seed)
        reports.append(ValidationReport(
            name=f"optimal average equals chordal mean, n={n}",
            measured=float(tree),
            target=float(chordal),
            tolerance=0.0,
            passed=tree == chordal,
            details={"seed": seed, "exact": str(tree)},
        ))
    return reports


def _theorem_two(n: int, seed: int) -> list[ValidationReport]:
    poly = complexity_polynomial(n).coeffs
    hists = {
        "clique": exhaustive_distribution("clique", n, seed),
        "universal": exhaustive_distribution("universal", n, seed),
        f"chordal-any[{seed}]": exhaustive_distribution("chordal-any", n, seed),
        f"chordal-any[{seed + 1}]": exhaustive_distribution("chordal-any", n, seed + 1),
    }
    distinct = {json.dumps(h) for h in hists.values()} | {json.dumps(poly)}
    return [ValidationReport(
        name=f"identical exhaustive distributions, n={n}",
        measured=float(len(distinct)),
        target=1.0,
        tolerance=0.0,
        passed=len(distinct) == 1,
        details={"seed": seed, "histogram": poly},
    )]


def _cmd_verify(args) -> int:
    seed = args.seed
    if args.theorem == "1":
        reports = _theorem_one(seed)
    elif args.theorem == "2":
        reports = _theorem_two(min(args.n or 5, 6), seed)
    elif args.theorem == "3":
        reports = [validate_closed_forms(), validate_asymptotics(seed=seed)]
    elif args.theorem == "4":
        n = args.n or 10_000
        trials = args.trials or 200
        reports = [
            validate_insertion_mean((0.5, 0.3, 0.2), n, trials, seed),
            validate_insertion_mean((0.2,) * 5, n, trials, seed),
        ]
    elif args.theorem == "5":
        n = args.n or 10_000
        trials = args.trials or 200
        reports = [
            validate_random_mean((0.25,) * 4, n, trials, seed),
            validate_random_mean((0.5, 0.25, 0.25), n, trials, seed),
        ]
    else:  # p2
        trials = args.trials or 100_000
        reports = [
            validate_two_class_productive(args.strategy, n, trials, seed)
            for n in range(4, 11)
        ]
    for report in reports:
        print(report)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionService, create_app

    app = create_app(SessionService(args.data))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acluster",
        description="Active clustering by pairwise queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact query-count distribution for n items")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, default=None,
                   help="also evaluate the generating function at q")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("simulate", help="run a config-driven experiment batch")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--json", default=None, help="also write the report here")
    p.add_argument("--csv", default=None, help="write per-trial counts here")
    p.add_argument("--counts", action="store_true",
                   help="embed per-trial counts in the JSON report")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="check one of the validated claims")
    p.add_argument("--theorem", choices=("1", "2", "3", "4", "5", "p2"),
                   required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", default="chordal-any",
                   help="strategy for the p2 productive-query check")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("serve", help="run the annotation session service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", required=True, help="session log directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
