"""Command-line interface: instance generation, smoothing, offline/online
runs, the exact oracle, LP checks, expected-max estimation, and simulation.

All configuration comes through flags; no environment variables are read.
Exit codes: 0 success, 2 for Infeasible/Fail verdicts (the report carries
the certificate), 1 for errors. Reports are plain text or CSV written with
repr-formatted numbers, so a fixed seed reproduces files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .distributions import ValidationError
from .instance_io import ParseError, read_instance, write_instance
from .instances import (
    ConfigInstance,
    RelatedInstance,
    RoutingInstance,
    UnrelatedInstance,
    gen_adaptivity_gap_instance,
    gen_clairvoyance_adversary_instance,
    random_tiny_instance,
    smooth_machines,
)
from .lp import Infeasible, solve_lpc, solve_lpp_column_generation
from .offline import offline_config_balancing, offline_related, offline_routing
from .online import (
    nonclairvoyant_sqrt_list,
    run_online_config,
    run_online_related,
    run_online_routing,
)
from .oracle import (
    AdaptiveOracle,
    evaluate_policy,
    non_adaptive_policy,
    restart_policy,
)
from .simulate import (
    NonAdaptiveAssignment,
    estimate_expected_max,
    expmax_regime,
    request_stream,
    simulate_policy,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT = 2


class ExperimentSpec:
    """What to run: instance source, algorithm id, thresholds, trials, seed,
    and where the report goes."""

    def __init__(self, instance_path, algorithm, tau=None, trials=1000, seed=0, out=None):
        self.instance_path = instance_path
        self.algorithm = algorithm
        self.tau = tau
        self.trials = trials
        self.seed = seed
        self.out = out


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def write_report(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def report_lines(title, pairs):
    lines = [f"# {title}"]
    for key, value in pairs:
        lines.append(f"{key}: {_fmt(value)}")
    return lines


def simulation_csv(report):
    header = "trials,seed,mean_makespan,stderr,mean_exceptional," + ",".join(
        f"load_{i}" for i in range(len(report.resource_means))
    )
    row = ",".join(
        [
            str(report.trials),
            str(report.seed),
            repr(report.mean_makespan),
            repr(report.stderr),
            repr(report.mean_exceptional),
        ]
        + [repr(v) for v in report.resource_means]
    )
    return header + "\n" + row + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    if args.kind == "gap":
        inst = gen_adaptivity_gap_instance(args.m, Fraction(args.tau) if args.tau else 2)
    elif args.kind == "adversary":
        inst = gen_clairvoyance_adversary_instance(args.m)
    elif args.kind in ("config", "unrelated", "related"):
        rng = request_stream(args.seed, 0)
        inst = random_tiny_instance(
            args.kind, rng, n_max=min(args.n, 4), m_max=min(args.m, 3)
        )
    else:
        raise ValidationError(f"unknown generator kind {args.kind!r}")
    write_instance(inst, args.out)
    print(f"wrote {args.kind} instance to {args.out}")
    return EXIT_OK


def cmd_smooth(args):
    inst = read_instance(getattr(args, "in"))
    if not isinstance(inst, RelatedInstance):
        raise ValidationError("smooth expects a related instance")
    groups, smoothed = smooth_machines(inst)
    write_instance(smoothed, args.out)
    for speed, count, ids in groups:
        print(f"group speed={_fmt(speed)} machines={count} ids={list(ids)}")
    return EXIT_OK


def _as_config_instance(inst):
    from .instances import related_to_unrelated, unrelated_to_config

    if isinstance(inst, RelatedInstance):
        inst = related_to_unrelated(inst)
    if isinstance(inst, UnrelatedInstance):
        inst = unrelated_to_config(inst)
    return inst


def cmd_offline(args):
    inst = read_instance(getattr(args, "in"))
    rng = request_stream(args.seed, 0)
    if args.algo == "routing":
        if not isinstance(inst, RoutingInstance):
            raise ValidationError("offline routing expects a routing instance")
        report = offline_routing(inst, rng)
    elif args.algo == "related":
        if not isinstance(inst, RelatedInstance):
            raise ValidationError("offline related expects a related instance")
        _, report = offline_related(inst, rng)
    else:
        report = offline_config_balancing(_as_config_instance(inst), rng)
    pairs = [
        ("algorithm", args.algo),
        ("seed", args.seed),
        ("tau", report.tau),
        ("lp_status", report.lp_status),
        ("opt_lower_bound", report.opt_lower_bound),
        ("exceptional_total", report.exceptional_total),
    ]
    for j, choice in sorted(report.assignment.items()):
        pairs.append((f"choice_{j}", choice))
    for i, load in enumerate(report.truncated_loads):
        pairs.append((f"truncated_load_{i}", load))
    write_report(report_lines("offline report", pairs), args.report)
    return EXIT_OK if report.lp_status == "feasible" else EXIT_VERDICT


def cmd_online(args):
    inst = read_instance(getattr(args, "in"))
    if args.algo == "routing":
        if not isinstance(inst, RoutingInstance):
            raise ValidationError("online routing expects a routing instance")
        run = run_online_routing(inst)
    elif args.algo == "related":
        if not isinstance(inst, RelatedInstance):
            raise ValidationError("online related expects a related instance")
        rng = request_stream(args.seed, 0)
        realized = [law.sample(rng) for law in inst.jobs]
        run, _ = run_online_related(inst, lambda j, law: realized[j])
    elif args.algo == "sqrt-baseline":
        if not isinstance(inst, RelatedInstance):
            raise ValidationError("sqrt-baseline expects a related instance")
        rng = request_stream(args.seed, 0)
        realized = [law.sample(rng) for law in inst.jobs]
        trace, sched = nonclairvoyant_sqrt_list(inst, lambda j, i: realized[j])
        pairs = [("algorithm", args.algo), ("seed", args.seed), ("makespan", float(sched.makespan()))]
        for j, i, size in trace:
            pairs.append((f"job_{j}", f"machine={i} size={_fmt(size)}"))
        write_report(report_lines("online report", pairs), args.report)
        return EXIT_OK
    else:
        run = run_online_config(_as_config_instance(inst))
    pairs = [
        ("algorithm", args.algo),
        ("seed", args.seed),
        ("final_lambda", run.final_lambda),
        ("phases", run.phases),
    ]
    for rec in run.records:
        if isinstance(rec.proxy, dict):
            proxy = "{" + ", ".join(f"{k}: {_fmt(v)}" for k, v in sorted(rec.proxy.items())) + "}"
        else:
            proxy = "(" + ", ".join(_fmt(v) for v in rec.proxy) + ")"
        pairs.append(
            (
                f"request_{rec.request}",
                f"phase={rec.phase} lambda={_fmt(rec.lam)} choice={rec.choice} "
                f"proxy={proxy} dphi={_fmt(rec.dphi)}",
            )
        )
    write_report(report_lines("online report", pairs), args.report)
    return EXIT_OK


def cmd_oracle(args):
    inst = read_instance(getattr(args, "in"))
    tau = Fraction(args.tau) if args.tau else None
    if args.what == "opt":
        oracle = AdaptiveOracle(inst)
        value = oracle.value()
        pairs = [("expected_makespan", value)]
        if tau:
            pv = evaluate_policy(inst, oracle.policy(), tau)
            pairs.append(("exceptional_at_tau", pv.exceptional))
            pairs.append(("tau", tau))
        write_report(report_lines("oracle opt", pairs), args.report)
        return EXIT_OK
    if args.what == "restart":
        if not tau:
            raise ValidationError("restart needs --tau")
        _, value = restart_policy(inst, tau)
        write_report(
            report_lines(
                "oracle restart",
                [
                    ("tau", tau),
                    ("expected_makespan", value.makespan),
                    ("expected_exceptional", value.exceptional),
                ],
            ),
            args.report,
        )
        return EXIT_OK
    if args.what == "eval":
        if not (tau and args.policy_file):
            raise ValidationError("eval needs --tau and --policy-file")
        with open(args.policy_file, encoding="utf-8") as fh:
            doc = json.load(fh)
        assignment = {int(k): v for k, v in doc["choices"].items()}
        value = evaluate_policy(inst, non_adaptive_policy(assignment), tau)
        write_report(
            report_lines(
                "oracle eval",
                [
                    ("tau", tau),
                    ("expected_makespan", value.makespan),
                    ("expected_exceptional", value.exceptional),
                ],
            ),
            args.report,
        )
        return EXIT_OK
    raise ValidationError(f"unknown oracle mode {args.what!r}")


def cmd_lp_check(args):
    inst = read_instance(getattr(args, "in"))
    tau = float(Fraction(args.tau))
    if isinstance(inst, RoutingInstance):
        verdict = solve_lpp_column_generation(inst, tau)
        name = "LP_P"
    else:
        verdict = solve_lpc(_as_config_instance(inst), tau)
        name = "LP_C"
    if isinstance(verdict, Infeasible):
        print(f"{name} infeasible at tau={tau}: {verdict.reason}")
        print(f"certificate: E[OPT] > {tau / 2}")
        return EXIT_VERDICT
    print(f"{name} feasible at tau={tau}")
    return EXIT_OK


def cmd_expmax(args):
    spec, weights = expmax_regime(args.regime, args.m, args.tau)
    est, err = estimate_expected_max(spec, args.trials, args.seed, weights=weights)
    write_report(
        report_lines(
            "expected-max estimate",
            [
                ("regime", args.regime),
                ("m", args.m),
                ("tau", args.tau),
                ("trials", args.trials),
                ("seed", args.seed),
                ("estimate", est),
                ("stderr", err),
            ],
        ),
        args.report,
    )
    return EXIT_OK


def cmd_simulate(args):
    inst = read_instance(getattr(args, "in"))
    with open(args.policy_file, encoding="utf-8") as fh:
        doc = json.load(fh)
    choices = {}
    for k, v in doc["choices"].items():
        choices[int(k)] = tuple(v) if isinstance(v, list) else v
    policy = NonAdaptiveAssignment(choices)
    tau = float(Fraction(args.tau)) if args.tau else None
    report = simulate_policy(inst, policy, args.trials, args.seed, tau=tau)
    text = simulation_csv(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cfgbal",
        description="configuration balancing with stochastic requests",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--kind", required=True,
                   choices=["gap", "adversary", "config", "unrelated", "related"])
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--tau", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("smooth", help="machine smoothing for related instances")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("offline", help="offline algorithms")
    p.add_argument("--in", required=True)
    p.add_argument("--algo", required=True, choices=["config", "routing", "related"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_offline)

    p = sub.add_parser("online", help="online algorithms")
    p.add_argument("--in", required=True)
    p.add_argument("--algo", required=True,
                   choices=["config", "related", "routing", "sqrt-baseline"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_online)

    p = sub.add_parser("oracle", help="exact adaptive oracle")
    p.add_argument("--in", required=True)
    p.add_argument("--tau", default=None)
    p.add_argument("--what", required=True, choices=["opt", "restart", "eval"])
    p.add_argument("--policy-file", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("lp-check", help="LP feasibility at a threshold")
    p.add_argument("--in", required=True)
    p.add_argument("--tau", required=True)
    p.set_defaults(func=cmd_lp_check)

    p = sub.add_parser("expmax", help="expected-maximum estimation")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--regime", required=True, choices=["sqrtlog", "logm", "geo"])
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_expmax)

    p = sub.add_parser("simulate", help="Monte-Carlo policy simulation")
    p.add_argument("--in", required=True)
    p.add_argument("--policy-file", required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_simulate)

    return parser


def run_experiment(spec):
    """Programmatic entry mirroring the offline subcommand; returns the
    exit code after writing the report."""
    args = argparse.Namespace(
        **{
            "in": spec.instance_path,
            "algo": spec.algorithm,
            "seed": spec.seed,
            "report": spec.out,
        }
    )
    return cmd_offline(args)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; 2 is reserved for
        # Infeasible/Fail verdicts here
        return 0 if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (ValidationError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
