"""Offline drivers: threshold search, LP rounding, routing, related machines.

The configuration driver binary-searches the smallest tau with a feasible
LP, rounds the fractional solution by one independent categorical draw per
request, and reports the expected loads of the rounded assignment. An
infeasible LP at tau certifies E[OPT] > tau / 2, which the report carries as
a lower bound.
"""

from __future__ import annotations

from .distributions import check_tau
from .instances import (
    related_to_unrelated,
    smooth_machines,
    unrelated_to_config,
)
from .lp import (
    Infeasible,
    NoFeasibleTau,
    solve_lpc,
    solve_lpp_column_generation,
    min_feasible_tau,
)


class OfflineReport:
    """Outcome of an offline run: threshold, LP status, the rounded
    assignment, and the expected loads recomputed from that assignment."""

    __slots__ = (
        "tau",
        "lp_status",
        "assignment",
        "truncated_loads",
        "exceptional_total",
        "opt_lower_bound",
    )

    def __init__(self, tau, lp_status, assignment, truncated_loads, exceptional_total, opt_lower_bound):
        self.tau = tau
        self.lp_status = lp_status
        self.assignment = assignment
        self.truncated_loads = truncated_loads
        self.exceptional_total = exceptional_total
        self.opt_lower_bound = opt_lower_bound

    def as_dict(self):
        return {
            "tau": self.tau,
            "lp_status": self.lp_status,
            "assignment": {str(k): _choice_repr(v) for k, v in self.assignment.items()},
            "truncated_loads": list(self.truncated_loads),
            "exceptional_total": self.exceptional_total,
            "opt_lower_bound": self.opt_lower_bound,
        }


def _choice_repr(choice):
    if isinstance(choice, tuple):
        return list(choice)
    return choice


def randomized_round(sol, rng):
    """Independent categorical draw per request with the LP weights."""
    assignment = {}
    for j, entries in sorted(sol.items()):
        total = sum(w for _, w in entries)
        if total <= 0:
            raise ValueError(f"request {j}: fractional weights sum to {total}")
        u = rng.random() * total
        acc = 0.0
        choice = entries[-1][0]
        for c, w in entries:
            acc += w
            if u < acc:
                choice = c
                break
        assignment[j] = choice
    return assignment


def assignment_loads(inst, assignment, tau):
    """Expected truncated load per resource and total expected exceptional
    load of a fixed assignment."""
    check_tau(tau)
    loads = [0.0] * inst.m
    exc = 0.0
    for j, req in enumerate(inst.requests):
        config = req.configs[assignment[j]]
        for i in range(inst.m):
            loads[i] += float(config.expected_truncated(i, tau))
        exc += float(config.expected_max_exceptional(tau))
    return loads, exc


def offline_config_balancing(inst, rng, eps=1e-3, tau=None):
    """Algorithm: binary-search tau*, solve LP_C, round independently.

    With an explicit tau the search is skipped (used by the related-machines
    wrapper, which fixes the threshold externally).
    """
    if tau is None:
        tau = min_feasible_tau(inst, eps=eps)
    if tau <= 0:
        # every request has a zero-cost configuration
        assignment = {
            j: min(range(len(r.configs)), key=lambda c: float(r.configs[c].expected_max()))
            for j, r in enumerate(inst.requests)
        }
        return OfflineReport(0.0, "trivial", assignment, [0.0] * inst.m, 0.0, 0.0)
    sol = solve_lpc(inst, tau)
    if isinstance(sol, Infeasible):
        # infeasibility at tau certifies E[OPT] > tau/2
        return OfflineReport(tau, "infeasible", {}, [], 0.0, tau / 2.0)
    assignment = randomized_round(sol, rng)
    loads, exc = assignment_loads(inst, assignment, tau)
    # the largest tau proven infeasible during the search certifies a lower
    # bound of tau*(1-eps)/2 on E[OPT]; report the conservative form
    lower = tau * (1.0 - eps) / 2.0
    return OfflineReport(tau, "feasible", assignment, loads, exc, lower)


def min_feasible_tau_routing(r, eps=1e-3):
    """Binary search over column-generation feasibility of the path LP."""
    from .graphs import widest_path_value

    hi = 0.0
    for source, sink, law in r.requests:
        width = widest_path_value(r.vertices, r.edges, range(r.m), source, sink)
        hi += float(law.mean()) / width
    if hi <= 0:
        return 0.0
    if isinstance(solve_lpp_column_generation(r, hi), Infeasible):
        raise NoFeasibleTau(f"path LP infeasible at hi={hi}")
    lo = 0.0
    while hi - lo > eps * hi:
        mid = 0.5 * (lo + hi)
        if isinstance(solve_lpp_column_generation(r, mid), Infeasible):
            lo = mid
        else:
            hi = mid
    return hi


def routing_assignment_loads(r, assignment, tau):
    """Per-edge expected truncated load and total expected exceptional load
    of fixed paths."""
    loads = [0.0] * r.m
    exc = 0.0
    for j, path in assignment.items():
        law = r.requests[j][2]
        c_min = min(float(r.edges[e][2]) for e in path)
        exc += float(law.scale(1.0 / c_min).exceptional_mean(tau))
        for e in path:
            cap = float(r.edges[e][2])
            loads[e] += float(law.scale(1.0 / cap).truncated_mean(tau))
    return loads, exc


def offline_routing(r, rng, eps=1e-3, tau=None):
    """Offline routing: tau search via column generation, then independent
    rounding of the path weights."""
    if tau is None:
        tau = min_feasible_tau_routing(r, eps=eps)
    if tau <= 0:
        raise ValueError("degenerate routing instance with zero demand")
    sol = solve_lpp_column_generation(r, tau)
    if isinstance(sol, Infeasible):
        return OfflineReport(tau, "infeasible", {}, [], 0.0, tau / 2.0)
    assignment = randomized_round(sol, rng)
    loads, exc = routing_assignment_loads(r, assignment, tau)
    return OfflineReport(tau, "feasible", assignment, loads, exc, tau * (1.0 - eps) / 2.0)


class GroupListSchedulePolicy:
    """Adaptive policy for related machines: the non-adaptive assignment
    fixes a group per job; execution sends each job to the group machine
    with the least realized truncated load (lowest id on ties).

    Comparing truncated loads (values at or above tau do not count) is what
    makes the per-trace averaging bound hold: the chosen machine's truncated
    load is at most the group average before the job lands. Machine ids are
    indices into the smoothed instance attached as .instance.
    """

    def __init__(self, instance, group_machines, group_of_job, tau):
        self.instance = instance
        self.group_machines = [tuple(ids) for ids in group_machines]
        self.group_of_job = dict(group_of_job)
        self.tau = float(tau)

    def run(self, inst, realize):
        """Execute on a related instance; realize(j, law) -> realized size
        X_j. Returns [(job, machine, realized size)] in arrival order."""
        trunc = [0.0] * inst.m
        trace = []
        for j in range(inst.n):
            ids = self.group_machines[self.group_of_job[j]]
            machine = min(ids, key=lambda i: (trunc[i], i))
            value = float(realize(j, inst.jobs[j]))
            scaled = value / float(inst.speeds[machine])
            if scaled < self.tau:
                trunc[machine] += scaled
            trace.append((j, machine, value))
        return trace


def offline_related(r, rng, eps=1e-3):
    """Offline related machines: smooth, reduce, run the configuration
    driver for a job-to-machine map, then list-schedule adaptively inside
    the assigned machine's speed group. Returns (policy, report); the policy
    executes on the smoothed instance (policy.instance)."""
    smoothed, surviving = smooth_machines(r)
    reduced = unrelated_to_config(related_to_unrelated(surviving))
    report = offline_config_balancing(reduced, rng, eps=eps)
    if report.lp_status != "feasible":
        return None, report
    # the surviving instance lists machines in ascending original id order
    original_ids = sorted(i for _, _, ids in smoothed for i in ids)
    machine_index = {i: pos for pos, i in enumerate(original_ids)}
    group_machines = [
        sorted(machine_index[i] for i in ids) for _, _, ids in smoothed.groups
    ]
    group_of_machine = {}
    for g, ids in enumerate(group_machines):
        for i in ids:
            group_of_machine[i] = g
    group_of_job = {j: group_of_machine[c] for j, c in report.assignment.items()}
    policy = GroupListSchedulePolicy(
        surviving, group_machines, group_of_job, max(report.tau, 1e-12)
    )
    return policy, report
