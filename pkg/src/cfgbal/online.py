"""Online algorithms built around the exponential potential function.

The potential of a load vector L (entry 0 is the virtual exceptional
resource) at threshold tau is sum_i (3/2)^(L_i / tau). Each arriving request
commits the configuration minimizing the potential increase of its
deterministic proxy vector; a commitment that would push any entry past
ell * tau (ell = log_{3/2}(2m + 2)) is refused, certifying E[OPT] > lambda.
The guess-and-double wrapper turns that certificate into a parameter-free
algorithm. Proxy loads are expectations; realized loads never enter the
potential.
"""

from __future__ import annotations

import math

from .distributions import check_tau
from .graphs import lex_shortest_path, path_key
from .instances import smooth_machines


def potential(loads, tau):
    """sum_i (3/2)^(L_i / tau)."""
    check_tau(tau)
    t = float(tau)
    return sum(1.5 ** (float(L) / t) for L in loads)


class PotentialState:
    """Load vector (virtual resource first), threshold tau = 2 lambda, and
    the per-entry capacity bound ell = log_{3/2}(2m + 2)."""

    __slots__ = ("loads", "tau", "ell")

    def __init__(self, loads, tau, ell):
        self.loads = list(loads)
        self.tau = tau
        self.ell = ell

    @classmethod
    def fresh(cls, m, lam):
        tau = 2.0 * float(lam)
        check_tau(tau)
        ell = math.log(2 * m + 2) / math.log(1.5)
        return cls([0.0] * (m + 1), tau, ell)

    @property
    def m(self):
        return len(self.loads) - 1

    def phi(self):
        return potential(self.loads, self.tau)

    def copy(self):
        return PotentialState(self.loads, self.tau, self.ell)


def delta_phi(loads, tau, proxy):
    """Potential increase from adding the proxy vector to the loads."""
    t = float(tau)
    inc = 0.0
    for L, x in zip(loads, proxy):
        if x:
            inc += 1.5 ** ((L + x) / t) - 1.5 ** (L / t)
    return inc


def argmin_step(state, proxies):
    """Pick the proxy minimizing delta-phi (ties to the lowest index) and
    commit it unless some entry would exceed ell * tau.

    Returns (index, dphi, new_state) or None as the Fail verdict.
    """
    best = None
    for idx, proxy in enumerate(proxies):
        d = delta_phi(state.loads, state.tau, proxy)
        if best is None or d < best[1]:
            best = (idx, d)
    idx, d = best
    proxy = proxies[idx]
    cap = state.ell * state.tau
    for L, x in zip(state.loads, proxy):
        if L + x > cap:
            return None
    new = state.copy()
    new.loads = [L + x for L, x in zip(new.loads, proxy)]
    return idx, d, new


def request_proxies(request, tau):
    """Deterministic proxy vectors (x_0, x_1, ..., x_m) of a request's
    configurations at threshold tau."""
    return [
        tuple(float(v) for v in config.proxy_vector(tau))
        for config in request.configs
    ]


def online_step(state, request):
    """One step of online configuration balancing; None means Fail
    (certifying E[OPT] > lambda = tau / 2)."""
    return argmin_step(state, request_proxies(request, state.tau))


class TraceRecord:
    __slots__ = ("request", "phase", "lam", "choice", "proxy", "dphi")

    def __init__(self, request, phase, lam, choice, proxy, dphi):
        self.request = request
        self.phase = phase
        self.lam = lam
        self.choice = choice
        self.proxy = proxy
        self.dphi = dphi

    def as_dict(self):
        return {
            "request": self.request,
            "phase": self.phase,
            "lambda": self.lam,
            "choice": self.choice,
            "proxy": list(self.proxy),
            "dphi": self.dphi,
        }


class OnlineRun:
    __slots__ = ("records", "state", "final_lambda", "phases")

    def __init__(self, records, state, final_lambda, phases):
        self.records = records
        self.state = state
        self.final_lambda = final_lambda
        self.phases = phases

    def assignment(self):
        return {rec.request: rec.choice for rec in self.records}


def guess_and_double(stream, inner, lam0=None):
    """Doubling wrapper: run the inner algorithm at guess lambda; on Fail,
    double lambda, reset the load vector (committed choices stand) and
    re-offer the failing request. The initial guess is the cheapest expected
    cost any policy could pay for the first request; a zero guess is bumped
    to the first positive cost in the stream (a Fail at lambda = 0 would
    otherwise never escape the doubling)."""
    stream = list(stream)
    if not stream:
        raise ValueError("empty request stream")
    lam = float(lam0) if lam0 is not None else inner.min_expected_cost(stream[0])
    if lam <= 0:
        lam = inner.first_positive_cost(stream)
    state = inner.fresh_state(lam)
    records = []
    phase = 0
    idx = 0
    while idx < len(stream):
        request = stream[idx]
        step = inner.step(state, request)
        if step is None:
            lam = 2.0 * lam
            phase += 1
            state = inner.fresh_state(lam)
            continue
        choice, proxy, dphi, state = step
        records.append(
            TraceRecord(inner.request_id(request, idx), phase, lam, choice, proxy, dphi)
        )
        idx += 1
    return OnlineRun(records, state, lam, phase + 1)


class ConfigBalancer:
    """Inner algorithm for online configuration balancing (explicit
    configurations)."""

    def __init__(self, m):
        self.m = m

    def fresh_state(self, lam):
        return PotentialState.fresh(self.m, lam)

    def min_expected_cost(self, request):
        return min(float(c.expected_max()) for c in request.configs)

    def first_positive_cost(self, stream):
        for request in stream:
            v = self.min_expected_cost(request)
            if v > 0:
                return v
        return 1.0

    def request_id(self, request, idx):
        return request.id

    def step(self, state, request):
        proxies = request_proxies(request, state.tau)
        result = argmin_step(state, proxies)
        if result is None:
            return None
        idx, dphi, new_state = result
        return idx, proxies[idx], dphi, new_state


def run_online_config(inst, lam0=None):
    """Online configuration balancing with guess-and-double; the produced
    assignment is non-adaptive (proxies are expectations)."""
    return guess_and_double(inst.requests, ConfigBalancer(inst.m), lam0=lam0)


# ---------------------------------------------------------------------------
# related machines


def related_group_proxies(groups, law, tau):
    """Proxy vectors of the group configurations: choosing group c puts the
    job's exceptional part (at speed s_c) on the virtual resource and
    1/m_c of its truncated part on resource c."""
    proxies = []
    m_prime = len(groups)
    for c, (speed, count, _) in enumerate(groups):
        scaled = law.scale(1.0 / float(speed))
        x = [0.0] * (m_prime + 1)
        x[0] = float(scaled.exceptional_mean(tau))
        x[c + 1] = float(scaled.truncated_mean(tau)) / count
        proxies.append(tuple(x))
    return proxies


def online_related_step(groups, state, law, machine_loads):
    """Pick a group through the potential and then the least-loaded machine
    of that group (by realized truncated load, lowest id on ties).

    machine_loads maps original machine id -> current realized truncated
    load. Returns (machine id, group index, new state) or None on Fail.
    """
    result = argmin_step(state, related_group_proxies(groups, law, state.tau))
    if result is None:
        return None
    group_idx, dphi, new_state = result
    _, _, ids = groups.groups[group_idx]
    machine = min(ids, key=lambda i: (machine_loads.get(i, 0.0), i))
    return machine, group_idx, dphi, new_state


class RelatedBalancer:
    """Inner algorithm for online related-machine load balancing: group
    choice via the potential over m' + 1 resources, list scheduling inside
    the chosen group.

    List scheduling compares realized truncated loads at the current
    threshold (values at or above tau stay out of the comparison, mirroring
    the averaging argument that bounds per-machine truncated load)."""

    def __init__(self, related, realize):
        from .instances import SmoothedGroups

        self.groups, self.smoothed = smooth_machines(related)
        # re-key group machine ids into the smoothed instance's index space
        original_ids = sorted(i for _, _, ids in self.groups for i in ids)
        machine_index = {i: pos for pos, i in enumerate(original_ids)}
        self.exec_groups = SmoothedGroups(
            [
                (s, c, tuple(sorted(machine_index[i] for i in ids)))
                for s, c, ids in self.groups
            ]
        )
        self.realize = realize
        self.history = []  # (machine id, realized scaled size)
        self.speed_of = {}
        for speed, _, ids in self.exec_groups:
            for i in ids:
                self.speed_of[i] = float(speed)
        self.assignments = []

    def fresh_state(self, lam):
        return PotentialState.fresh(len(self.groups), lam)

    def min_expected_cost(self, job):
        fastest = max(float(s) for s, _, _ in self.groups)
        return float(job.mean()) / fastest

    def first_positive_cost(self, stream):
        for job in stream:
            v = self.min_expected_cost(job)
            if v > 0:
                return v
        return 1.0

    def request_id(self, job, idx):
        return idx

    def truncated_loads(self, tau):
        loads = {}
        for machine, scaled in self.history:
            if scaled < tau:
                loads[machine] = loads.get(machine, 0.0) + scaled
        return loads

    def step(self, state, job):
        result = online_related_step(
            self.exec_groups, state, job, self.truncated_loads(state.tau)
        )
        if result is None:
            return None
        machine, group_idx, dphi, new_state = result
        proxy = related_group_proxies(self.exec_groups, job, state.tau)[group_idx]
        job_index = len(self.assignments)
        value = float(self.realize(job_index, job))
        scaled = value / self.speed_of[machine]
        self.history.append((machine, scaled))
        self.assignments.append((job_index, machine, value))
        return machine, proxy, dphi, new_state


def run_online_related(related, realize, lam0=None):
    """Online related-machines balancing over the job list; realize(j) gives
    job j's realized size once it is committed."""
    inner = RelatedBalancer(related, realize)
    run = guess_and_double(list(related.jobs), inner, lam0=lam0)
    return run, inner


# ---------------------------------------------------------------------------
# routing


def route_candidates(r, state, j, tau):
    """Candidate paths of the online routing step: for each admissible
    bottleneck guess, the lex-shortest path under the potential's truncated
    edge weights."""
    source, sink, law = r.requests[j]
    mean = float(law.mean())
    edge_ids = tuple(
        e for e, (_, _, cap) in enumerate(r.edges) if mean / float(cap) <= float(tau)
    )
    t = float(tau)
    trunc = {}
    weights = {}
    for e in edge_ids:
        cap = float(r.edges[e][2])
        xt = float(law.scale(1.0 / cap).truncated_mean(tau))
        trunc[e] = xt
        L = state.loads[e + 1]
        weights[e] = 1.5 ** ((L + xt) / t) - 1.5 ** (L / t)
    candidates = []
    seen_caps = set()
    for ebar in edge_ids:
        cap = float(r.edges[ebar][2])
        if cap in seen_caps:
            continue
        seen_caps.add(cap)
        sub = tuple(e for e in edge_ids if float(r.edges[e][2]) >= cap)
        path = lex_shortest_path(r.vertices, r.edges, sub, weights, source, sink)
        if path is not None:
            candidates.append(path)
    return candidates, trunc, weights


def path_delta_phi(r, state, law, tau, path, trunc, weights):
    """Exact potential increase of routing along path: exceptional part at
    the bottleneck edge plus the per-edge truncated terms."""
    t = float(tau)
    c_min = min(float(r.edges[e][2]) for e in path)
    exc = float(law.scale(1.0 / c_min).exceptional_mean(tau))
    L0 = state.loads[0]
    d = 1.5 ** ((L0 + exc) / t) - 1.5 ** (L0 / t)
    d += sum(weights[e] for e in path)
    return d, exc


def online_route_step(r, state, j):
    """Choose the admissible path minimizing the potential increase; ties go
    to the canonically smallest path. None (Fail) when no admissible path
    exists or the chosen path breaches the ell*tau cap."""
    source, sink, law = r.requests[j]
    tau = state.tau
    candidates, trunc, weights = route_candidates(r, state, j, tau)
    if not candidates:
        return None
    best = None
    for path in candidates:
        d, exc = path_delta_phi(r, state, law, tau, path, trunc, weights)
        key = (d, path_key(r.edges, path))
        if best is None or key < best[0]:
            best = (key, path, d, exc)
    _, path, dphi, exc = best
    cap = state.ell * state.tau
    if state.loads[0] + exc > cap:
        return None
    for e in path:
        if state.loads[e + 1] + trunc[e] > cap:
            return None
    new = state.copy()
    new.loads[0] += exc
    for e in path:
        new.loads[e + 1] += trunc[e]
    return path, dphi, new


class RouteBalancer:
    """Inner algorithm for online virtual circuit routing."""

    def __init__(self, r):
        self.r = r
        self.counter = 0

    def fresh_state(self, lam):
        return PotentialState.fresh(self.r.m, lam)

    def min_expected_cost(self, j):
        from .graphs import widest_path_value

        source, sink, law = self.r.requests[j]
        width = widest_path_value(
            self.r.vertices, self.r.edges, range(self.r.m), source, sink
        )
        return float(law.mean()) / width

    def first_positive_cost(self, stream):
        for j in stream:
            v = self.min_expected_cost(j)
            if v > 0:
                return v
        return 1.0

    def request_id(self, j, idx):
        return j

    def step(self, state, j):
        result = online_route_step(self.r, state, j)
        if result is None:
            return None
        path, dphi, new_state = result
        proxy = {0: new_state.loads[0] - state.loads[0]}
        for e in path:
            proxy[e + 1] = new_state.loads[e + 1] - state.loads[e + 1]
        return path, proxy, dphi, new_state


def run_online_routing(r, lam0=None):
    """Online routing over requests in arrival order; choices are paths as
    edge-index tuples."""
    return guess_and_double(range(r.n), RouteBalancer(r), lam0=lam0)


# ---------------------------------------------------------------------------
# nonclairvoyant baseline


class SqrtListScheduler:
    """List scheduling restricted to machines within 1/sqrt(m) of the top
    speed; sizes are revealed only after each placement."""

    def __init__(self, speeds):
        self.speeds = list(speeds)
        m = len(self.speeds)
        s_max = max(self.speeds)
        threshold = s_max / math.isqrt(m) if math.isqrt(m) ** 2 == m else s_max / math.sqrt(m)
        self.fast = [i for i, s in enumerate(self.speeds) if s >= threshold]
        self.loads = {i: 0 * self.speeds[i] for i in self.fast}

    def choose(self):
        return min(self.fast, key=lambda i: (self.loads[i], i))

    def observe(self, machine, size):
        self.loads[machine] += size / self.speeds[machine]

    def makespan(self):
        return max(self.loads.values())


def nonclairvoyant_sqrt_list(related, reveal):
    """Run the sqrt(m) baseline over the job list; reveal(j, machine) returns
    the realized size after placement (the adversary's hook). Returns the
    assignment trace [(job, machine, size)]."""
    sched = SqrtListScheduler(related.speeds)
    trace = []
    for j in range(related.n):
        i = sched.choose()
        size = reveal(j, i)
        sched.observe(i, size)
        trace.append((j, i, size))
    return trace, sched
