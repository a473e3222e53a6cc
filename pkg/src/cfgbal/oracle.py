"""Exact adaptive-policy computations on tiny instances.

Everything here runs in exact rational arithmetic: the optimal adaptive
policy via memoized value iteration over (remaining requests, load vector)
states, exact policy evaluation (expected makespan and total expected
exceptional load), the restart transform that caps exceptional load, and the
clairvoyance-gap adversary. Floats would break comparisons like 11/8 vs 11/4
at the boundaries, so inputs are converted to Fractions up front.
"""

from __future__ import annotations

from fractions import Fraction

from .distributions import check_tau
from .instances import (
    ConfigInstance,
    RelatedInstance,
    UnrelatedInstance,
    related_to_unrelated,
    unrelated_to_config,
)


class StateSpaceExceeded(RuntimeError):
    def __init__(self, size, limit):
        super().__init__(f"oracle state space {size} exceeds limit {limit}")
        self.size = size


class IncompletePolicy(RuntimeError):
    """The supplied policy left a reachable state undecided."""


class PolicyValue:
    """Exact expected makespan and expected total exceptional load."""

    __slots__ = ("makespan", "exceptional")

    def __init__(self, makespan, exceptional):
        self.makespan = makespan
        self.exceptional = exceptional

    def __iter__(self):
        return iter((self.makespan, self.exceptional))

    def __eq__(self, other):
        if not isinstance(other, PolicyValue):
            return NotImplemented
        return (self.makespan, self.exceptional) == (other.makespan, other.exceptional)

    def __repr__(self):
        return f"PolicyValue(makespan={self.makespan}, exceptional={self.exceptional})"


def to_config_instance(inst):
    """Accept any load-balancing instance; reduce to configuration
    balancing with exact rational data."""
    if isinstance(inst, RelatedInstance):
        inst = related_to_unrelated(inst)
    if isinstance(inst, UnrelatedInstance):
        inst = unrelated_to_config(inst)
    if not isinstance(inst, ConfigInstance):
        raise TypeError(f"oracle cannot handle {type(inst).__name__}")
    return inst.exact()


class AdaptiveOracle:
    """Memoized value iteration for the optimal adaptive policy.

    A state is (frozenset of remaining request ids, per-resource loads).
    V(empty, L) = max_i L_i; otherwise the policy picks the (request,
    configuration) pair minimizing the expected continuation. Ties break on
    the lowest (request id, config id), making OPT deterministic.
    """

    def __init__(self, inst, max_states=2_000_000):
        self.inst = to_config_instance(inst)
        self.max_states = max_states
        self.by_id = {r.id: r for r in self.inst.requests}
        self._value = {}
        self._choice = {}
        self.zero_loads = tuple(Fraction(0) for _ in range(self.inst.m))
        self.all_ids = frozenset(self.by_id)

    def value(self, remaining=None, loads=None):
        if remaining is None:
            remaining = self.all_ids
        if loads is None:
            loads = self.zero_loads
        key = (remaining, loads)
        cached = self._value.get(key)
        if cached is not None:
            return cached
        if not remaining:
            result = max(loads) if loads else Fraction(0)
            self._store(key, result, None)
            return result
        best = None
        best_choice = None
        for j in sorted(remaining):
            rest = remaining - {j}
            for c, config in enumerate(self.by_id[j].configs):
                q = Fraction(0)
                for v, p in config.law.support:
                    new_loads = tuple(
                        L + a * v for L, a in zip(loads, config.multipliers)
                    )
                    q += p * self.value(rest, new_loads)
                if best is None or q < best:
                    best = q
                    best_choice = (j, c)
        self._store(key, best, best_choice)
        return best

    def choice(self, remaining, loads):
        """Optimal (request id, config id) at a state; None when done."""
        self.value(remaining, loads)
        return self._choice[(remaining, loads)]

    def _store(self, key, value, choice):
        self._value[key] = value
        self._choice[key] = choice
        if len(self._value) > self.max_states:
            raise StateSpaceExceeded(len(self._value), self.max_states)

    def policy(self):
        """The optimal policy as a state -> (request, config) function."""
        return self.choice

    def tree_text(self):
        """Nested textual rendering of the reachable decision tree."""
        lines = []

        def render(remaining, loads, depth):
            pad = "  " * depth
            state = f"remaining={sorted(remaining)} loads=({', '.join(map(str, loads))})"
            if not remaining:
                lines.append(f"{pad}{{state: {state}, value: {max(loads) if loads else 0}}}")
                return
            j, c = self.choice(remaining, loads)
            lines.append(f"{pad}{{state: {state}, decision: request {j} -> config {c}}}")
            config = self.by_id[j].configs[c]
            for v, _ in config.law.support:
                new_loads = tuple(L + a * v for L, a in zip(loads, config.multipliers))
                lines.append(f"{pad}  realized {v}:")
                render(remaining - {j}, new_loads, depth + 2)

        render(self.all_ids, self.zero_loads, 0)
        return "\n".join(lines)


def optimal_adaptive(inst, max_states=2_000_000):
    """Exact E[OPT] and the optimal decision rule."""
    oracle = AdaptiveOracle(inst, max_states=max_states)
    return oracle.value(), oracle


def evaluate_policy(inst, policy, tau):
    """Exact expectation of (makespan, total exceptional load at tau) for a
    decision function policy(remaining ids, loads) -> (request, config)."""
    check_tau(tau)
    inst = to_config_instance(inst)
    tau = Fraction(tau)
    by_id = {r.id: r for r in inst.requests}
    memo = {}

    def walk(remaining, loads):
        if not remaining:
            return (max(loads) if loads else Fraction(0)), Fraction(0)
        key = (remaining, loads)
        cached = memo.get(key)
        if cached is not None:
            return cached
        try:
            decision = policy(remaining, loads)
        except KeyError:
            decision = None
        if decision is None:
            raise IncompletePolicy(f"no decision at remaining={sorted(remaining)}")
        j, c = decision
        if j not in remaining:
            raise IncompletePolicy(f"policy chose request {j} not in remaining set")
        config = by_id[j].configs[c]
        a_max = config.max_multiplier
        mk = Fraction(0)
        exc = Fraction(0)
        rest = remaining - {j}
        for v, p in config.law.support:
            new_loads = tuple(L + a * v for L, a in zip(loads, config.multipliers))
            peak = a_max * v
            step_exc = peak if peak >= tau else Fraction(0)
            sub_mk, sub_exc = walk(rest, new_loads)
            mk += p * sub_mk
            exc += p * (step_exc + sub_exc)
        memo[key] = (mk, exc)
        return memo[key]

    zero = tuple(Fraction(0) for _ in range(inst.m))
    mk, exc = walk(frozenset(by_id), zero)
    return PolicyValue(mk, exc)


def non_adaptive_policy(assignment):
    """Fixed configuration per request, served in ascending id order."""

    def decide(remaining, loads):
        j = min(remaining)
        return j, assignment[j]

    return decide


class RestartPolicy:
    """Follow OPT but stop on exceptional or too-large configurations.

    Runs the optimal policy of the current request set from a fresh load
    vector; right before OPT would commit a configuration with
    E[max_i X_i(c)] > tau, it stops and restarts on the same set, and right
    after a committed configuration realizes max_i X_i(c) >= tau it restarts
    on the remaining set. Restarts reset the loads that drive OPT's
    decisions; true loads keep accumulating for evaluation.
    """

    def __init__(self, inst, tau, max_states=2_000_000):
        check_tau(tau)
        self.oracle = AdaptiveOracle(inst, max_states=max_states)
        self.inst = self.oracle.inst
        self.tau = Fraction(tau)
        self.committed_configs = set()

    def _opt_choice(self, remaining, opt_loads):
        return self.oracle.choice(remaining, opt_loads)

    def value(self):
        """Exact (expected makespan, expected total exceptional load)."""
        by_id = self.oracle.by_id
        tau = self.tau
        memo = {}

        def walk(remaining, opt_loads, true_loads):
            if not remaining:
                return (max(true_loads) if true_loads else Fraction(0)), Fraction(0)
            key = (remaining, opt_loads, true_loads)
            cached = memo.get(key)
            if cached is not None:
                return cached
            j, c = self._opt_choice(remaining, opt_loads)
            config = by_id[j].configs[c]
            if config.expected_max() > tau:
                # too large: restart OPT on the same set with fresh loads
                if opt_loads == self.oracle.zero_loads:
                    raise RuntimeError(
                        "OPT's first decision is too large; requires tau < 2 E[OPT]"
                    )
                result = walk(remaining, self.oracle.zero_loads, true_loads)
                memo[key] = result
                return result
            self.committed_configs.add((j, c))
            a_max = config.max_multiplier
            rest = remaining - {j}
            mk = Fraction(0)
            exc = Fraction(0)
            for v, p in config.law.support:
                new_true = tuple(
                    L + a * v for L, a in zip(true_loads, config.multipliers)
                )
                peak = a_max * v
                if peak >= tau:
                    step_exc = peak
                    sub_mk, sub_exc = walk(rest, self.oracle.zero_loads, new_true)
                else:
                    step_exc = Fraction(0)
                    new_opt = tuple(
                        L + a * v for L, a in zip(opt_loads, config.multipliers)
                    )
                    sub_mk, sub_exc = walk(rest, new_opt, new_true)
                mk += p * sub_mk
                exc += p * (step_exc + sub_exc)
            memo[key] = (mk, exc)
            return memo[key]

        zero = self.oracle.zero_loads
        mk, exc = walk(self.oracle.all_ids, zero, zero)
        return PolicyValue(mk, exc)

    def run(self, inst, realize):
        """Execute one realized trajectory; realize(request id, law) -> the
        chosen configuration's realized scalar.

        Returns the trace as (request id, config id, realized value) records.
        """
        remaining = set(self.oracle.all_ids)
        opt_loads = self.oracle.zero_loads
        trace = []
        while remaining:
            j, c = self._opt_choice(frozenset(remaining), opt_loads)
            config = self.oracle.by_id[j].configs[c]
            if config.expected_max() > self.tau:
                if opt_loads == self.oracle.zero_loads:
                    raise RuntimeError("stuck restart: tau too small")
                opt_loads = self.oracle.zero_loads
                continue
            v = Fraction(realize(j, config.law))
            trace.append((j, c, v))
            remaining.discard(j)
            if config.max_multiplier * v >= self.tau:
                opt_loads = self.oracle.zero_loads
            else:
                opt_loads = tuple(
                    L + a * v for L, a in zip(opt_loads, config.multipliers)
                )
        return trace


def restart_policy(inst, tau, max_states=2_000_000):
    """Build the restart policy and compute its exact value."""
    policy = RestartPolicy(inst, tau, max_states=max_states)
    value = policy.value()
    return policy, value


def clairvoyance_adversary(m, algorithm):
    """Adaptive adversary of the clairvoyance gap on related machines.

    The machine set is one fast machine (speed 1) and m-1 machines of speed
    1/sqrt(m); the pool holds m-1 small jobs (size 1/sqrt(m)) and one big job
    (size 1). The adversary reveals small jobs while the algorithm stays on
    the fast machine, makes the job big the first time a slow machine is
    used, and forces the final job big if the small pool runs out.

    algorithm(loads, speeds) -> machine index, called before the size is
    revealed. Returns (realized sizes, assignment, makespan); the clairvoyant
    optimum of every realized sequence is 1.
    """
    from .instances import gen_clairvoyance_adversary_instance

    inst = gen_clairvoyance_adversary_instance(m)
    speeds = [Fraction(s) for s in inst.speeds]
    big = Fraction(1)
    small = speeds[1] if m > 1 else big  # slow speed equals the small size
    loads = [Fraction(0)] * m
    sizes = []
    assignment = []
    smalls_left = m - 1
    big_used = False
    for step in range(m):
        i = algorithm(tuple(loads), tuple(speeds))
        if not (0 <= i < m):
            raise ValueError(f"algorithm chose invalid machine {i}")
        slow = speeds[i] < speeds[0]
        if not big_used and (slow or smalls_left == 0):
            size = big
            big_used = True
        else:
            size = small
            smalls_left -= 1
        loads[i] += size / speeds[i]
        sizes.append(size)
        assignment.append(i)
    return sizes, assignment, max(loads)


def always_fast(loads, speeds):
    """Baseline that schedules everything on the fastest machine."""
    best = max(range(len(speeds)), key=lambda i: (speeds[i], -i))
    return best
