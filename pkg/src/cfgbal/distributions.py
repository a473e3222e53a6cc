"""Finite discrete distributions for nonnegative scalar loads.

Two arithmetic backends coexist: exact rationals (int / Fraction) for the
brute-force oracle and tiny fixtures, and 64-bit floats for everything else.
A distribution whose values and probabilities are all rational supports
bit-exact expectations; mixed or float data falls back to float arithmetic.

Truncation convention: a value exactly equal to the threshold tau counts as
exceptional (X^T = X*1{X < tau}, X^E = X*1{X >= tau}).
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

PROB_SUM_TOL = 1e-12


class ValidationError(ValueError):
    """A distribution or instance violates a structural invariant."""


def as_exact(x):
    """Convert a number to Fraction. Floats convert exactly (they are dyadic)."""
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(float(x))


def check_tau(tau):
    if tau <= 0:
        raise ValidationError(f"truncation threshold must be positive, got {tau}")
    return tau


class DiscreteDistribution:
    """Finite-support nonnegative random variable.

    The support is a tuple of (value, prob) pairs, sorted ascending by value
    with distinct values. Probabilities lie in (0, 1] and sum to one (exactly
    in rational mode, within PROB_SUM_TOL otherwise).
    """

    __slots__ = ("support",)

    def __init__(self, support):
        pairs = sorted(((v, p) for v, p in support), key=lambda vp: float(vp[0]))
        if not pairs:
            raise ValidationError("distribution support is empty")
        for v, p in pairs:
            if v < 0:
                raise ValidationError(f"negative support value {v}")
            if not (0 < p <= 1):
                raise ValidationError(f"probability {p} outside (0, 1]")
        for (v1, _), (v2, _) in zip(pairs, pairs[1:]):
            if v1 == v2:
                raise ValidationError(f"duplicate support value {v1}")
        total = sum(p for _, p in pairs)
        if self._all_rational(pairs):
            if total != 1:
                raise ValidationError(f"probabilities sum to {total}, expected 1")
        elif abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total}, expected 1")
        self.support = tuple((v, p) for v, p in pairs)

    @staticmethod
    def _all_rational(pairs):
        return all(
            isinstance(v, Rational) and isinstance(p, Rational) for v, p in pairs
        )

    @property
    def is_exact(self):
        return self._all_rational(self.support)

    def exact(self):
        """Return a copy with all values and probabilities as Fractions."""
        return DiscreteDistribution(
            [(as_exact(v), as_exact(p)) for v, p in self.support]
        )

    def values(self):
        return tuple(v for v, _ in self.support)

    def mean(self):
        return sum(v * p for v, p in self.support)

    def truncated_mean(self, tau):
        """E[X * 1{X < tau}]; mass at tau itself is exceptional."""
        check_tau(tau)
        return sum(v * p for v, p in self.support if v < tau)

    def exceptional_mean(self, tau):
        """E[X * 1{X >= tau}]."""
        check_tau(tau)
        return sum(v * p for v, p in self.support if v >= tau)

    def scale(self, factor):
        """Distribution of factor * X for factor > 0."""
        if factor <= 0:
            raise ValidationError(f"scale factor must be positive, got {factor}")
        return DiscreteDistribution([(v * factor, p) for v, p in self.support])

    def sample(self, rng):
        """Draw one realization using the caller-owned numpy Generator."""
        u = rng.random()
        acc = 0.0
        for v, p in self.support:
            acc += float(p)
            if u < acc:
                return v
        return self.support[-1][0]

    def quantile(self, u):
        """Inverse CDF at u in [0, 1); used to couple realizations to one uniform."""
        acc = 0.0
        for v, p in self.support:
            acc += float(p)
            if u < acc:
                return v
        return self.support[-1][0]

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.support == other.support

    def __hash__(self):
        return hash(self.support)

    def __repr__(self):
        pairs = ", ".join(f"({v}, {p})" for v, p in self.support)
        return f"DiscreteDistribution([{pairs}])"


def point_mass(v):
    return DiscreteDistribution([(v, Fraction(1))])


def scaled_bernoulli(value, prob):
    """Distribution value * Ber(prob), i.e. {(0, 1-prob), (value, prob)}."""
    one = Fraction(1)
    if prob == 1:
        return point_mass(value)
    return DiscreteDistribution([(0 * value, one - prob), (value, prob)])
