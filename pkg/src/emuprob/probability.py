"""String-level probabilities: output frequency, walk output distributions,
stationary string probability, and the weighted-average identity.

String distributions always carry the undefined output explicitly, so every
distribution here sums to exactly one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .constructions import all_input_tables, closed_under_transform
from .emulation import ComputerSet
from .errors import ContractError, DomainError, ResourceError
from .markov import (
    ChainClass,
    Dyadic,
    classify,
    dyadic_from_fraction,
    n_step_computer,
    path_probability,
    stationary_exact,
    tree_distributions,
)
from .universe import Output, Universe, k_partition

ENUMERATION_CAP = 20


@dataclass(frozen=True)
class StringDistribution:
    """Exact probability per output, undefined included; total mass is one."""

    entries: tuple[tuple[Output, Fraction], ...]

    def __post_init__(self):
        total = sum((p for _, p in self.entries), Fraction(0))
        if total != 1:
            raise ContractError(f"string distribution sums to {total}, not 1")

    def of(self, s: Output) -> Fraction:
        for out, p in self.entries:
            if out == s:
                return p
        return Fraction(0)

    def outputs(self) -> list[Output]:
        return [out for out, _ in self.entries]


def output_frequency(u: Universe, c: int, n: int, s: Output, cap: int = ENUMERATION_CAP) -> Dyadic:
    """Fraction of the 2^n inputs of length n that c maps to s.

    Counted by pushing input counts through the step table rather than by
    enumerating the strings, which is exact and linear in n.
    """
    u.check_state(c)
    if n < 0:
        raise DomainError("n must be non-negative")
    if n > cap:
        raise ResourceError(f"output frequency at n={n} exceeds enumeration cap {cap}")
    counts = [0] * u.n_states
    counts[c] = 1
    for _ in range(n):
        nxt = [0] * u.n_states
        for q, k in enumerate(counts):
            if k:
                nxt[u.step0[q]] += k
                nxt[u.step1[q]] += k
        counts = nxt
    hit = sum(k for q, k in enumerate(counts) if u.outs[q] == s)
    return Dyadic(hit, n)


def output_frequency_distribution(
    u: Universe, c: int, n: int, cap: int = ENUMERATION_CAP
) -> dict[Output, Dyadic]:
    """Output frequency of every alphabet output (undefined included) at once."""
    return {
        s: output_frequency(u, c, n, s, cap=cap)
        for s in _full_alphabet(u)
    }


def _full_alphabet(u: Universe) -> list[Output]:
    alpha = u.alphabet()
    if None not in alpha:
        alpha.append(None)
    return alpha


def string_probability_n(c: int, phi: ComputerSet, n: int, s: Output) -> Dyadic:
    """Probability of seeing output s after an n-step walk from c."""
    dist = n_step_computer(c, phi, n)
    total = sum(
        (p for q, p in zip(phi.members, dist) if phi.u.outs[q] == s), Fraction(0)
    )
    return dyadic_from_fraction(total)


def string_probability_n_tree(c: int, phi: ComputerSet, n: int, s: Output) -> Dyadic:
    """Oracle route: sum path probabilities of tree nodes whose output is s."""
    u = phi.u
    level = tree_distributions(c, phi, n)[n]
    total = Dyadic.zero()
    for q, mass in zip(phi.members, level):
        if u.outs[q] == s:
            total = total + mass
    return total


def string_distribution_n(c: int, phi: ComputerSet, n: int) -> StringDistribution:
    """The full n-step output distribution of the walk from c."""
    dist = n_step_computer(c, phi, n)
    acc: dict[Output, Fraction] = {}
    for q, p in zip(phi.members, dist):
        acc[phi.u.outs[q]] = acc.get(phi.u.outs[q], Fraction(0)) + p
    entries = [(s, acc.get(s, Fraction(0))) for s in _full_alphabet(phi.u)]
    return StringDistribution(tuple(entries))


def stationary_string_probability(phi: ComputerSet, s: Output) -> Fraction:
    """Stationary mass of the members whose empty-input output is s."""
    return stationary_string_distribution(phi).of(s)


def stationary_string_distribution(phi: ComputerSet) -> StringDistribution:
    report = classify(phi)
    if report.chain_class != ChainClass.POSITIVE_RECURRENT_FINITE:
        raise ContractError(
            "stationary string probability needs a positive recurrent chain "
            f"(got {report.chain_class})"
        )
    pi = stationary_exact(phi)
    acc: dict[Output, Fraction] = {}
    for q, p in zip(phi.members, pi):
        acc[phi.u.outs[q]] = acc.get(phi.u.outs[q], Fraction(0)) + p
    entries = [(s, acc.get(s, Fraction(0))) for s in _full_alphabet(phi.u)]
    return StringDistribution(tuple(entries))


def halting_probability(u: Universe, root: int, n: int, cap: int = ENUMERATION_CAP) -> Dyadic:
    """One minus the undefined output frequency at depth n.

    For a machine built from a prefix-free program table this is monotone in
    n and reaches the table's Kraft sum once n covers the longest program.
    """
    freq = output_frequency(u, root, n, None, cap=cap)
    return Dyadic((1 << freq.exp) - freq.num, freq.exp)


# -- exact identity reports ----------------------------------------------------


@dataclass(frozen=True)
class StringCKReport:
    """Split-walk consistency of string probabilities at (m, n)."""

    m: int
    n: int
    max_discrepancy: Fraction
    rows: tuple[tuple[Output, Fraction, Fraction], ...]  # (s, direct, split)

    @property
    def ok(self) -> bool:
        return self.max_discrepancy == 0


def string_ck_check(phi: ComputerSet, c: int, m: int, n: int) -> StringCKReport:
    """Compare the (m+n)-step output distribution against the split sum.

    The split route distributes over the m-step computer distribution and
    the n-step string distributions of the intermediate computers. Both
    routes are exact; the report carries the worst absolute difference.
    """
    direct = string_distribution_n(c, phi, m + n)
    mid = n_step_computer(c, phi, m)
    tails = [string_distribution_n(q, phi, n) for q in phi.members]
    rows = []
    worst = Fraction(0)
    for s in _full_alphabet(phi.u):
        split = sum(
            (p * tail.of(s) for p, tail in zip(mid, tails) if p), Fraction(0)
        )
        d = direct.of(s)
        rows.append((s, d, split))
        worst = max(worst, abs(d - split))
    return StringCKReport(m=m, n=n, max_discrepancy=worst, rows=tuple(rows))


@dataclass(frozen=True)
class WeightedAverageReport:
    """Stationary string probability against the member-averaged output frequency.

    ``applicable`` is False when a hypothesis fails, in which case
    ``failed_hypothesis`` names it and no rows are produced: the check never
    passes silently on a set it does not cover.
    """

    n: int
    applicable: bool
    failed_hypothesis: Optional[str]
    rows: tuple[tuple[Output, Fraction, Fraction], ...]  # (s, stationary, averaged)

    @property
    def ok(self) -> bool:
        return self.applicable and all(a == b for _, a, b in self.rows)


def weighted_average_identity(phi: ComputerSet, n: int) -> WeightedAverageReport:
    """Check stationary string probability == member-average output frequency.

    Hypotheses verified before any comparison: the chain is positive
    recurrent; the member set contains every universe state n-equivalent to
    a member; and the set is closed, at the n-equivalence level, under every
    non-degenerate input permutation of order up to n.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    if n > 3:
        raise DomainError("orders beyond 3 are unsupported (2^n! explosion)")
    u = phi.u
    report = classify(phi)
    if report.chain_class != ChainClass.POSITIVE_RECURRENT_FINITE:
        return WeightedAverageReport(
            n, False, f"chain is {report.chain_class}, not positive recurrent", ()
        )
    ids = k_partition(u, n)
    member_ids = {ids[m] for m in phi.members}
    strays = [
        q for q in range(u.n_states) if ids[q] in member_ids and q not in phi
    ]
    if strays:
        return WeightedAverageReport(
            n, False, f"set not complete at k={n}: states {strays} excluded", ()
        )
    for order in range(1, n + 1):
        for table in all_input_tables(order):
            if not table.proper:
                continue
            if not closed_under_transform(phi, table, k=n):
                return WeightedAverageReport(
                    n, False,
                    f"set not closed under input permutation {table.name!r} "
                    f"of order {order} at the {n}-equivalence level",
                    (),
                )

    pi = stationary_exact(phi)
    stationary = stationary_string_distribution(phi)
    freqs = [output_frequency_distribution(u, q, n) for q in phi.members]
    rows = []
    for s in _full_alphabet(u):
        averaged = sum(
            (p * f[s].as_fraction() for p, f in zip(pi, freqs)), Fraction(0)
        )
        rows.append((s, stationary.of(s), averaged))
    return WeightedAverageReport(n, True, None, tuple(rows))
