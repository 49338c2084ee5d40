"""The emulation Markov process: exact probabilities, solvers, and walks.

Path and n-step probabilities of the walk are dyadic rationals and are kept
exact (Dyadic); stationary vectors are general rationals solved exactly with
Gaussian elimination over Fraction. Nothing in this module rounds: the
identities hold as equalities, and floating point only ever appears in
Monte-Carlo summaries.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, TYPE_CHECKING

from .errors import ContractError, ConvergenceError, DomainError, InternalError
from . import kernels
from .emulation import ComputerSet, is_branching
from .rng import Stream, substream_seed
from .universe import Output, Universe

if TYPE_CHECKING:  # pragma: no cover
    from .constructions import VirusChain


@dataclass(frozen=True)
class Dyadic:
    """Exact value num / 2**exp, canonical (num odd, or zero with exp 0)."""

    num: int
    exp: int

    def __post_init__(self):
        if self.num < 0 or self.exp < 0:
            raise DomainError("dyadic values are non-negative with non-negative exponent")
        if self.num == 0:
            if self.exp != 0:
                object.__setattr__(self, "exp", 0)
        else:
            n, e = self.num, self.exp
            while n % 2 == 0 and e > 0:
                n //= 2
                e -= 1
            object.__setattr__(self, "num", n)
            object.__setattr__(self, "exp", e)

    @staticmethod
    def zero() -> "Dyadic":
        return Dyadic(0, 0)

    @staticmethod
    def one() -> "Dyadic":
        return Dyadic(1, 0)

    def halve(self) -> "Dyadic":
        return Dyadic(self.num, self.exp + 1)

    def __add__(self, other: "Dyadic") -> "Dyadic":
        e = max(self.exp, other.exp)
        return Dyadic(
            (self.num << (e - self.exp)) + (other.num << (e - other.exp)), e
        )

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, (int, Fraction)):
            return self.as_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction())

    def __lt__(self, other: "Dyadic") -> bool:
        return self.num * (1 << other.exp) < other.num * (1 << self.exp)

    def __le__(self, other: "Dyadic") -> bool:
        return self.num * (1 << other.exp) <= other.num * (1 << self.exp)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __str__(self):
        return f"{self.num}/{1 << self.exp}"


def dyadic_from_fraction(f: Fraction) -> Dyadic:
    e = f.denominator.bit_length() - 1
    if (1 << e) != f.denominator:
        raise DomainError(f"{f} is not a dyadic rational")
    return Dyadic(f.numerator, e)


class ChainClass:
    POSITIVE_RECURRENT_FINITE = "PositiveRecurrentFinite"
    PERIODIC_FINITE = "PeriodicFinite"
    REDUCIBLE = "Reducible"


@dataclass(frozen=True)
class ChainReport:
    irreducible: bool
    period: int  # 0 when not irreducible (no common period defined)
    aperiodic: bool
    chain_class: str


@dataclass(frozen=True)
class EmulationMatrix:
    """Exact one-step transition matrix of the walk, rows indexed by emulator."""

    members: tuple[int, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    def index(self, q: int) -> int:
        return self.members.index(q)

    def multiply_vector(self, v: Sequence[Fraction]) -> list[Fraction]:
        """Row vector times matrix."""
        n = len(self.members)
        out = [Fraction(0)] * n
        for i, vi in enumerate(v):
            if vi == 0:
                continue
            row = self.rows[i]
            for j in range(n):
                if row[j]:
                    out[j] += vi * row[j]
        return out


HALF = Fraction(1, 2)


def _phi_children(phi: ComputerSet, c: int) -> list[int]:
    """Children of c inside phi, in bit order (may repeat a state)."""
    u = phi.u
    return [t for t in (u.step0[c], u.step1[c]) if t in phi]


def emulation_matrix(phi: ComputerSet) -> EmulationMatrix:
    """One-step matrix: each in-set child via a bit carries its step weight."""
    if not is_branching(phi):
        raise ContractError("emulation matrix requires a branching computer set")
    n = len(phi.members)
    pos = {q: j for j, q in enumerate(phi.members)}
    rows = []
    for c in phi.members:
        row = [Fraction(0)] * n
        kids = _phi_children(phi, c)
        w = HALF if len(kids) == 2 else Fraction(1)
        for t in kids:
            row[pos[t]] += w
        rows.append(tuple(row))
    return EmulationMatrix(tuple(phi.members), tuple(rows))


def path_probability(c: int, phi: ComputerSet, x: str) -> Dyadic:
    """Probability of reaching tree node x on the fair walk from c.

    Halves at every bifurcation (both one-bit extensions stay in the set),
    carries over unchanged on forced moves.
    """
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    u = phi.u
    p = Dyadic.one()
    cur = c
    for ch in x:
        bit = 1 if ch == "1" else 0
        nxt = u.step(cur, bit)
        sibling = u.step(cur, 1 - bit)
        if nxt not in phi:
            raise DomainError(f"input {x!r} leaves the computer set")
        if sibling in phi:
            p = p.halve()
        cur = nxt
    return p


def n_step_computer(c: int, phi: ComputerSet, n: int) -> list[Fraction]:
    """n-step distribution over members, by matrix power (start: point mass at c)."""
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    if n < 0:
        raise DomainError("n must be non-negative")
    matrix = emulation_matrix(phi)
    v = [Fraction(0)] * len(phi.members)
    v[matrix.index(c)] = Fraction(1)
    for _ in range(n):
        v = matrix.multiply_vector(v)
    return v


def n_step_via_tree(c: int, phi: ComputerSet, n: int) -> list[Fraction]:
    """Same distribution by explicit enumeration of tree nodes (oracle route)."""
    return [d.as_fraction() for d in tree_distributions(c, phi, n)[n]]


def tree_distributions(c: int, phi: ComputerSet, max_depth: int) -> list[list[Dyadic]]:
    """Per-level landing mass per member, from a walk over all tree nodes.

    Enumerates every node of the walk tree of c up to max_depth, propagating
    the path-probability recursion; level d sums to one exactly for
    branching sets. Exponential in max_depth; meant for desk-scale checks.
    """
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    if not is_branching(phi):
        raise ContractError("tree enumeration requires a branching computer set")
    u = phi.u
    pos = {q: j for j, q in enumerate(phi.members)}
    levels = [[Dyadic.zero()] * len(phi.members) for _ in range(max_depth + 1)]
    levels[0][pos[c]] = Dyadic.one()
    frontier = [(c, Dyadic.one())]
    for depth in range(1, max_depth + 1):
        nxt = []
        for q, p in frontier:
            kids = [t for t in (u.step0[q], u.step1[q]) if t in phi]
            w = p.halve() if len(kids) == 2 else p
            for t in kids:
                nxt.append((t, w))
                levels[depth][pos[t]] = levels[depth][pos[t]] + w
        frontier = nxt
    return levels


# -- classification ----------------------------------------------------------


def _phi_scc_of(phi: ComputerSet, c: int) -> set[int]:
    """Members mutually reachable with c through in-set one-step moves."""
    fwd = _phi_reach(phi, c)
    back = {q for q in phi.members if c in _phi_reach(phi, q)}
    return fwd & back


def _phi_reach(phi: ComputerSet, c: int) -> set[int]:
    seen = {c}
    todo = deque([c])
    while todo:
        q = todo.popleft()
        for t in _phi_children(phi, q):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def period(c: int, phi: ComputerSet) -> Optional[int]:
    """gcd of closed in-set walk lengths through c; None when c never returns.

    Uses the standard distance argument on the strongly connected component
    of c: the gcd of d(x)+1-d(y) over its internal edges equals the cycle
    gcd through any of its states.
    """
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    comp = _phi_scc_of(phi, c)
    dist = {c: 0}
    order = deque([c])
    g = 0
    while order:
        q = order.popleft()
        for t in _phi_children(phi, q):
            if t not in comp:
                continue
            if t not in dist:
                dist[t] = dist[q] + 1
                order.append(t)
    for q in comp:
        for t in _phi_children(phi, q):
            if t in comp:
                g = math.gcd(g, dist[q] + 1 - dist[t])
    return g if g > 0 else None


def classify(phi: ComputerSet) -> ChainReport:
    """Finite-chain trichotomy: positive recurrent, periodic, or reducible."""
    if not is_branching(phi):
        raise ContractError("classification requires a branching computer set")
    first = phi.members[0]
    irreducible = _phi_scc_of(phi, first) == set(phi.members) and _phi_reach(
        phi, first
    ) == set(phi.members)
    if not irreducible:
        return ChainReport(False, 0, False, ChainClass.REDUCIBLE)
    d = period(first, phi)
    if d is None:  # unreachable for an irreducible finite chain
        raise InternalError("irreducible chain with no return cycle")
    if d == 1:
        return ChainReport(True, 1, True, ChainClass.POSITIVE_RECURRENT_FINITE)
    return ChainReport(True, d, False, ChainClass.PERIODIC_FINITE)


# -- stationary solvers ------------------------------------------------------


def stationary_exact(phi: ComputerSet) -> list[Fraction]:
    """Unique probability vector with pi * E == pi, by exact elimination.

    Requires an irreducible chain. For an aperiodic chain this is the limit
    distribution of the walk; for a periodic chain it is the invariant
    measure only (the n-step limit does not exist).
    """
    report = classify(phi)
    if report.chain_class == ChainClass.REDUCIBLE:
        raise ContractError("stationary vector needs an irreducible chain")
    matrix = emulation_matrix(phi)
    n = len(matrix.members)
    # rows of (E^T - I), then the normalization row; solve A x = b exactly
    a = [
        [matrix.rows[j][i] - (1 if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    b = [Fraction(0)] * n
    rank = _eliminate(a, b)
    if rank != n - 1:
        raise InternalError(
            f"transition matrix has corank {n - rank}, expected 1; "
            "classification and solver disagree"
        )
    a.append([Fraction(1)] * n)
    b.append(Fraction(1))
    rank = _eliminate(a, b)
    if rank != n:
        raise InternalError("normalized stationary system is singular")
    pi = _back_substitute(a, b, n)
    if any(p <= 0 for p in pi):
        raise InternalError("stationary vector of an irreducible chain must be positive")
    return pi


def _eliminate(a: list[list[Fraction]], b: list[Fraction]) -> int:
    """In-place fraction Gaussian elimination to row echelon; returns rank."""
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        b[rank], b[pivot] = b[pivot], b[rank]
        inv = 1 / a[rank][col]
        a[rank] = [x * inv for x in a[rank]]
        b[rank] *= inv
        for r in range(n_rows):
            if r != rank and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
                b[r] -= f * b[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


def _back_substitute(a: list[list[Fraction]], b: list[Fraction], n_cols: int) -> list[Fraction]:
    x = [Fraction(0)] * n_cols
    for r in range(len(a)):
        lead = next((c for c in range(n_cols) if a[r][c] != 0), None)
        if lead is None:
            if b[r] != 0:
                raise InternalError("inconsistent linear system")
            continue
        x[lead] = b[r] - sum(a[r][c] * x[c] for c in range(lead + 1, n_cols))
    return x


def stationary_power(
    phi: ComputerSet, tol: Fraction, max_iter: int = 20000
) -> tuple[list[Fraction], int]:
    """Power iteration from a point mass, in exact dyadic arithmetic.

    One-step weights are halves, so every iterate is an integer vector over
    a power-of-two denominator; the loop is pure integer arithmetic and the
    convergence test (max-norm difference below tol) is exact. Raises
    ConvergenceError when the budget runs out (periodic chains oscillate
    forever).
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    report = classify(phi)
    if report.chain_class != ChainClass.POSITIVE_RECURRENT_FINITE:
        raise ContractError("power iteration needs a positive recurrent chain")
    u = phi.u
    n = len(phi.members)
    pos = {q: j for j, q in enumerate(phi.members)}
    moves = []  # per member: (columns, weight numerator over denominator 2)
    for c in phi.members:
        kids = _phi_children(phi, c)
        if len(kids) == 2:
            moves.append((pos[kids[0]], pos[kids[1]], 1))
        else:
            moves.append((pos[kids[0]], pos[kids[0]], 1))  # doubled below
    v = [0] * n
    v[0] = 1
    exp = 0
    for it in range(1, max_iter + 1):
        w = [0] * n
        for i, (j0, j1, _) in enumerate(moves):
            if v[i]:
                if j0 == j1:
                    w[j0] += 2 * v[i]
                else:
                    w[j0] += v[i]
                    w[j1] += v[i]
        wexp = exp + 1
        # max |w/2^wexp - v/2^exp| < tol, cross-multiplied to integers
        diff = max(abs(x - 2 * y) for x, y in zip(w, v))
        converged = diff * tol.denominator < tol.numerator * (1 << wexp)
        shift = min((x & -x).bit_length() - 1 for x in w if x) if any(w) else 0
        shift = min(shift, wexp)
        v = [x >> shift for x in w]
        exp = wexp - shift
        if converged:
            return [Fraction(x, 1 << exp) for x in v], it
    raise ConvergenceError(
        f"power iteration did not reach tolerance {tol} in {max_iter} iterations",
        max_iter,
    )


# -- sampled walks -----------------------------------------------------------


@dataclass(frozen=True)
class WalkTrace:
    """One sampled walk: chosen bits (forced moves included), states, outputs."""

    start: int
    bits: str
    visited: tuple[int, ...]
    outputs: tuple[Output, ...]
    seed: int

    def as_line(self) -> str:
        states = " ".join(str(q) for q in self.visited)
        outs = " ".join("~" if o is None else o for o in self.outputs)
        return f"{self.seed},{self.bits},{states},{outs}"


def sample_walk(c: int, phi: ComputerSet, n: int, seed: int) -> WalkTrace:
    """Walk n steps from c, flipping a fair coin at every bifurcation.

    Draws one SplitMix64 word per bifurcation and none on forced moves, so
    the trace is a pure function of (universe, set, start, seed, n).
    """
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    u = phi.u
    stream = Stream(seed)
    cur = c
    bits = []
    visited = [c]
    for _ in range(n):
        in0 = u.step0[cur] in phi
        in1 = u.step1[cur] in phi
        if in0 and in1:
            b = stream.bit()
        elif in0:
            b = 0
        elif in1:
            b = 1
        else:
            raise ContractError(f"walk from {c} dead-ends at {cur}: set is not branching")
        cur = u.step(cur, b)
        bits.append("01"[b])
        visited.append(cur)
    return WalkTrace(
        start=c,
        bits="".join(bits),
        visited=tuple(visited),
        outputs=tuple(u.outs[q] for q in visited),
        seed=seed,
    )


def bulk_walk_traces(c: int, phi: ComputerSet, n: int, seed: int, samples: int):
    """Traces for sample indices 0..samples-1, each from its derived stream."""
    for i in range(samples):
        yield sample_walk(c, phi, n, substream_seed(seed, i))


def walk_distribution(
    c: int,
    phi: ComputerSet,
    n: int,
    samples: int,
    seed: int,
    workers: int | None = None,
) -> list[int]:
    """Final-state counts over members for `samples` walks (kernel-backed).

    Sample i draws from the stream seeded by substream_seed(seed, i), so the
    counts are independent of worker partitioning.
    """
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    if not is_branching(phi):
        raise ContractError("walk sampling requires a branching computer set")
    u = phi.u
    counts = kernels.walk_final_counts(
        list(u.step0),
        list(u.step1),
        [q in phi for q in range(u.n_states)],
        c,
        n,
        samples,
        seed,
        workers=workers,
    )
    return [int(counts[q]) for q in phi.members]


@dataclass(frozen=True)
class NeverReturnEstimate:
    """Monte-Carlo never-deviate estimate with its exact finite product."""

    horizon: int
    samples: int
    survivors: int
    estimate: float
    ci_low: float
    ci_high: float
    exact: Fraction

    def exact_float(self) -> float:
        return float(self.exact)


def never_return_estimate(
    family: "VirusChain",
    horizon_index: int,
    samples: int,
    seed: int,
    workers: int | None = None,
) -> NeverReturnEstimate:
    """Probability that a walk follows the self-copying family without exiting.

    The walk from the first family member runs through blocks 1, 2, ...,
    horizon_index-1; block i deviates to the reference computer exactly when
    its i fair bits come out all zero. The returned exact value is the
    product of the per-block pass probabilities (1 - 2^-i).
    """
    if horizon_index < 2:
        raise DomainError("horizon index must be at least 2")
    if horizon_index > family.max_index:
        raise DomainError(
            f"horizon {horizon_index} beyond family max index {family.max_index}"
        )
    if samples <= 0:
        raise DomainError("need a positive sample count")
    survivors = kernels.virus_survivor_count(seed, horizon_index, samples, workers=workers)
    exact = Fraction(1)
    for i in range(1, horizon_index):
        exact *= 1 - Fraction(1, 1 << i)
    p = survivors / samples
    half_width = 1.96 * math.sqrt(max(p * (1 - p), 0.0) / samples)
    return NeverReturnEstimate(
        horizon=horizon_index,
        samples=samples,
        survivors=survivors,
        estimate=p,
        ci_low=max(0.0, p - half_width),
        ci_high=min(1.0, p + half_width),
        exact=exact,
    )
