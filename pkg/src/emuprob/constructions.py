"""Concrete machine constructions, fixtures, transformations, and quotients.

Everything here produces plain universes (plus distinguished states or
member sets), so all the exact machinery from the markov and probability
modules applies to the constructed objects directly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import ContractError, DomainError, InternalError, ResourceError, ValidationError
from .emulation import ComputerSet, closure_universal, is_branching, universal_members
from .markov import ChainClass, EmulationMatrix, classify, emulation_matrix
from .universe import (
    MAX_OUTPUT_BITS,
    Output,
    Universe,
    disjoint_union,
    is_bits,
    k_partition,
    same_function,
)

UNDEF = None  # alias for the undefined output label


# -- canonical fixtures ------------------------------------------------------


def two_state_universe() -> tuple[Universe, ComputerSet]:
    """Two mutually emulating computers: A outputs "0", B outputs "1".

    A keeps itself on 0 and hands over to B on 1; B returns to A on either
    bit. The standard tiny fixture: stationary vector (2/3, 1/3).
    """
    u = Universe(
        outs=["0", "1"],
        step0=[0, 0],
        step1=[1, 0],
        minimized=True,
        sets={"all": (0, 1)},
    )
    return u, ComputerSet.whole(u)


def uneven_tree_universe() -> tuple[Universe, ComputerSet]:
    """Six states whose walk tree mixes fair coin flips with forced moves.

    The member set excludes the absorbing undefined state 5, so from state 0
    the tree has both one-bit extensions, loses the node "11" at depth two,
    and at depth three forces the moves out of "00" and "01". Path
    probabilities: 1/2 at depth one, then 1/4, 1/4, 1/2 across depth two.
    """
    u = Universe(
        outs=["0", "00", "01", "10", "11", None],
        step0=[1, 3, 0, 5, 0, 5],
        step1=[2, 4, 5, 0, 5, 5],
        minimized=True,
        sets={"all": tuple(range(6)), "phi": (0, 1, 2, 3, 4)},
    )
    return u, ComputerSet(u, (0, 1, 2, 3, 4))


def toggle_universe() -> tuple[Universe, ComputerSet]:
    """Four states (labeling, last bit) with the labeling toggled on ones.

    State (f, w) outputs f(w), where f is one of the two bijections from the
    last input bit to an output bit. Reading 0 keeps f and records w=0;
    reading 1 swaps f and records w=1. Strongly connected and aperiodic,
    uniform stationary vector, closed under output complement exactly and
    fixed by the order-1 input flip.

    State order: (id,0), (id,1), (swap,0), (swap,1).
    """
    u = Universe(
        outs=["0", "1", "1", "0"],
        step0=[0, 0, 2, 2],
        step1=[3, 3, 1, 1],
        minimized=True,
        sets={"all": (0, 1, 2, 3)},
    )
    return u, ComputerSet.whole(u)


FIXTURES = {
    "two-state": two_state_universe,
    "figure3": uneven_tree_universe,
    "toggle": toggle_universe,
}


# -- prefix-constant machines ------------------------------------------------


@dataclass(frozen=True)
class PrefixProgramTable:
    """Finite prefix-free program table: (program, output) pairs."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        problems = []
        for prog, out in self.entries:
            if not is_bits(prog):
                problems.append(f"program {prog!r} is not a bit string")
            if not is_bits(out):
                problems.append(f"output {out!r} is not a bit string")
        progs = [p for p, _ in self.entries]
        if len(set(progs)) != len(progs):
            problems.append("duplicate programs")
        for a, b in itertools.combinations(progs, 2):
            if a.startswith(b) or b.startswith(a):
                problems.append(f"programs {a!r} and {b!r} violate prefix-freeness")
        if problems:
            raise ValidationError(problems)

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 1 << len(p)) for p, _ in self.entries), Fraction(0))


def prefix_constant(table: PrefixProgramTable) -> tuple[Universe, int]:
    """Tree machine of a prefix-free table.

    Along a program path the output stays undefined until the program
    completes, after which the machine sits in an absorbing state emitting
    the program's output; paths leaving the table are absorbed undefined.
    Returns the minimized machine and its root.
    """
    lookup = dict(table.entries)
    prefixes: set[str] = set()
    for prog, _ in table.entries:
        for i in range(len(prog)):
            prefixes.add(prog[:i])
    if "" in lookup:
        prefixes.discard("")
    nodes = sorted(prefixes, key=lambda s: (len(s), s))
    index = {x: i for i, x in enumerate(nodes)}
    n_trie = len(nodes)
    done_index = {prog: n_trie + i for i, (prog, _) in enumerate(table.entries)}
    sink = n_trie + len(table.entries)

    outs: list[Output] = [None] * n_trie
    outs += [out for _, out in table.entries]
    outs.append(None)
    step0 = [0] * (sink + 1)
    step1 = [0] * (sink + 1)

    def target(x: str) -> int:
        if x in done_index:
            return done_index[x]
        if x in index:
            return index[x]
        return sink

    for x, i in index.items():
        step0[i] = target(x + "0")
        step1[i] = target(x + "1")
    for prog, i in done_index.items():
        step0[i] = i
        step1[i] = i
    step0[sink] = sink
    step1[sink] = sink

    if "" in lookup:
        root = done_index[""]
    elif nodes:
        root = index[""]
    else:
        root = sink
    u = Universe(outs, step0, step1)
    mu, mapping = u.minimize()
    return mu, mapping[root]


def adjoin_bad(u: Universe, nice: int, s: str) -> tuple[Universe, int]:
    """Attach a root that answers s on input 0, defers to `nice` after a 1.

    The fresh root is undefined on the empty input, produces s once on the
    single input "0" (then goes undefined forever), and emulates the given
    computer after the prefix "1". Output frequency of s at depth one from
    the root is therefore at least one half.
    """
    u.check_state(nice)
    if not is_bits(s):
        raise DomainError(f"output {s!r} is not a bit string")
    if len(s) > MAX_OUTPUT_BITS:
        raise DomainError(f"output longer than {MAX_OUTPUT_BITS} bits")
    n = u.n_states
    root, payload, sink = n, n + 1, n + 2
    outs = list(u.outs) + [None, s, None]
    step0 = list(u.step0) + [payload, sink, sink]
    step1 = list(u.step1) + [nice, sink, sink]
    combined = Universe(outs, step0, step1)
    mu, mapping = combined.minimize()
    return mu, mapping[root]


# -- the self-copying family -------------------------------------------------


@dataclass(frozen=True)
class VirusChain:
    """Abstract block chain of the self-copying family.

    Member i consumes one block of i bits; every non-zero block moves to
    member i+1 (probability 1 - 2^-i on fair bits), the all-zero block exits
    to the reference computer (probability 2^-i).
    """

    max_index: int

    def __post_init__(self):
        if self.max_index < 2:
            raise DomainError("family needs max index at least 2")

    def pass_probability(self, i: int) -> Fraction:
        if not 1 <= i < self.max_index:
            raise DomainError(f"block {i} outside family range")
        return 1 - Fraction(1, 1 << i)

    def survival_product(self, horizon: int) -> Fraction:
        """Exact probability of passing blocks 1..horizon-1."""
        if not 2 <= horizon <= self.max_index:
            raise DomainError("horizon must lie within the family")
        out = Fraction(1)
        for i in range(1, horizon):
            out *= self.pass_probability(i)
        return out


def virus_chain(max_index: int) -> VirusChain:
    return VirusChain(max_index)


def virus_machines(
    max_index: int, reference_universe: Universe, reference: int
) -> tuple[Universe, list[int], int]:
    """Concrete transition-system realization of the self-copying family.

    Member M_i outputs i-1 ones on the empty input and reads its block of i
    bits while tracking only the offset and an all-zeros-so-far flag; the
    all-zero block exits to the reference computer, anything else lands on
    M_{i+1} (the top member restarts itself, closing the finite family).
    State count is quadratic in max_index plus the reference universe.

    Returns the minimized universe, the member states M_1..M_max, and the
    image of the reference state.
    """
    if max_index < 2:
        raise DomainError("family needs max index at least 2")
    if max_index - 1 > MAX_OUTPUT_BITS:
        raise DomainError(f"member outputs exceed the {MAX_OUTPUT_BITS}-bit cap")
    reference_universe.check_state(reference)

    r = reference_universe.n_states
    outs: list[Output] = list(reference_universe.outs)
    step0 = list(reference_universe.step0)
    step1 = list(reference_universe.step1)

    idx: dict[tuple[int, int, bool], int] = {}
    for i in range(1, max_index + 1):
        for j in range(i):
            flags = (True,) if j == 0 else (True, False)
            for z in flags:
                idx[(i, j, z)] = len(outs)
                outs.append("1" * (i - 1))
                step0.append(0)
                step1.append(0)

    def after(i: int, j: int, z: bool, bit: int) -> int:
        zeros = z and bit == 0
        if j + 1 < i:
            return idx[(i, j + 1, zeros)]
        if zeros:
            return reference
        nxt = i + 1 if i < max_index else max_index
        return idx[(nxt, 0, True)]

    for (i, j, z), q in idx.items():
        step0[q] = after(i, j, z, 0)
        step1[q] = after(i, j, z, 1)

    combined = Universe(outs, step0, step1)
    mu, mapping = combined.minimize()
    members = [mapping[idx[(i, 0, True)]] for i in range(1, max_index + 1)]
    return mu, members, mapping[reference]


# -- synchronizing-word product ----------------------------------------------


@dataclass(frozen=True)
class SyncResult:
    universe: Universe
    phi: ComputerSet
    reset_state: int  # V: the computer every input window equal to the word forces
    word: str


def synchronizing_universe(word: str, base: Universe) -> SyncResult:
    """De-Bruijn product of a base universe with a window of trailing bits.

    Every state pairs a base computer with the last |word|-1 input bits;
    whenever the window extended by the incoming bit equals the word, the
    base component resets to the base's designated universal state instead
    of stepping. Feeding the word therefore lands every state on the same
    reset computer, so the walk forgets its past within |word| steps.

    Some base/window combinations can never arise from a real input history
    (they have no in-edges), so the member set returned is the mutual
    emulation core around the reset computer: the closure of {reset} under
    emulating-and-emulated-by, which every one of its members leaves for the
    reset computer within |word| steps.
    """
    if not is_bits(word):
        raise DomainError(f"word {word!r} is not a bit string")
    if len(word) < 2:
        raise DomainError("synchronizing word must have length at least 2")
    if not base.minimized:
        base, _ = base.minimize()
    u0 = min(universal_members(ComputerSet.whole(base)).members)
    ell = len(word)
    windows = ["".join(b) for b in itertools.product("01", repeat=ell - 1)]
    win_index = {w: i for i, w in enumerate(windows)}

    def idx(q: int, w: str) -> int:
        return q * len(windows) + win_index[w]

    outs: list[Output] = []
    step0: list[int] = []
    step1: list[int] = []
    for q in range(base.n_states):
        for w in windows:
            outs.append(base.outs[q])
            targets = []
            for bit in (0, 1):
                w2 = w + "01"[bit]
                if w2 == word:
                    targets.append(idx(u0, w2[1:]))
                else:
                    targets.append(idx(base.step(q, bit), w2[1:]))
            step0.append(targets[0])
            step1.append(targets[1])

    product = Universe(outs, step0, step1)
    mu, mapping = product.minimize()
    v = mu.walk(mapping[idx(u0, windows[0])], word)
    phi = closure_universal(ComputerSet(mu, (v,)))
    return SyncResult(universe=mu, phi=phi, reset_state=v, word=word)


# -- output transformations ----------------------------------------------------


class OutputPermutation:
    """Bijection on a finite alphabet of defined outputs; undefined is fixed."""

    def __init__(self, mapping: dict[str, str], name: str = "output-permutation"):
        self.name = name
        problems = []
        for k, v in mapping.items():
            if not is_bits(k) or not is_bits(v):
                problems.append(f"entry {k!r} -> {v!r} is not a bit-string pair")
        if set(mapping) != set(mapping.values()):
            problems.append("mapping is not a bijection on its alphabet")
        if problems:
            raise ValidationError(problems)
        self.mapping = dict(mapping)

    def apply(self, s: Output) -> Output:
        if s is None:
            return None
        if s not in self.mapping:
            raise DomainError(f"output {s!r} outside permutation alphabet")
        return self.mapping[s]

    def inverse(self) -> "OutputPermutation":
        return OutputPermutation(
            {v: k for k, v in self.mapping.items()}, name=self.name + "-inverse"
        )

    def __eq__(self, other):
        return isinstance(other, OutputPermutation) and self.mapping == other.mapping

    def __repr__(self):
        return f"OutputPermutation({self.name})"


def complement_bits(s: str) -> str:
    return "".join("1" if c == "0" else "0" for c in s)


def complement_permutation(alphabet: Iterable[Output]) -> OutputPermutation:
    """Bitwise complement on the alphabet, closed under complementation."""
    closed: dict[str, str] = {}
    for s in alphabet:
        if s is None:
            continue
        closed[s] = complement_bits(s)
        closed[complement_bits(s)] = s
    return OutputPermutation(closed, name="complement")


def output_transform(u: Universe, sigma: OutputPermutation) -> tuple[Universe, list[int]]:
    """Relabel every output through sigma; transitions are untouched.

    The identity state map is returned for uniformity with input
    transforms. Relabeling by a bijection preserves minimality.
    """
    outs = [sigma.apply(s) for s in u.outs]
    return (
        Universe(outs, u.step0, u.step1, minimized=u.minimized, sets=u.sets),
        list(range(u.n_states)),
    )


# -- input transformations -----------------------------------------------------


class InputPermutationTable:
    """Bijection on the blocks of n bits, applied to the last n input bits."""

    def __init__(self, order: int, mapping: dict[str, str], name: str | None = None):
        problems = []
        if order < 1:
            problems.append("order must be at least 1")
        else:
            domain = {"".join(bits) for bits in itertools.product("01", repeat=order)}
            if set(mapping) != domain or set(mapping.values()) != domain:
                problems.append(f"mapping is not a bijection on blocks of {order} bits")
        if problems:
            raise ValidationError(problems)
        self.order = order
        self.mapping = dict(mapping)
        self.name = name or "".join(mapping["".join(b)] for b in
                                    itertools.product("01", repeat=order))

    @property
    def proper(self) -> bool:
        """True when some block changes its first bit (the non-degenerate case)."""
        return any(k[0] != v[0] for k, v in self.mapping.items())

    def is_identity(self) -> bool:
        return all(k == v for k, v in self.mapping.items())

    def apply_string(self, s: str) -> str:
        """Permute the last `order` bits; strings shorter than that are fixed."""
        if len(s) < self.order:
            return s
        return s[: -self.order] + self.mapping[s[-self.order:]]

    def __eq__(self, other):
        return (
            isinstance(other, InputPermutationTable)
            and self.order == other.order
            and self.mapping == other.mapping
        )

    def __repr__(self):
        return f"InputPermutationTable(order={self.order}, {self.name})"


def identity_table(order: int) -> InputPermutationTable:
    blocks = ["".join(b) for b in itertools.product("01", repeat=order)]
    return InputPermutationTable(order, {b: b for b in blocks}, name="identity")


def flip_table() -> InputPermutationTable:
    return InputPermutationTable(1, {"0": "1", "1": "0"}, name="flip")


def all_input_tables(order: int) -> list[InputPermutationTable]:
    """Every bijection on blocks of `order` bits (identity included)."""
    if order > 3:
        raise DomainError("input tables beyond order 3 are unsupported (2^n! explosion)")
    blocks = ["".join(b) for b in itertools.product("01", repeat=order)]
    tables = []
    for perm in itertools.permutations(blocks):
        tables.append(InputPermutationTable(order, dict(zip(blocks, perm))))
    return tables


def input_transform(
    u: Universe, sigma: InputPermutationTable
) -> tuple[Universe, list[int]]:
    """Pre-compose every computer with the last-bits permutation.

    Realized as a delay line: the machine buffers up to `order` trailing
    bits and feeds older bits through unchanged; the output is read after
    pushing the permuted buffer (the raw buffer while it is still filling).
    The result is minimized; the returned map sends each original state to
    the root of its transformed machine.
    """
    n = sigma.order
    bufs = [""]
    for ln in range(1, n + 1):
        bufs += ["".join(b) for b in itertools.product("01", repeat=ln)]
    buf_index = {b: i for i, b in enumerate(bufs)}
    per_state = len(bufs)

    def idx(q: int, buf: str) -> int:
        return q * per_state + buf_index[buf]

    outs: list[Output] = []
    step0: list[int] = []
    step1: list[int] = []
    for q in range(u.n_states):
        for buf in bufs:
            fed = sigma.mapping[buf] if len(buf) == n else buf
            outs.append(u.outs[u.walk(q, fed)])
            targets = []
            for bit in (0, 1):
                b2 = buf + "01"[bit]
                if len(b2) <= n:
                    targets.append(idx(q, b2))
                else:
                    targets.append(idx(u.step(q, int(b2[0])), b2[1:]))
            step0.append(targets[0])
            step1.append(targets[1])

    product = Universe(outs, step0, step1)
    mu, mapping = product.minimize()
    return mu, [mapping[idx(q, "")] for q in range(u.n_states)]


# -- k-equivalence quotients ---------------------------------------------------


@dataclass(frozen=True)
class QuotientResult:
    """Partition of a member set by k-equivalence with its class chain."""

    k: int
    classes: tuple[tuple[int, ...], ...]  # member states per class, set order
    matrix: EmulationMatrix  # rows/columns indexed by class, members = class reps
    class_of: dict[int, int] = field(compare=False)


def quotient_k(phi: ComputerSet, k: int) -> QuotientResult:
    """Quotient the member chain by agreement on all inputs of length >= k.

    Requires the set to contain every universe state k-equivalent to a
    member (relative completeness), and checks that class transition
    probabilities do not depend on the representative.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    u = phi.u
    if not is_branching(phi):
        raise ContractError("quotient requires a branching computer set")
    ids = k_partition(u, k)
    member_classes = {ids[m] for m in phi.members}
    outside = [
        q for q in range(u.n_states) if ids[q] in member_classes and q not in phi
    ]
    if outside:
        raise ContractError(
            f"set is not complete at k={k}: states {outside} are k-equivalent "
            "to members but excluded"
        )

    class_order: dict[int, int] = {}
    for m in phi.members:
        class_order.setdefault(ids[m], len(class_order))
    classes: list[list[int]] = [[] for _ in class_order]
    class_of: dict[int, int] = {}
    for m in phi.members:
        c = class_order[ids[m]]
        classes[c].append(m)
        class_of[m] = c

    base = emulation_matrix(phi)
    n_classes = len(classes)
    rows: list[tuple[Fraction, ...]] = []
    for members in classes:
        candidate: Optional[tuple[Fraction, ...]] = None
        for m in members:
            row = [Fraction(0)] * n_classes
            for j, q in enumerate(phi.members):
                p = base.rows[base.index(m)][j]
                if p:
                    row[class_of[q]] += p
            row_t = tuple(row)
            if candidate is None:
                candidate = row_t
            elif candidate != row_t:
                raise ContractError(
                    f"class transition probabilities depend on the representative "
                    f"(class of state {members[0]}): set is not consistent at k={k}"
                )
        rows.append(candidate)
    matrix = EmulationMatrix(tuple(c[0] for c in classes), tuple(rows))
    return QuotientResult(
        k=k,
        classes=tuple(tuple(c) for c in classes),
        matrix=matrix,
        class_of=class_of,
    )


# -- closure under transformations ----------------------------------------------


def _apply_transform(u: Universe, t) -> tuple[Universe, list[int]]:
    if isinstance(t, OutputPermutation):
        return output_transform(u, t)
    if isinstance(t, InputPermutationTable):
        return input_transform(u, t)
    raise DomainError(f"unsupported transform {t!r}")


def _restrict_reachable(u: Universe, keep: Sequence[int]) -> tuple[Universe, dict[int, int]]:
    """Sub-universe of everything reachable from `keep`, original order."""
    seen = set(keep)
    todo = list(keep)
    while todo:
        q = todo.pop()
        for t in (u.step0[q], u.step1[q]):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    kept = sorted(seen)
    remap = {q: i for i, q in enumerate(kept)}
    sub = Universe(
        [u.outs[q] for q in kept],
        [remap[u.step0[q]] for q in kept],
        [remap[u.step1[q]] for q in kept],
        minimized=u.minimized,
    )
    return sub, remap


@dataclass(frozen=True)
class ClosureResult:
    phi: ComputerSet
    added: int
    closed: tuple[str, ...]  # names of transforms confirmed closed at fixpoint


def close_under(phi: ComputerSet, transforms: Sequence, max_states: int = 256) -> ClosureResult:
    """Grow the member set until it is closed under every given transform.

    Each round embeds the transformed machines next to the current universe,
    minimizes, and adds any member image that is a new function. Raises
    ResourceError naming the offending transform when the universe would
    outgrow max_states.
    """
    u = phi.u
    members = list(phi.members)
    added = 0
    changed = True
    while changed:
        changed = False
        for t in transforms:
            tu, imap = _apply_transform(u, t)
            joint, off = disjoint_union(u, tu)
            mini, mapping = joint.minimize()
            new_members = list(dict.fromkeys(mapping[m] for m in members))
            images = [mapping[off + imap[m]] for m in members]
            for img in images:
                if img not in new_members:
                    new_members.append(img)
                    added += 1
                    changed = True
            u, remap = _restrict_reachable(mini, new_members)
            members = [remap[m] for m in new_members]
            if u.n_states > max_states:
                raise ResourceError(
                    f"closure under {getattr(t, 'name', t)!r} exceeded "
                    f"{max_states} states"
                )
    names = tuple(getattr(t, "name", repr(t)) for t in transforms)
    return ClosureResult(phi=ComputerSet(u, tuple(members)), added=added, closed=names)


def closed_under_transform(phi: ComputerSet, t, k: Optional[int] = None) -> bool:
    """Is every member's transform already a member (up to k-equivalence)?

    With k=None the comparison is exact functional equality; otherwise
    membership is checked at the k-equivalence level.
    """
    u = phi.u
    tu, imap = _apply_transform(u, t)
    joint, off = disjoint_union(u, tu)
    if k is None:
        ids = joint.partition()
    else:
        mini, mapping = joint.minimize()
        kids = k_partition(mini, k)
        ids = [kids[mapping[q]] for q in range(joint.n_states)]
    member_ids = {ids[m] for m in phi.members}
    return all(ids[off + imap[m]] in member_ids for m in phi.members)


def input_symmetry_group(phi: ComputerSet, n: int) -> list[InputPermutationTable]:
    """All tables of order <= n whose input transform fixes the members.

    Fixing one member of an irreducible set fixes them all, so a single
    member is tested, by exact functional comparison of the transformed
    machine against the original. Identity tables always qualify.
    """
    report = classify(phi)
    if not report.irreducible:
        raise ContractError("input symmetry group needs an irreducible set")
    if n > 3:
        raise DomainError("orders beyond 3 are unsupported (2^n! explosion)")
    u = phi.u
    witness = phi.members[0]
    group = []
    for order in range(1, n + 1):
        for table in all_input_tables(order):
            tu, imap = input_transform(u, table)
            if same_function(tu, imap[witness], u, witness):
                group.append(table)
    return group


# -- random generators for tests and property suites ---------------------------


_ALPHABET = ("0", "1", "00", "01", "10", "11")


def random_universe_set(
    seed: int,
    max_states: int = 12,
    require_aperiodic: bool = True,
    allow_undefined: bool = False,
    max_attempts: int = 2000,
) -> tuple[Universe, ComputerSet]:
    """Random minimized strongly-connected universe with its whole-state set."""
    rng = random.Random(seed)
    outputs: tuple[Output, ...] = _ALPHABET + ((None,) if allow_undefined else ())
    for _ in range(max_attempts):
        n = rng.randint(2, max_states)
        outs = [rng.choice(outputs) for _ in range(n)]
        step0 = [rng.randrange(n) for _ in range(n)]
        step1 = [rng.randrange(n) for _ in range(n)]
        mu, _ = Universe(outs, step0, step1).minimize()
        if mu.n_states < 2:
            continue
        phi = ComputerSet.whole(mu)
        report = classify(phi)
        if report.chain_class == ChainClass.POSITIVE_RECURRENT_FINITE:
            return mu, phi
        if report.chain_class == ChainClass.PERIODIC_FINITE and not require_aperiodic:
            return mu, phi
    raise InternalError("could not sample a strongly connected universe")


def random_mirrored_universe(
    seed: int, half_states: int = 5, max_attempts: int = 5000
) -> tuple[Universe, ComputerSet, OutputPermutation]:
    """Random positive-recurrent universe closed under output complement.

    States come in mirror pairs (i, i+m) with complemented outputs and
    mirrored transitions, so complementing the whole universe permutes its
    functions; the complement permutation over the universe's alphabet is
    returned alongside.
    """
    rng = random.Random(seed)
    palette = ("0", "1", "01", "10", "00", "11")
    m = half_states
    for _ in range(max_attempts):
        outs = [rng.choice(palette) for _ in range(m)]
        step0 = [rng.randrange(2 * m) for _ in range(m)]
        step1 = [rng.randrange(2 * m) for _ in range(m)]

        def mirror(q: int) -> int:
            return q + m if q < m else q - m

        full = Universe(
            outs + [complement_bits(s) for s in outs],
            step0 + [mirror(t) for t in step0],
            step1 + [mirror(t) for t in step1],
        )
        mu, _ = full.minimize()
        if mu.n_states < 2:
            continue
        phi = ComputerSet.whole(mu)
        if classify(phi).chain_class != ChainClass.POSITIVE_RECURRENT_FINITE:
            continue
        sigma = complement_permutation(mu.alphabet())
        return mu, phi, sigma
    raise InternalError("could not sample a mirrored positive-recurrent universe")


def random_prefix_table(
    seed: int, max_depth: int = 8, max_entries: int = 6
) -> PrefixProgramTable:
    """Random prefix-free program table with bounded program length."""
    rng = random.Random(seed)
    entries: list[tuple[str, str]] = []
    attempts = 0
    while len(entries) < max_entries and attempts < 200:
        attempts += 1
        length = rng.randint(1, max_depth)
        prog = "".join(rng.choice("01") for _ in range(length))
        if any(prog.startswith(p) or p.startswith(prog) for p, _ in entries):
            continue
        out = "".join(rng.choice("01") for _ in range(rng.randint(0, 4)))
        entries.append((prog, out))
    return PrefixProgramTable(tuple(entries))
