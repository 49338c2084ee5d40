"""Emulation structure of a computer set.

On a minimized universe, the computer reached from c by consuming x *is* the
state ``walk(c, x)``, so emulation between computers is plain reachability in
the step graph. This module provides the set-level notions built on that:
universal members, the closure of universal members, the branching property
that makes the random walk conserve probability, walk trees, and the two
complexity measures (shortest emulation witness, shortest program).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import ContractError, DomainError
from .universe import Output, Universe, is_bits


def _require_minimized(u: Universe) -> None:
    if not u.minimized:
        raise ContractError(
            "this operation needs a minimized universe (state identity must "
            "coincide with functional identity); call Universe.minimize() first"
        )


@dataclass(frozen=True)
class ComputerSet:
    """An ordered subset of a minimized universe's states.

    Member order is the enumeration used for matrix rows and vector indices.
    """

    u: Universe
    members: tuple[int, ...]
    _member_set: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _require_minimized(self.u)
        if not self.members:
            raise DomainError("computer set must be non-empty")
        for q in self.members:
            self.u.check_state(q)
        if len(set(self.members)) != len(self.members):
            raise DomainError("computer set has duplicate members")
        object.__setattr__(self, "_member_set", frozenset(self.members))

    def __contains__(self, q: int) -> bool:
        return q in self._member_set

    def __len__(self) -> int:
        return len(self.members)

    def index(self, q: int) -> int:
        return self.members.index(q)

    @staticmethod
    def whole(u: Universe) -> "ComputerSet":
        return ComputerSet(u, tuple(range(u.n_states)))


def emulate_via(u: Universe, c: int, x: str) -> int:
    """The computer c emulates via x: the state reached by consuming x."""
    _require_minimized(u)
    return u.walk(c, x)


def reachable_from(u: Universe, c: int) -> set[int]:
    """All states reachable from c (including c, via the empty string)."""
    u.check_state(c)
    seen = {c}
    todo = deque([c])
    while todo:
        q = todo.popleft()
        for t in (u.step0[q], u.step1[q]):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def universal_members(phi: ComputerSet) -> ComputerSet:
    """Members that emulate every member (reach all of phi in the step graph)."""
    want = set(phi.members)
    winners = tuple(
        c for c in phi.members if want <= reachable_from(phi.u, c)
    )
    if not winners:
        raise DomainError("computer set has no universal member (set is not connected)")
    return ComputerSet(phi.u, winners)


def closure_universal(phi: ComputerSet) -> ComputerSet:
    """All universe states that emulate every member and are emulated by one."""
    u = phi.u
    want = set(phi.members)
    emulated_by_phi: set[int] = set()
    for c in phi.members:
        emulated_by_phi |= reachable_from(u, c)
    winners = tuple(
        q
        for q in range(u.n_states)
        if q in emulated_by_phi and want <= reachable_from(u, q)
    )
    if not winners:
        raise DomainError("closure of universal members is empty (set is not connected)")
    return ComputerSet(u, winners)


def is_branching(phi: ComputerSet) -> bool:
    """Walk trees of phi have no dead ends and are closed under prefixes.

    Prefix closure fails exactly when some state outside phi lies on a path
    from a member back into phi, so it reduces to a reach/co-reach check on
    the non-members. The no-dead-end half asks each member to reach phi
    again in at least one step.
    """
    u = phi.u
    reach_phi = _co_reachable(u, phi._member_set)
    from_phi: set[int] = set()
    for c in phi.members:
        from_phi |= reachable_from(u, c)
    if any(q not in phi and q in reach_phi for q in from_phi):
        return False
    # with prefix closure settled, re-entry in one-or-more steps means an
    # immediate child is already a member
    return all(u.step0[c] in phi or u.step1[c] in phi for c in phi.members)


def _co_reachable(u: Universe, targets: frozenset[int]) -> set[int]:
    """States from which some target is reachable (targets included)."""
    preds: list[list[int]] = [[] for _ in range(u.n_states)]
    for q in range(u.n_states):
        preds[u.step0[q]].append(q)
        preds[u.step1[q]].append(q)
    seen = set(targets)
    todo = deque(targets)
    while todo:
        q = todo.popleft()
        for p in preds[q]:
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


@dataclass(frozen=True)
class PhiTree:
    """Walk tree of one member: all inputs keeping the walk inside the set."""

    root: int
    depth: int
    levels: tuple[tuple[str, ...], ...]  # levels[d] = nodes of length d, lex order

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(x for level in self.levels for x in level)


def phi_tree(c: int, phi: ComputerSet, depth: int) -> PhiTree:
    """Enumerate the walk tree of c to the given depth."""
    if c not in phi:
        raise DomainError(f"state {c} is not a member of the computer set")
    if depth < 0:
        raise DomainError("depth must be non-negative")
    if not is_branching(phi):
        raise ContractError("walk tree requires a branching computer set")
    u = phi.u
    levels = [("",)]
    frontier = [("", c)]
    for _ in range(depth):
        nxt = []
        for x, q in frontier:
            for bit, t in ((0, u.step0[q]), (1, u.step1[q])):
                if t in phi:
                    nxt.append((x + "01"[bit], t))
        frontier = nxt
        levels.append(tuple(x for x, _ in frontier))
    return PhiTree(root=c, depth=depth, levels=tuple(levels))


def emulation_complexity(u: Universe, c: int, d: int) -> Optional[int]:
    """Length of the shortest emulation witness from c to d; None if unreachable."""
    witness = emulation_witness(u, c, d)
    return None if witness is None else len(witness)


def emulation_witness(u: Universe, c: int, d: int) -> Optional[str]:
    """Lexicographically least shortest x with walk(c, x) == d; None if none."""
    _require_minimized(u)
    u.check_state(c)
    u.check_state(d)
    if c == d:
        return ""
    seen = {c}
    frontier = [(c, "")]
    while frontier:
        nxt = []
        for q, x in frontier:
            for bit, t in ((0, u.step0[q]), (1, u.step1[q])):
                if t == d:
                    return x + "01"[bit]
                if t not in seen:
                    seen.add(t)
                    nxt.append((t, x + "01"[bit]))
        frontier = nxt
    return None


def kolmogorov_complexity(u: Universe, c: int, s: Output, max_len: int = 64) -> Optional[int]:
    """Length of the shortest program for s on c, or None if none within max_len.

    A program is an input string; its output is the label of the reached
    state, so the search is a breadth-first scan of states by distance.
    """
    witness = kolmogorov_witness(u, c, s, max_len)
    return None if witness is None else len(witness)


def kolmogorov_witness(u: Universe, c: int, s: Output, max_len: int = 64) -> Optional[str]:
    """Lexicographically least shortest program for s on c within max_len."""
    _require_minimized(u)
    u.check_state(c)
    if s is not None and not is_bits(s):
        raise DomainError(f"target output {s!r} is not a bit string")
    if u.outs[c] == s:
        return ""
    seen = {c}
    frontier = [(c, "")]
    for _ in range(max_len):
        nxt = []
        for q, x in frontier:
            for bit, t in ((0, u.step0[q]), (1, u.step1[q])):
                if t in seen:
                    continue
                if u.outs[t] == s:
                    return x + "01"[bit]
                seen.add(t)
                nxt.append((t, x + "01"[bit]))
        if not nxt:
            return None
        frontier = nxt
    return None
