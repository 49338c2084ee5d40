"""Finite computer universes.

A universe is a total deterministic transition system over the binary
alphabet: every state has exactly one 0-successor and one 1-successor, plus
an output label that is either a finite bit string or ``None`` (the explicit
"undefined" output standing in for non-halting). State ``q`` denotes the
computer mapping an input string ``x`` to the output label of the state
reached from ``q`` by consuming ``x``.

On a *minimized* universe no two distinct states denote the same function,
so questions about the denoted computers (equality, emulation, complexity)
reduce to decidable questions about states.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Optional

from .errors import ContractError, DomainError, ParseError, ValidationError

# An output is a finite bit string, or None for "undefined".
Output = Optional[str]

MAX_OUTPUT_BITS = 64

_FIELDS = ("id", "out", "t0", "t1")


def is_bits(s: str) -> bool:
    return isinstance(s, str) and all(c in "01" for c in s)


class Universe:
    """Immutable total bit-transition system with per-state outputs.

    State indices are dense (0..N-1) and their order is canonical: it fixes
    matrix row indexing everywhere downstream. ``sets`` holds named state
    subsets carried along from the file format.
    """

    __slots__ = ("outs", "step0", "step1", "minimized", "sets")

    def __init__(
        self,
        outs: Iterable[Output],
        step0: Iterable[int],
        step1: Iterable[int],
        minimized: bool = False,
        sets: Mapping[str, Iterable[int]] | None = None,
        max_output_bits: int = MAX_OUTPUT_BITS,
    ):
        self.outs = tuple(outs)
        self.step0 = tuple(step0)
        self.step1 = tuple(step1)
        self.minimized = bool(minimized)
        self.sets = {k: tuple(v) for k, v in (sets or {}).items()}
        problems = []
        n = len(self.outs)
        if n == 0:
            problems.append("universe has no states")
        if len(self.step0) != n or len(self.step1) != n:
            problems.append(
                "transition tables must cover every state exactly once "
                f"(got {len(self.step0)} zero-edges, {len(self.step1)} one-edges, {n} states)"
            )
        else:
            for q in range(n):
                for bit, t in ((0, self.step0[q]), (1, self.step1[q])):
                    if not isinstance(t, int) or not (0 <= t < n):
                        problems.append(f"state {q}: {bit}-edge target {t!r} out of range")
            for q, out in enumerate(self.outs):
                if out is None:
                    continue
                if not is_bits(out):
                    problems.append(f"state {q}: output {out!r} is not a bit string")
                elif len(out) > max_output_bits:
                    problems.append(
                        f"state {q}: output length {len(out)} exceeds cap {max_output_bits}"
                    )
            for name, members in self.sets.items():
                bad = [m for m in members if not (isinstance(m, int) and 0 <= m < n)]
                if bad:
                    problems.append(f"set {name!r}: members {bad} out of range")
                if len(set(members)) != len(members):
                    problems.append(f"set {name!r}: duplicate members")
        if problems:
            raise ValidationError(problems)

    @property
    def n_states(self) -> int:
        return len(self.outs)

    def check_state(self, q: int) -> None:
        if not (isinstance(q, int) and 0 <= q < self.n_states):
            raise DomainError(f"unknown state id {q!r} (universe has {self.n_states} states)")

    def step(self, q: int, bit: int) -> int:
        return self.step1[q] if bit else self.step0[q]

    def walk(self, q: int, x: str) -> int:
        """State reached from q after consuming the bit string x."""
        self.check_state(q)
        if not is_bits(x):
            raise DomainError(f"input {x!r} is not a bit string")
        for c in x:
            q = self.step1[q] if c == "1" else self.step0[q]
        return q

    def evaluate(self, q: int, x: str) -> Output:
        """Output of the computer denoted by q on input x."""
        return self.outs[self.walk(q, x)]

    def alphabet(self) -> list[Output]:
        """Distinct outputs in state order, the defined ones first, then None."""
        seen: dict[Output, None] = {}
        for out in self.outs:
            if out is not None:
                seen.setdefault(out, None)
        result: list[Output] = list(seen)
        if any(out is None for out in self.outs):
            result.append(None)
        return result

    def __eq__(self, other):
        if not isinstance(other, Universe):
            return NotImplemented
        return (
            self.outs == other.outs
            and self.step0 == other.step0
            and self.step1 == other.step1
            and self.sets == other.sets
        )

    def __hash__(self):
        return hash((self.outs, self.step0, self.step1))

    def __repr__(self):
        return f"Universe(n_states={self.n_states}, minimized={self.minimized})"

    # -- minimization ------------------------------------------------------

    def partition(self) -> list[int]:
        """Block id per state of the coarsest bisimulation partition.

        Partition refinement: start from the partition induced by the output
        labels, then repeatedly split blocks by the successor block pair
        until a fixpoint. Two states end in the same block iff they denote
        the same function.
        """
        block = {}
        ids = []
        for out in self.outs:
            if out not in block:
                block[out] = len(block)
            ids.append(block[out])
        while True:
            sig_ids: dict[tuple[int, int, int], int] = {}
            new_ids = []
            for q in range(self.n_states):
                sig = (ids[q], ids[self.step0[q]], ids[self.step1[q]])
                if sig not in sig_ids:
                    sig_ids[sig] = len(sig_ids)
                new_ids.append(sig_ids[sig])
            if new_ids == ids:
                return ids
            ids = new_ids

    def is_minimal(self) -> bool:
        return len(set(self.partition())) == self.n_states

    def minimize(self) -> tuple["Universe", list[int]]:
        """Quotient by functional equality.

        Returns the minimized universe and the state map old -> new. New
        states are ordered by first appearance of their block, so minimizing
        a minimal universe is the identity on indices.
        """
        ids = self.partition()
        order: dict[int, int] = {}
        for q in range(self.n_states):
            if ids[q] not in order:
                order[ids[q]] = len(order)
        mapping = [order[ids[q]] for q in range(self.n_states)]
        n_new = len(order)
        outs: list[Output] = [None] * n_new
        step0 = [0] * n_new
        step1 = [0] * n_new
        for q in range(self.n_states):
            m = mapping[q]
            outs[m] = self.outs[q]
            step0[m] = mapping[self.step0[q]]
            step1[m] = mapping[self.step1[q]]
        sets = {
            name: tuple(dict.fromkeys(mapping[q] for q in members))
            for name, members in self.sets.items()
        }
        return (
            Universe(outs, step0, step1, minimized=True, sets=sets),
            mapping,
        )


def k_equivalent(u: Universe, c: int, d: int, k: int) -> bool:
    """True iff c and d reach the same state on every input of length k.

    On a minimized universe this says the denoted computers agree on every
    input of length >= k. Computed on state pairs, not by enumerating the
    2^k inputs.
    """
    if not u.minimized:
        raise ContractError("k_equivalent requires a minimized universe")
    u.check_state(c)
    u.check_state(d)
    if k < 0:
        raise DomainError("k must be non-negative")
    pairs = {(c, d)}
    for _ in range(k):
        pairs = {
            (u.step(p, b), u.step(q, b))
            for (p, q) in pairs
            for b in (0, 1)
        }
    return all(p == q for p, q in pairs)


def k_partition(u: Universe, k: int) -> list[int]:
    """Class id per state of the k-equivalence partition (minimized u)."""
    if not u.minimized:
        raise ContractError("k_partition requires a minimized universe")
    ids = list(range(u.n_states))
    for _ in range(k):
        sig_ids: dict[tuple[int, int], int] = {}
        new_ids = []
        for q in range(u.n_states):
            sig = (ids[u.step0[q]], ids[u.step1[q]])
            if sig not in sig_ids:
                sig_ids[sig] = len(sig_ids)
            new_ids.append(sig_ids[sig])
        ids = new_ids
    return ids


def disjoint_union(a: Universe, b: Universe) -> tuple[Universe, int]:
    """Side-by-side union of two universes; returns (union, offset of b)."""
    n = a.n_states
    return (
        Universe(
            a.outs + b.outs,
            a.step0 + tuple(t + n for t in b.step0),
            a.step1 + tuple(t + n for t in b.step1),
        ),
        n,
    )


def same_function(ua: Universe, qa: int, ub: Universe, qb: int) -> bool:
    """Exact functional equality of two states, possibly across universes."""
    union, off = disjoint_union(ua, ub)
    ids = union.partition()
    return ids[qa] == ids[off + qb]


# -- file format -----------------------------------------------------------


def load(text: str, max_output_bits: int = MAX_OUTPUT_BITS) -> Universe:
    """Parse a universe file.

    Field-shape problems (non-JSON text, wrong types, non-bit outputs,
    unknown fields) raise ParseError; constraint violations (ids not dense
    and ordered, targets out of range, missing edges, overlong outputs) are
    collected into one ValidationError.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    unknown = set(doc) - {"version", "states", "sets"}
    if unknown:
        raise ParseError(f"unknown top-level fields: {sorted(unknown)}")
    if doc.get("version") != 1:
        raise ParseError(f"unsupported version {doc.get('version')!r} (expected 1)")
    states = doc.get("states")
    if not isinstance(states, list):
        raise ParseError('"states" must be a list')

    violations = []
    outs: list[Output] = []
    step0: list[int] = []
    step1: list[int] = []
    for pos, entry in enumerate(states):
        if not isinstance(entry, dict):
            raise ParseError(f"states[{pos}] must be an object")
        unknown = set(entry) - set(_FIELDS)
        if unknown:
            raise ParseError(f"states[{pos}]: unknown fields {sorted(unknown)}")
        if not isinstance(entry.get("id"), int):
            raise ParseError(f"states[{pos}]: missing or non-integer id")
        if entry["id"] != pos:
            violations.append(f"states[{pos}]: id {entry['id']} out of order (ids must be 0..N-1)")
        out = entry.get("out", "missing")
        if out == "missing":
            raise ParseError(f"states[{pos}]: missing output field")
        if out is not None and not is_bits(out):
            raise ParseError(f"states[{pos}]: output {out!r} must be a bit string or null")
        outs.append(out)
        for key, acc in (("t0", step0), ("t1", step1)):
            if key not in entry:
                violations.append(f"states[{pos}]: missing {key} edge")
                acc.append(0)
            elif not isinstance(entry[key], int):
                raise ParseError(f"states[{pos}]: {key} must be an integer state id")
            else:
                acc.append(entry[key])

    sets = doc.get("sets", {})
    if not isinstance(sets, dict) or not all(
        isinstance(k, str) and isinstance(v, list) for k, v in sets.items()
    ):
        raise ParseError('"sets" must map names to lists of state ids')

    if violations:
        raise ValidationError(violations)
    try:
        u = Universe(outs, step0, step1, sets=sets, max_output_bits=max_output_bits)
    except ValidationError:
        raise
    if u.is_minimal():
        u = Universe(outs, step0, step1, minimized=True, sets=sets,
                     max_output_bits=max_output_bits)
    return u


def serialize(u: Universe) -> str:
    """Canonical text rendering; load(serialize(u)) == u."""
    doc = {
        "version": 1,
        "states": [
            {"id": q, "out": u.outs[q], "t0": u.step0[q], "t1": u.step1[q]}
            for q in range(u.n_states)
        ],
        "sets": {name: list(members) for name, members in sorted(u.sets.items())},
    }
    return json.dumps(doc, indent=2) + "\n"
