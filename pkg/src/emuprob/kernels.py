"""Bulk Monte-Carlo kernels: numba-jitted hot loops with a numpy fallback.

Two operations dominate sampling runtime: counting final states over many
walks, and counting never-deviating runs through the self-copying family.
Both are implemented twice — as numba @njit loops and as vectorized numpy —
over the exact same SplitMix64 draws, so the two backends produce identical
counts for identical seeds (tests assert this bit-for-bit).

Backend selection: numba when importable, unless the environment variable
``EMUPROB_KERNELS`` is set to ``numpy``. The flag is a performance knob
only; it can never change a result. ``benchmarks/bench_kernels.py`` times
one against the other.

Sample i (globally numbered) draws from the SplitMix64 stream seeded with
``substream_seed(seed, i)``; see rng.py. Partitioning samples across
workers therefore cannot change any count, and chunk results merge by
addition.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .rng import GAMMA

_ENV = os.environ.get("EMUPROB_KERNELS", "").strip().lower()
if _ENV not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"EMUPROB_KERNELS={_ENV!r} not understood (use 'numba' or 'numpy')"
    )

if _ENV == "numpy":
    _njit = None
else:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        _njit = None

ACTIVE_BACKEND = "numba" if _njit is not None else "numpy"

_G = np.uint64(GAMMA)
_ONE = np.uint64(1)
_M64 = (1 << 64) - 1


def _mix_np(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


# -- numpy implementations ---------------------------------------------------


def _virus_survivors_numpy(seed, first_index, horizon, n_samples):
    idx = np.arange(first_index + 1, first_index + n_samples + 1, dtype=np.uint64)
    sub = _mix_np(np.uint64(seed) + idx * _G)
    alive = np.ones(n_samples, dtype=bool)
    for i in range(1, horizon):
        z = _mix_np(sub + np.uint64((i * GAMMA) & _M64))
        mask = np.uint64((1 << i) - 1)
        alive &= (z & mask) != 0
    return int(alive.sum())


def _walk_counts_numpy(step0, step1, in_phi, start, steps, first_index, n_walks, seed):
    idx = np.arange(first_index + 1, first_index + n_walks + 1, dtype=np.uint64)
    sub = _mix_np(np.uint64(seed) + idx * _G)
    k = np.zeros(n_walks, dtype=np.uint64)
    cur = np.full(n_walks, start, dtype=np.int64)
    for _ in range(steps):
        c0 = step0[cur]
        c1 = step1[cur]
        i0 = in_phi[c0]
        i1 = in_phi[c1]
        need = i0 & i1
        z = _mix_np(sub + (k + _ONE) * _G)
        bit = (z & _ONE).astype(bool)
        take1 = np.where(need, bit, ~i0)
        cur = np.where(take1, c1, c0)
        k = k + need
    return np.bincount(cur, minlength=len(step0)).astype(np.int64)


# -- numba implementations ---------------------------------------------------


if _njit is not None:

    @_njit(cache=True, nogil=True)
    def _mix_nb(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    @_njit(cache=True, nogil=True)
    def _virus_survivors_nb(seed, first_index, horizon, n_samples):
        g = np.uint64(GAMMA)
        survivors = 0
        for w in range(n_samples):
            sub = _mix_nb(seed + np.uint64(first_index + w + 1) * g)
            alive = True
            for i in range(1, horizon):
                z = _mix_nb(sub + np.uint64(i) * g)
                if (z & np.uint64((1 << i) - 1)) == np.uint64(0):
                    alive = False
                    break
            if alive:
                survivors += 1
        return survivors

    @_njit(cache=True, nogil=True)
    def _walk_counts_nb(step0, step1, in_phi, start, steps, first_index, n_walks, seed, counts):
        g = np.uint64(GAMMA)
        one = np.uint64(1)
        for w in range(n_walks):
            sub = _mix_nb(seed + np.uint64(first_index + w + 1) * g)
            k = np.uint64(0)
            cur = start
            for _ in range(steps):
                c0 = step0[cur]
                c1 = step1[cur]
                i0 = in_phi[c0]
                i1 = in_phi[c1]
                if i0 and i1:
                    z = _mix_nb(sub + (k + one) * g)
                    k += one
                    cur = c1 if (z & one) != np.uint64(0) else c0
                elif i0:
                    cur = c0
                else:
                    cur = c1
            counts[cur] += 1


def _chunks(total: int, workers: int | None) -> list[tuple[int, int]]:
    """(first_index, count) chunks covering 0..total-1."""
    w = max(1, int(workers or 1))
    w = min(w, total) if total else 1
    base, extra = divmod(total, w)
    out = []
    first = 0
    for i in range(w):
        count = base + (1 if i < extra else 0)
        out.append((first, count))
        first += count
    return out


def _run_chunks(fn, total, workers):
    chunks = _chunks(total, workers)
    if len(chunks) == 1:
        return [fn(*chunks[0])]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return list(pool.map(lambda fc: fn(*fc), chunks))


# -- public dispatchers ------------------------------------------------------


def virus_survivor_count(seed: int, horizon: int, samples: int,
                         workers: int | None = None) -> int:
    """Number of samples whose walk passes blocks 1..horizon-1 undeviated."""
    if not 2 <= horizon <= 64:
        raise ValueError("horizon must be between 2 and 64")
    seed64 = np.uint64(seed & _M64)

    if ACTIVE_BACKEND == "numba":
        def one_chunk(first, count):
            return _virus_survivors_nb(seed64, first, horizon, count)
    else:
        def one_chunk(first, count):
            return _virus_survivors_numpy(seed64, first, horizon, count)

    return sum(_run_chunks(one_chunk, samples, workers))


def walk_final_counts(
    step0,
    step1,
    in_phi,
    start: int,
    steps: int,
    samples: int,
    seed: int,
    workers: int | None = None,
) -> np.ndarray:
    """Per-state counts of walk endpoints over `samples` walks of `steps` steps."""
    s0 = np.asarray(step0, dtype=np.int64)
    s1 = np.asarray(step1, dtype=np.int64)
    mask = np.asarray(in_phi, dtype=np.bool_)
    seed64 = np.uint64(seed & _M64)

    if ACTIVE_BACKEND == "numba":
        def one_chunk(first, count):
            counts = np.zeros(len(s0), dtype=np.int64)
            _walk_counts_nb(s0, s1, mask, start, steps, first, count, seed64, counts)
            return counts
    else:
        def one_chunk(first, count):
            return _walk_counts_numpy(s0, s1, mask, start, steps, first, count, seed64)

    results = _run_chunks(one_chunk, samples, workers)
    total = np.zeros(len(s0), dtype=np.int64)
    for r in results:
        total += r
    return total
