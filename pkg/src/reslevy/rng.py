"""Deterministic random substreams.

Every stochastic quantity is drawn from a generator derived from a single
master seed.  The split rule is ``SeedSequence(seed, spawn_key=(tag, chunk))``
where ``tag`` is the CRC32 of a label naming the estimator (so two checks never
share draws) and ``chunk = path_ordinal // chunk_size``.  Results depend only on
(seed, tag, chunk_size), never on how chunks are distributed over workers.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

DEFAULT_CHUNK = 4096


def tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def substream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(tag_key(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_sizes(n: int, chunk_size: int = DEFAULT_CHUNK) -> list[int]:
    full, rest = divmod(int(n), chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _call(args):
    fn, size, seed, tag, idx = args
    return fn(size, substream(seed, tag, idx))


def map_chunks(
    fn: Callable[[int, np.random.Generator], dict],
    n: int,
    seed: int,
    tag: str,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> dict:
    """Run ``fn(size, rng)`` over fixed-size chunks and concatenate the array
    outputs in chunk order.

    ``fn`` must return a dict of 1-d arrays (or 2-d arrays stacked on axis 0).
    With ``workers > 1`` chunks are dispatched to a process pool; ``fn`` then
    has to be picklable (a module-level function or a ``functools.partial``).
    """
    jobs = [(fn, size, seed, tag, i) for i, size in enumerate(chunk_sizes(n, chunk_size))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_call, jobs))
    else:
        parts = [_call(job) for job in jobs]
    if not parts:
        return {}
    return {key: np.concatenate([p[key] for p in parts], axis=0) for key in parts[0]}
