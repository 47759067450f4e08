"""Seed derivation and ordered execution of independent replications."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")

THREADS_ENV = "PSEUDOPROC_THREADS"


def derive_seed(master: int, *labels) -> int:
    """Stable 63-bit seed from a master seed and a sequence of labels.

    Independent of call order and of the Python hash seed, so replications can
    be scheduled in any order and still reproduce.
    """
    text = ":".join([str(int(master))] + [str(lab) for lab in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def rng_for(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def map_ordered(fn: Callable[[T], object], items: Iterable[T], threads: int | None = None) -> list:
    """Apply ``fn`` to every item, returning results in input order.

    With more than one worker the calls run on a thread pool; the reduction
    order never depends on completion order.
    """
    items = list(items)
    n_workers = min(worker_count(threads), max(1, len(items)))
    if n_workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))


def replicate(fn: Callable[[int, np.random.Generator], object], reps: int, master: int,
              label: str, threads: int | None = None) -> list:
    """Run ``fn(rep, rng)`` for ``rep = 0..reps-1`` with per-replication seeds."""

    def _one(rep: int):
        return fn(rep, rng_for(master, label, rep))

    return map_ordered(_one, range(reps), threads)

