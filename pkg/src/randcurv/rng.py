"""Seeded, splittable complex-Gaussian sampling.

Every random draw in the package goes through an :class:`RngStream`.  A stream
is an immutable value ``(root_seed, path)``; its output is a pure function of
that pair, obtained by feeding the path into a :class:`numpy.random.SeedSequence`
spawn key and driving a counter-based Philox generator.  Parallel workers
therefore never share generator state, and a Monte Carlo reduction that splits
its work into fixed-size chunks (one derived stream per chunk) gives the same
answer for any number of threads.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

CHUNK_SIZE = 2**16
_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    """Immutable handle on a deterministic random sequence.

    Parameters
    ----------
    root_seed : int
        64-bit root seed, normally taken from the ``--seed`` flag.
    path : tuple of (str, int)
        Derivation steps from the root.
    """

    root_seed: int
    path: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.root_seed) <= _MASK64:
            raise ValueError("root_seed must fit in 64 unsigned bits")

    def derive(self, label: str, index: int = 0) -> "RngStream":
        return derive_stream(self, label, index)

    def spawn_key(self) -> tuple[int, ...]:
        key: list[int] = []
        for label, index in self.path:
            key.extend((_label_key(label), int(index)))
        return tuple(key)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=int(self.root_seed), spawn_key=self.spawn_key())
        return np.random.Generator(np.random.Philox(ss))


def derive_stream(parent: RngStream, label: str, index: int = 0) -> RngStream:
    """Child stream identified by ``(label, index)`` below ``parent``."""
    if index < 0:
        raise ValueError("stream index must be non-negative")
    return RngStream(parent.root_seed, parent.path + ((str(label), int(index)),))


def cn_from_generator(gen: np.random.Generator, size) -> np.ndarray:
    """Canonical complex Gaussians: independent real/imag parts of variance 1/2."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    x = gen.standard_normal(shape + (2,))
    x *= np.sqrt(0.5)
    return x[..., 0] + 1j * x[..., 1]


def sample_cn(stream: RngStream, n: int) -> np.ndarray:
    """``n`` i.i.d. complex Gaussians with E[a] = 0, E|a|^2 = 1, E[a^2] = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return cn_from_generator(stream.generator(), n)


def chunk_sizes(n: int, chunk: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_ordered(fn: Callable[..., T], items: Sequence, threads: int = 1) -> list[T]:
    """``[fn(*item) for item in items]``, optionally on a thread pool, in input order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(*item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda item: fn(*item), items))


def run_chunks(stream: RngStream, n: int, fn: Callable[[RngStream, int], T],
               threads: int = 1, label: str = "chunk") -> list[T]:
    """Split ``n`` samples into fixed chunks and evaluate ``fn(chunk_stream, size)``.

    Results come back in chunk order regardless of ``threads``, so any reduction
    done by the caller in list order is bit-reproducible.
    """
    items = [(stream.derive(label, j), m) for j, m in enumerate(chunk_sizes(n))]
    return map_ordered(fn, items, threads)
