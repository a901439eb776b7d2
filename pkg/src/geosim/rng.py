"""Seeded random streams.

All randomness comes from Philox generators keyed by a master seed plus a
path of string labels, so ``Rng(42).child("data", "step")`` names the same
stream in every run, regardless of the order in which streams are created.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _label_words(label: str) -> tuple[int, int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little"), int.from_bytes(digest[4:8], "little")


class Rng:
    def __init__(self, seed: int = 42, path: tuple[str, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.path = tuple(path)
        spawn_key = tuple(w for label in self.path for w in _label_words(label))
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def child(self, *labels: str) -> "Rng":
        """Independent sub-stream; does not advance this stream."""
        return Rng(self.seed, self.path + tuple(str(x) for x in labels))

    def standard_normal(self, size):
        return self.generator.standard_normal(size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def signs(self, n: int) -> np.ndarray:
        """i.i.d. fair +/-1 draws."""
        return np.where(self.generator.random(n) < 0.5, -1.0, 1.0)

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={self.path!r})"
