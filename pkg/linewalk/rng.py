"""
Splittable, counter-based random streams.

Every trajectory, lane and batch draws from its own stream keyed by
``(master seed, index path)``, so a result never depends on how work was
split across threads or vectorized blocks.

Author: linewalk developers
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["RandomStream"]


@dataclass(frozen=True)
class RandomStream:
    """Philox stream identified by a master seed and a key path.

    Args:
        seed: Master seed (non-negative integer).
        key: Index path below the master seed; ``child(i)`` appends ``i``.

    Example:
        >>> root = RandomStream(2024)
        >>> u = root.child(3).random(5)
    """

    seed: int
    key: tuple[int, ...] = ()
    _generator: Optional[np.random.Generator] = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError(f"Seed must be non-negative, got {self.seed}")

    @property
    def generator(self) -> np.random.Generator:
        """The underlying numpy generator, created on first use."""
        if self._generator is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
            object.__setattr__(self, "_generator", np.random.Generator(np.random.Philox(seq)))
        return self._generator

    def child(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.key + (int(index),))

    def children(self, n: int) -> list["RandomStream"]:
        return [self.child(i) for i in range(n)]

    def random(self, size=None) -> np.ndarray:
        """Uniform draws on ``[0, 1)``."""
        return self.generator.random(size)
