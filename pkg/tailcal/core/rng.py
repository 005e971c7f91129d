"""Counter-based, splittable random streams.

Every random draw in tailcal is addressed by (seed, stream_id, path). A
stream is a Philox counter-based generator keyed through a numpy
SeedSequence, so the values drawn from a stream never depend on which
thread or in which order other streams were consumed. Work that is split
into chunks derives one child stream per chunk index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .exceptions import RangeError

_LOGGER = logging.getLogger(__name__)

_U64 = 1 << 64


@dataclass(frozen=True)
class RngSpec:
    """Address of a reproducible random stream."""

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        """Validate the stream address."""
        if not 0 <= int(self.seed) < _U64:
            raise RangeError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0 or any(k < 0 for k in self.path):
            raise RangeError("stream ids and path keys must be non-negative")

    def child(self, *keys: int) -> RngSpec:
        """Return the sub-stream addressed by appending keys to the path."""
        return RngSpec(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        """Build a fresh generator positioned at draw index 0 of this stream."""
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(seq))

    def to_dict(self) -> dict[str, Any]:
        """Return the provenance record used in reports."""
        return {"seed": int(self.seed), "stream_id": self.stream_id, "path": list(self.path)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RngSpec:
        """Rebuild a spec from its provenance record."""
        return cls(int(data["seed"]), int(data.get("stream_id", 0)), tuple(data.get("path", ())))
