"""Deterministic named random streams.

Every random decision in a run draws from a stream addressed by a path
like ``(root_seed, trial, round, "filter")``. Paths hash to independent
generator states, so toggling one consumer's randomness never perturbs
another's, and any stream can be reproduced in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _path_words(root_seed: int, path: tuple[int | str, ...]) -> list[int]:
    words = [int(root_seed) & _MASK64]
    for part in path:
        if isinstance(part, bool):
            raise TypeError("stream path parts must be ints or strings")
        if isinstance(part, int):
            words.append(part & _MASK64)
        elif isinstance(part, str):
            digest = hashlib.sha256(part.encode("utf-8")).digest()
            words.append(int.from_bytes(digest[:8], "big"))
        else:
            raise TypeError(f"stream path part {part!r} is not an int or string")
    return words


def substream(root_seed: int, *path: int | str) -> np.random.Generator:
    """Independent generator for the stream addressed by ``path``."""
    return np.random.default_rng(np.random.SeedSequence(_path_words(root_seed, path)))


def derive_seed(root_seed: int, *path: int | str) -> int:
    """Stable 64-bit seed derived from a stream path (for nested roots)."""
    material = b"".join(w.to_bytes(8, "big") for w in _path_words(root_seed, path))
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")
