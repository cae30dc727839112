"""
Seeded random streams.

Every randomized operation draws from PCG64 generators derived from one
64-bit seed. Chunk i of a run seeded s uses SeedSequence(s, spawn_key=(i,)),
the i-th child of SeedSequence(s).spawn(...), so results depend on the seed
and the chunk size only, never on the thread count.
"""

from typing import List, Optional

import numpy as np

from lab.exceptions import InvalidInputError


def generate_seed() -> int:
    """A fresh 64-bit seed from OS entropy."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])


def resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        return generate_seed()
    if not 0 <= seed < 2 ** 64:
        raise InvalidInputError("Seeds are 64-bit unsigned integers", seed=seed)
    return int(seed)


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """The generator of chunk ``index`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def chunk_sizes(total: int, chunk: int) -> List[int]:
    """Split ``total`` draws into chunks of ``chunk`` (the last one shorter)."""
    full, rest = divmod(total, chunk)
    sizes = [chunk] * full
    if rest:
        sizes.append(rest)
    return sizes
