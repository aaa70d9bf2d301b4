"""Counter-based random streams.

Every random draw in the package flows through a Philox4x64-10 bit
generator keyed by ``(seed, stream)``, so a draw is identified by
(seed, stream id, position) and is reproducible across platforms and
processes.  Consumers derive values only from ``Generator.random()``
(raw doubles in [0, 1)) with documented arithmetic, never from
higher-level distribution methods whose algorithms may change between
numpy releases:

* uniform on [a, b):   ``a + (b - a) * r``
* index in range(k):   ``int(r * k)``
* k distinct picks out of m: indices of the k smallest of m raw doubles
  (ties broken by index), drawn in one batch.

Golden draw values are pinned in the test suite.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

# Stream ids, one per consumer; keep stable forever.
STREAM_POLICY = 1
STREAM_GENERATOR = 2
STREAM_TRAJECTORIES = 3

_MAX_SEED = 2**64


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Return the Philox generator for ``(seed, stream)``."""
    if not isinstance(seed, (int, np.integer)) or not 0 <= seed < _MAX_SEED:
        raise ValidationError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    if not isinstance(stream, (int, np.integer)) or not 0 <= stream < _MAX_SEED:
        raise ValidationError(f"stream id must be an integer in [0, 2^64), got {stream!r}")
    key = (int(stream) << 64) | int(seed)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_in(rng: np.random.Generator, lo: float, hi: float) -> float:
    """One draw uniform on [lo, hi), per the documented derivation."""
    return lo + (hi - lo) * float(rng.random())


def index_in(rng: np.random.Generator, k: int) -> int:
    """One draw uniform over range(k)."""
    return min(int(rng.random() * k), k - 1)


def choose_distinct(rng: np.random.Generator, k: int, m: int) -> list[int]:
    """Choose ``k`` distinct indices from range(m), ascending.

    Consumes exactly ``m`` raw doubles; the chosen set is the k smallest
    keys (stable tie-break by index).
    """
    if k > m:
        raise ValidationError(f"cannot choose {k} distinct items out of {m}")
    keys = rng.random(m)
    order = np.argsort(keys, kind="stable")
    return sorted(int(i) for i in order[:k])
