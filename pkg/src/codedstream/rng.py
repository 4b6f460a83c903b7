"""Counter-based random streams keyed by entity identifiers.

Every uniform draw is a pure function of ``(seed, key, position)``: the key
identifies the entity that owns the stream (a worker's tasks within one job
iteration, the arrival process, ...) and the position is the draw index
within that stream.  Two consequences matter for the simulator:

* replaying a run with the same seed reproduces every sample exactly, no
  matter how events interleave, and
* two runs that share a seed consume *identical* randomness wherever their
  keys overlap, which is the common-random-numbers discipline used when
  comparing load splits.

The generator is the splitmix64 finalizer chained over the key values.  It
is not cryptographic; it is a fast, well-mixed hash that passes the moment
checks the test-suite applies to it.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

# Stream tags keep worker-task draws and arrival draws disjoint.
TASK_STREAM = 1
ARRIVAL_STREAM = 2


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * _MIX1) & _MASK64
    z ^= z >> 27
    z = (z * _MIX2) & _MASK64
    return z ^ (z >> 31)


def keyed_state(seed: int, keys: tuple[int, ...]) -> int:
    """Chain the key values through the mixer, one stage per value."""
    h = seed & _MASK64
    for k in keys:
        h = mix64((h + _GOLDEN + k) & _MASK64)
    return h


def keyed_uniform(seed: int, *keys: int) -> float:
    """One uniform in [0, 1) for the given key tuple."""
    return (keyed_state(seed, keys) >> 11) * _INV_2_53


def keyed_uniforms(seed: int, *keys, n: int | None = None) -> np.ndarray:
    """Vectorized ``keyed_uniform`` over numpy key arrays.

    Each key may be a scalar or an array; arrays are broadcast together.
    When ``n`` is given, an extra trailing key ``arange(n)`` is appended,
    yielding the first ``n`` positions of one stream.
    """
    if n is not None:
        keys = keys + (np.arange(n, dtype=np.uint64),)
    arrs = np.broadcast_arrays(*(np.asarray(k, dtype=np.uint64) for k in keys))
    golden = np.uint64(_GOLDEN)
    m1 = np.uint64(_MIX1)
    m2 = np.uint64(_MIX2)
    with np.errstate(over="ignore"):
        h = np.full(arrs[0].shape, np.uint64(seed & _MASK64), dtype=np.uint64)
        for k in arrs:
            h = h + golden + k
            h ^= h >> np.uint64(30)
            h *= m1
            h ^= h >> np.uint64(27)
            h *= m2
            h ^= h >> np.uint64(31)
    return (h >> np.uint64(11)) * _INV_2_53


class CounterStream:
    """A single-owner uniform stream at a fixed key.

    Successive calls draw positions 0, 1, 2, ... of the stream.  Streams
    must not be shared between concurrent activities; create one stream per
    entity instead.
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed) & _MASK64
        self.key = tuple(int(k) for k in key)
        self.position = 0

    def uniform(self) -> float:
        u = keyed_uniform(self.seed, *self.key, self.position)
        self.position += 1
        return u

    def uniforms(self, n: int) -> np.ndarray:
        """The next ``n`` uniforms as a float64 array."""
        out = keyed_uniforms(
            self.seed,
            *self.key,
            np.arange(self.position, self.position + n, dtype=np.uint64),
        )
        self.position += n
        return out

    def __repr__(self) -> str:
        return f"CounterStream(seed={self.seed}, key={self.key}, position={self.position})"
