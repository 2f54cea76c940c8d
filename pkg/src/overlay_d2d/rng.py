"""Counter-based random substreams.

Every random draw in a simulation comes from a Philox stream whose key is
``(master seed, purpose tag)`` and whose counter encodes the trial index and
the resampling attempt.  A trial therefore sees the same numbers no matter
which order trials are executed in, or in which process.
"""

from __future__ import annotations

import numpy as np

GEOMETRY = 1
SCHEDULE = 2
FADING = 3
CELLULAR = 4

_MASK64 = (1 << 64) - 1


def _counter(trial_index: int, attempt: int) -> np.ndarray:
    # word 0 is the block counter Philox increments while drawing; the trial
    # and attempt live in words 2 and 3 so substreams never overlap
    return np.array([0, 0, trial_index & _MASK64, attempt & _MASK64], dtype=np.uint64)


def _key(seed: int, purpose: int) -> np.ndarray:
    return np.array([seed & _MASK64, purpose & _MASK64], dtype=np.uint64)


def substream(seed: int, trial_index: int, purpose: int, attempt: int = 0) -> np.random.Generator:
    """Return a fresh generator for one (seed, trial, purpose, attempt)."""
    bg = np.random.Philox(key=_key(seed, purpose), counter=_counter(trial_index, attempt))
    return np.random.Generator(bg)


class StreamPool:
    """Reusable generators, one per purpose, repositioned for each trial.

    Building a Philox generator costs ~30 us while repositioning one costs
    ~2 us, which matters over 1e5 trials.  Generators returned by
    :meth:`get` are owned by the pool: calling ``get`` again with the same
    purpose invalidates the previous position.  Output is bit-identical to
    :func:`substream`.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gens: dict[int, tuple[np.random.Philox, np.random.Generator]] = {}

    def get(self, trial_index: int, purpose: int, attempt: int = 0) -> np.random.Generator:
        pair = self._gens.get(purpose)
        if pair is None:
            bg = np.random.Philox(key=_key(self.seed, purpose))
            pair = (bg, np.random.Generator(bg))
            self._gens[purpose] = pair
        bg, gen = pair
        bg.state = {
            "bit_generator": "Philox",
            "state": {"counter": _counter(trial_index, attempt), "key": _key(self.seed, purpose)},
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return gen
