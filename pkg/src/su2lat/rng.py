"""Deterministic random number stream.

A single SplitMix64 stream drives every stochastic operation in the
package.  The generator is counter-like (64-bit state, constant
increment) and cheap enough to call per link update inside the compiled
sweeps; the same compiled routines back this Python wrapper, so a seed
fixes the full sample sequence regardless of entry point.

A stream must have a single owner.  Concurrent work needs independent
streams, obtained with :meth:`SplitMix64.split`.
"""

import numpy as np

from . import _kernels

__all__ = ["SplitMix64"]


class SplitMix64:
    def __init__(self, seed):
        self._state = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)

    @property
    def state(self):
        """Current 64-bit state as a Python int."""
        return int(self._state[0])

    @property
    def state_array(self):
        """The mutable state buffer handed to compiled kernels."""
        return self._state

    def next_u64(self):
        return int(_kernels.next_u64(self._state))

    def uniform(self, size=None):
        """Uniform floats in [0, 1)."""
        if size is None:
            return _kernels.uniform(self._state)
        out = np.empty(size, dtype=np.float64)
        _kernels.fill_uniform(self._state, out)
        return out

    def normal(self, size=None):
        """Standard normal draws (Box-Muller over the stream)."""
        if size is None:
            out = np.empty(1, dtype=np.float64)
            _kernels.fill_normal(self._state, out)
            return float(out[0])
        out = np.empty(size, dtype=np.float64)
        _kernels.fill_normal(self._state, out)
        return out

    def split(self):
        """Derive an independently seeded child stream."""
        return SplitMix64(self.next_u64())

    def __repr__(self):
        return f"SplitMix64(state=0x{self.state:016x})"
