"""SplitMix64 generator used by the local-search solver.

The state is a single uint64 held in a length-1 array so numba kernels can
advance it in place.  Run ``s`` is seeded with state ``s``; streams for
consecutive seeds are decorrelated by the output mixer.
"""
import numpy as np
from numba import njit

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

_GAMMA = np.uint64(GOLDEN_GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def new_state(seed):
    return np.array([seed & _MASK64], dtype=np.uint64)


@njit(cache=True, nogil=True)
def next_u64(state):
    s = state[0] + _GAMMA
    state[0] = s
    z = (s ^ (s >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def below(state, n):
    """Uniform integer in [0, n) for 0 < n < 2**32 (multiply-shift)."""
    hi = next_u64(state) >> _S32
    return np.int64((hi * np.uint64(n)) >> _S32)


@njit(cache=True, nogil=True)
def uniform(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return np.float64(next_u64(state) >> _S11) * _INV53


def splitmix64_reference(seed, count):
    """Pure-Python SplitMix64 outputs, for cross-checking the kernels."""
    out = []
    s = seed & _MASK64
    for _ in range(count):
        s = (s + GOLDEN_GAMMA) & _MASK64
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out
