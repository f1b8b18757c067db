"""Deterministic seed derivation and the package-wide counter PRNG.

Every stochastic routine in this package takes an explicit 64-bit seed.
Derived streams (per sample, per tree, per fold) come from the splitmix64
output sequence: stream ``i`` of ``seed`` is the ``i``-th splitmix64 output,
``mix64(seed + (i + 1) * GOLDEN)``.  Because derivation is a pure function of
``(seed, index)``, batches can be generated in any order, or in parallel,
and still reproduce bit-identically.

The :func:`_next_u64` / :func:`_next_double` / :func:`_next_below` helpers
are the numba-side generator used inside simulation kernels; they consume a
one-element ``uint64`` state array so the state survives across calls.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_MULT1 = np.uint64(_MULT1)
_U_MULT2 = np.uint64(_MULT2)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _MULT2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child seed by walking ``path`` through splitmix64 streams.

    ``derive_seed(s, i)`` is the ``i``-th output of the splitmix64 generator
    seeded at ``s``; longer paths nest the construction.  Distinct paths give
    streams that are independent for all practical purposes.
    """
    s = seed & MASK64
    for k in path:
        if k < 0:
            raise ValueError("seed-derivation path elements must be nonnegative")
        s = mix64((s + (k + 1) * GOLDEN) & MASK64)
    return s


@njit(cache=True, inline="always")
def _deriv_u64(seed, k):
    # numba mirror of derive_seed(seed, k); operands must stay uint64
    z = np.uint64(seed) + (np.uint64(k) + np.uint64(1)) * _U_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _U_MULT1
    z = (z ^ (z >> np.uint64(27))) * _U_MULT2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _U_GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _U_MULT1
    z = (z ^ (z >> np.uint64(27))) * _U_MULT2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next_double(state):
    # uniform in [0, 1) with 53 random bits
    return np.float64(_next_u64(state) >> np.uint64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def _next_below(state, n):
    # uniform integer in [0, n); unbiased via bitmask rejection
    if n <= np.uint64(1):
        return np.uint64(0)
    mask = n - np.uint64(1)
    mask |= mask >> np.uint64(1)
    mask |= mask >> np.uint64(2)
    mask |= mask >> np.uint64(4)
    mask |= mask >> np.uint64(8)
    mask |= mask >> np.uint64(16)
    mask |= mask >> np.uint64(32)
    while True:
        r = _next_u64(state) & mask
        if r < n:
            return r
