"""Counter-based random streams keyed by (seed, stream label).

Every stream is backed by a Philox counter generator whose key is a hash
of the seed together with an arbitrary tuple of stream labels.  Uniform
draws consume one 64-bit counter word each, so draw j of a stream is a
pure function of (seed, stream, j): streams never collide, prefixes are
stable, and parallel consumers reproduce identical numbers regardless of
scheduling.  Normals are obtained from uniforms by inverse CDF, which
preserves the per-index purity (a ziggurat would not).
"""

import hashlib

import numpy as np
from scipy.special import ndtri

_CLIP = 2.0 ** -55


def _philox(seed: int, stream: tuple) -> np.random.Philox:
    payload = repr((int(seed),) + tuple(stream)).encode()
    digest = hashlib.sha256(payload).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Philox(key=key)


def generator(seed: int, *stream) -> np.random.Generator:
    """General-purpose generator for a named stream."""
    return np.random.Generator(_philox(seed, stream))


def uniforms(seed: int, stream: tuple, count: int) -> np.ndarray:
    """Uniform(0,1) draws; element j depends only on (seed, stream, j)."""
    u = np.random.Generator(_philox(seed, stream)).random(count)
    # keep ndtri finite; the clip region has probability ~2^-53
    return np.clip(u, _CLIP, 1.0 - _CLIP)


def normals(seed: int, stream: tuple, count: int) -> np.ndarray:
    """Standard normal draws with the same per-index purity as uniforms."""
    return ndtri(uniforms(seed, stream, count))


def derive_seed(seed: int, *stream) -> int:
    """Stable 64-bit sub-seed for a named child stream."""
    payload = repr((int(seed),) + tuple(stream)).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")
