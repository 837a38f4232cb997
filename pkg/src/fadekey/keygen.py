"""Guard-band threshold quantizer for amplitude-based key bits.

Alice and Bob map an amplitude ``r`` to 0 below ``m - T``, to 1 above
``m + T + s`` and drop it in between. The entropy offset ``s`` is calibrated so
both tails carry equal probability under the noisy amplitude law. Eve never
drops: she compares against the public median.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class Symbol(IntEnum):
    ZERO = 0
    ONE = 1
    DROP = 2


@dataclass(frozen=True)
class ThresholdScheme:
    median_m: float
    threshold_t: float
    entropy_s: float = 0.0

    def __post_init__(self):
        if self.threshold_t < 0 or self.entropy_s < 0:
            raise ValueError("threshold_t and entropy_s must be >= 0")
        if self.median_m - self.threshold_t < 0:
            raise ValueError("median_m - threshold_t must be >= 0")

    @property
    def lower(self):
        return self.median_m - self.threshold_t

    @property
    def upper(self):
        return self.median_m + self.threshold_t + self.entropy_s


def calibrate(amplitude_samples, threshold_t):
    """Fit ``m`` and ``s`` to a sample of the (noisy) amplitude distribution.

    ``m`` is the sample median. With ``p`` the fraction of samples below
    ``m - T``, ``s`` is chosen so the fraction above ``m + T + s`` is also
    ``p``: ``s = q(1 - p) - m - T`` with ``q`` the empirical quantile function,
    clamped at zero.
    """
    r = np.asarray(amplitude_samples, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("calibration needs at least one amplitude sample")
    if np.any(r < 0):
        raise ValueError("amplitudes must be non-negative")
    if threshold_t < 0:
        raise ValueError("threshold_t must be >= 0")
    m = float(np.median(r))
    if threshold_t > 0 and threshold_t >= m:
        raise ValueError(f"threshold_t={threshold_t} must be below the median {m}")
    p_low = np.count_nonzero(r < m - threshold_t) / r.size
    upper = float(np.quantile(r, 1.0 - p_low))
    s = max(upper - m - threshold_t, 0.0)
    return ThresholdScheme(m, float(threshold_t), s)


def _check_amplitude(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("amplitude must be non-negative")
    return r


def quantize_legit_array(r, scheme):
    r = _check_amplitude(r)
    out = np.full(r.shape, Symbol.DROP, dtype=np.int8)
    out[r < scheme.lower] = Symbol.ZERO
    out[r > scheme.upper] = Symbol.ONE
    return out


def quantize_eve_array(r, scheme):
    r = _check_amplitude(r)
    return (r >= scheme.median_m).astype(np.int8)


def quantize_legit(r, scheme):
    """Alice/Bob decision; points on either boundary are dropped."""
    return Symbol(int(quantize_legit_array(r, scheme)))


def quantize_eve(r, scheme):
    """Eve's binary decision; ``r == m`` maps to ONE."""
    return Symbol(int(quantize_eve_array(r, scheme)))
