"""Sum-of-sinusoids flat fading: Clarke's isotropic model and the refined AoA variant.

Every path carries amplitude ``1/sqrt(N)`` so the envelope has unit mean
power. Alice and Bob see the same envelope; they differ only through their
own receiver noise.
"""

from dataclasses import dataclass
from enum import Enum
import math
from typing import NamedTuple

import numpy as np

from fadekey.special_math import bessel_j0

TWO_PI = 2.0 * math.pi


class Model(str, Enum):
    CLARKE = "clarke"
    REFINED = "refined"


def wrap_angle(a):
    """Map angles onto ``[-pi, pi)``."""
    w = (np.asarray(a, dtype=float) + math.pi) % TWO_PI - math.pi
    # the modulo can round up to exactly 2 pi for tiny negative inputs
    return np.where(w >= math.pi, w - TWO_PI, w)


@dataclass(frozen=True)
class ScatteringRealization:
    """Angles of arrival and phases of the ``N`` last-scattered paths."""

    aoa: np.ndarray
    phase: np.ndarray
    model: Model = Model.CLARKE

    def __post_init__(self):
        aoa = np.atleast_1d(np.asarray(self.aoa, dtype=float))
        phase = np.atleast_1d(np.asarray(self.phase, dtype=float))
        if aoa.ndim != 1 or aoa.shape != phase.shape:
            raise ValueError("aoa and phase must be 1-d arrays of equal length")
        if aoa.size < 1:
            raise ValueError("a realization needs at least one path")
        for name, arr in (("aoa", aoa), ("phase", phase)):
            if np.any(arr < -math.pi) or np.any(arr >= math.pi):
                raise ValueError(f"{name} must lie in [-pi, pi)")
        object.__setattr__(self, "aoa", aoa)
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "model", Model(self.model))

    @property
    def n_paths(self):
        return self.aoa.size


@dataclass(frozen=True)
class DopplerConfig:
    w_d: float  # maximum Doppler shift, rad/s

    def __post_init__(self):
        if not self.w_d >= 0:
            raise ValueError(f"w_d must be >= 0, got {self.w_d}")

    @classmethod
    def from_speed(cls, speed, wavelength):
        return cls(TWO_PI * speed / wavelength)

    @classmethod
    def from_hz(cls, doppler_hz):
        return cls(TWO_PI * doppler_hz)


class Quadratures(NamedTuple):
    r_i: float
    r_q: float
    amplitude: float
    phase: float


def draw_angles(rng, shape, model):
    """Draw ``(aoa, phase)`` arrays whose last axis indexes the paths.

    Refined model: ``aoa_n = (2 pi n + theta_n) / N`` with ``n = 1..N`` and
    ``theta_n`` uniform on ``[-pi, pi)``, independent of the phases.
    """
    shape = tuple(np.atleast_1d(shape))
    n_paths = shape[-1]
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    model = Model(model)
    phase = rng.uniform(-math.pi, math.pi, size=shape)
    theta = rng.uniform(-math.pi, math.pi, size=shape)
    if model is Model.CLARKE:
        aoa = theta
    else:
        n = np.arange(1, n_paths + 1)
        aoa = wrap_angle((TWO_PI * n + theta) / n_paths)
    return aoa, phase


def draw_realization(n_paths, model, rng):
    aoa, phase = draw_angles(rng, (n_paths,), model)
    return ScatteringRealization(aoa, phase, model)


def path_phases(aoa, phase, w_d, t):
    """Per-path phase ``w_d t cos(aoa) + phase``; broadcasts over leading axes."""
    if w_d == 0 or np.all(np.asarray(t) == 0):
        return np.asarray(phase, dtype=float)
    return w_d * t * np.cos(aoa) + phase


def envelope_at(real, dop, t):
    """Complex baseband envelope ``g(t)`` for one realization; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    psi = dop.w_d * t[..., None] * np.cos(real.aoa) + real.phase
    g = np.exp(1j * psi).sum(axis=-1) / math.sqrt(real.n_paths)
    return complex(g) if g.ndim == 0 else g


def envelope_batch(aoa, phase, w_d, t):
    """Envelopes of many realizations on a common time grid.

    ``aoa`` and ``phase`` have shape ``(R, N)``, ``t`` shape ``(T,)``; returns
    ``(R, T)`` complex.
    """
    aoa = np.asarray(aoa, dtype=float)
    phase = np.asarray(phase, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.zeros((aoa.shape[0], t.size), dtype=complex)
    for n in range(aoa.shape[1]):
        doppler = w_d * np.cos(aoa[:, n])
        out += np.exp(1j * (doppler[:, None] * t[None, :] + phase[:, n, None]))
    return out / math.sqrt(aoa.shape[1])


def quadratures_of(g):
    g = complex(g)
    return Quadratures(g.real, g.imag, abs(g), math.atan2(g.imag, g.real))


def noise_power(snr_db):
    """Total complex noise power for unit signal power; 0 when ``snr_db`` is None (noiseless)."""
    if snr_db is None:
        return 0.0
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or None, got {snr_db}")
    return 10.0 ** (-snr_db / 10.0)


def quadrature_noise_std(snr_db):
    return math.sqrt(noise_power(snr_db) / 2.0)


def add_receiver_noise(g, snr_db, rng):
    """Add circularly-symmetric complex Gaussian noise; ``snr_db=None`` is noiseless."""
    if snr_db is None:
        return g
    std = quadrature_noise_std(snr_db)
    shape = np.shape(g)
    noise = std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    out = g + noise
    return complex(out) if np.ndim(out) == 0 else out


def lag_sums(series, max_lag, window=None):
    """Raw lag sums over a common window of time origins, computed by FFT.

    Returns ``(first, second)`` with ``first[k] = sum Re(g(t) g*(t+k))`` and
    ``second[k] = sum |g(t)|^2 |g(t+k)|^2`` over rows and ``t < window``
    (default ``T - max_lag``).
    """
    s = np.atleast_2d(np.asarray(series, dtype=complex))
    length = s.shape[1]
    if max_lag < 0 or length <= max_lag:
        raise ValueError(f"series length {length} must exceed max_lag {max_lag}")
    window = length - max_lag if window is None else window
    nfft = 1 << (length - 1).bit_length()
    power = np.abs(s) ** 2
    # sum_t conj(h[t]) s[t+k]; s is zero-padded so nothing wraps for t + k < length
    spectrum = np.fft.fft(s, nfft, axis=1)
    head = np.fft.fft(s[:, :window], nfft, axis=1)
    first = np.fft.ifft(np.conj(head) * spectrum, axis=1)[:, : max_lag + 1].real.sum(axis=0)
    pspec = np.fft.rfft(power, nfft, axis=1)
    phead = np.fft.rfft(power[:, :window], nfft, axis=1)
    second = np.fft.irfft(np.conj(phead) * pspec, nfft, axis=1)[:, : max_lag + 1].sum(axis=0)
    return first, second


class AcfEstimate(NamedTuple):
    first_order: np.ndarray
    squared_envelope: np.ndarray


def empirical_acf(series, max_lag):
    """First-order and squared-envelope autocorrelations of uniformly sampled envelopes.

    Parameters
    ----------
    series : array_like, complex, shape (T,) or (R, T)
        One trajectory per row. Averages run over rows and over a common
        window of ``T - max_lag`` time origins, so every lag uses the same
        number of pairs.
    max_lag : int
        Largest lag in samples.

    Returns
    -------
    AcfEstimate
        ``first_order[k]`` is ``Re E[g(t) g*(t+k)]`` divided by its lag-0 value;
        ``squared_envelope[k]`` is the raw ``E[|g(t)|^2 |g(t+k)|^2]``.
    """
    s = np.atleast_2d(np.asarray(series, dtype=complex))
    first, second = lag_sums(s, max_lag)
    pairs = s.shape[0] * (s.shape[1] - max_lag)
    return AcfEstimate(first / first[0], second / pairs)


def theoretical_acf(w_d_tau, n_paths=None):
    """Closed-form ACFs: ``J0(w_d tau)`` and ``1 + J0^2 (1 - 1/N)`` (``N=None`` is the Rayleigh limit)."""
    j0 = np.asarray(bessel_j0(np.asarray(w_d_tau, dtype=float)))
    inv_n = 0.0 if n_paths is None else 1.0 / n_paths
    return AcfEstimate(j0, 1.0 + j0**2 * (1.0 - inv_n))
