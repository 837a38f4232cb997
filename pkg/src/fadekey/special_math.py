"""Bessel functions of the first kind (orders 0 and 1) and Rayleigh utilities.

J0 and J1 are evaluated with their power series for ``|x| <= 12`` and with
the Hankel asymptotic expansion beyond. The expansion is truncated at 24
terms, which is where its terms bottom out at ``x = 12`` (about 6e-12), so
both branches agree far below 1e-9 at the switch point.

Every routine exists twice: a scalar loop compiled by numba (used from inside
the Monte Carlo kernels) and a vectorised numpy version. Which one backs the
public functions is decided by :mod:`fadekey._backend`.
"""

from dataclasses import dataclass
import math

import numpy as np

from fadekey._backend import BACKEND, njit

SERIES_LIMIT = 12.0
J0_FIRST_ZERO = 2.404825557695773
J1_FIRST_ZERO = 3.831705970207512
SERIES_TERMS = 40
ASYMPTOTIC_TERMS = 24


def _hankel_coefficients(nu, n_terms):
    # a_k(nu) = prod_{i<=k} (4 nu^2 - (2i-1)^2) / (k! 8^k)
    out = np.empty(n_terms)
    acc = 1.0
    out[0] = 1.0
    mu = 4.0 * nu * nu
    for k in range(1, n_terms):
        acc *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        out[k] = acc
    return out


_HANKEL0 = _hankel_coefficients(0, ASYMPTOTIC_TERMS)
_HANKEL1 = _hankel_coefficients(1, ASYMPTOTIC_TERMS)


# ---------------------------------------------------------------------------
# scalar kernels (numba)
# ---------------------------------------------------------------------------


@njit
def _series_scalar(x, order):
    # sum_k (-1)^k (x/2)^(2k) / (k! (k+order)!); order is 0 or 1
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(SERIES_TERMS):
        term *= q / ((k + 1.0) * (k + 1.0 + order))
        total += term
    return total


@njit
def _hankel_scalar(ax, coeffs, phase_shift):
    p = 0.0
    q = 0.0
    inv = 1.0 / ax
    power = 1.0
    for k in range(ASYMPTOTIC_TERMS):
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            p += sign * coeffs[k] * power
        else:
            q += sign * coeffs[k] * power
        power *= inv
    chi = ax - phase_shift
    return math.sqrt(2.0 / (math.pi * ax)) * (p * math.cos(chi) - q * math.sin(chi))


@njit
def _j0_scalar(x):
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        return _series_scalar(ax, 0)
    return _hankel_scalar(ax, _HANKEL0, 0.25 * math.pi)


@njit
def _j1_scalar(x):
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        val = 0.5 * ax * _series_scalar(ax, 1)
    else:
        val = _hankel_scalar(ax, _HANKEL1, 0.75 * math.pi)
    return -val if x < 0 else val


@njit
def _jinc_scalar(x):
    """2 J1(x) / x, equal to 1 at x = 0."""
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        return _series_scalar(ax, 1)
    return 2.0 * _hankel_scalar(ax, _HANKEL1, 0.75 * math.pi) / ax


@njit
def _map_numba(func_id, x):
    out = np.empty(x.size)
    flat = x.ravel()
    for i in range(flat.size):
        if func_id == 0:
            out[i] = _j0_scalar(flat[i])
        elif func_id == 1:
            out[i] = _j1_scalar(flat[i])
        else:
            out[i] = _jinc_scalar(flat[i])
    return out


# ---------------------------------------------------------------------------
# vectorised numpy versions
# ---------------------------------------------------------------------------


def _series_array(ax, order):
    q = -0.25 * ax * ax
    term = np.ones_like(ax)
    total = np.ones_like(ax)
    for k in range(SERIES_TERMS):
        term = term * q / ((k + 1.0) * (k + 1.0 + order))
        total += term
    return total


def _hankel_array(ax, coeffs, phase_shift):
    inv = 1.0 / ax
    p = np.zeros_like(ax)
    q = np.zeros_like(ax)
    power = np.ones_like(ax)
    for k in range(ASYMPTOTIC_TERMS):
        sign = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            p += sign * coeffs[k] * power
        else:
            q += sign * coeffs[k] * power
        power = power * inv
    chi = ax - phase_shift
    return np.sqrt(2.0 / (np.pi * ax)) * (p * np.cos(chi) - q * np.sin(chi))


def _split(x):
    ax = np.abs(x)
    small = ax <= SERIES_LIMIT
    return ax, small, ax[small], ax[~small]


def j0_numpy(x):
    x = np.asarray(x, dtype=float)
    ax, small, lo, hi = _split(x)
    out = np.empty_like(ax)
    out[small] = _series_array(lo, 0)
    out[~small] = _hankel_array(hi, _HANKEL0, 0.25 * np.pi)
    return out


def j1_numpy(x):
    x = np.asarray(x, dtype=float)
    ax, small, lo, hi = _split(x)
    out = np.empty_like(ax)
    out[small] = 0.5 * lo * _series_array(lo, 1)
    out[~small] = _hankel_array(hi, _HANKEL1, 0.75 * np.pi)
    return np.where(x < 0, -out, out)


def jinc_numpy(x):
    x = np.asarray(x, dtype=float)
    ax, small, lo, hi = _split(x)
    out = np.empty_like(ax)
    out[small] = _series_array(lo, 1)
    out[~small] = 2.0 * _hankel_array(hi, _HANKEL1, 0.75 * np.pi) / hi
    return out


def _dispatch(func_id, numpy_impl, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Bessel argument must be finite")
    if BACKEND == "numba":
        out = _map_numba(func_id, np.ascontiguousarray(arr)).reshape(arr.shape)
    else:
        out = numpy_impl(arr)
    return float(out) if out.ndim == 0 else out


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Accepts a scalar or array; raises ``ValueError`` on non-finite input.
    """
    return _dispatch(0, j0_numpy, x)


def bessel_j1(x):
    """Bessel function of the first kind of order one (odd in ``x``)."""
    return _dispatch(1, j1_numpy, x)


def jinc(x):
    """``2 J1(x) / x`` with the removable singularity filled in (value 1 at 0)."""
    return _dispatch(2, jinc_numpy, x)


# ---------------------------------------------------------------------------
# Rayleigh distribution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RayleighParams:
    """Rayleigh scale. Mean power is ``2 sigma**2``; unit power is ``sigma**2 = 1/2``."""

    sigma: float = math.sqrt(0.5)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @classmethod
    def unit_power(cls):
        return cls(math.sqrt(0.5))


def rayleigh_cdf(r, p=RayleighParams()):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("Rayleigh cdf is defined for r >= 0")
    out = -np.expm1(-(r * r) / (2.0 * p.sigma**2))
    return float(out) if out.ndim == 0 else out


def rayleigh_quantile(q, p=RayleighParams()):
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q >= 1)) or not np.all(np.isfinite(q)):
        raise ValueError("quantile level must lie in [0, 1)")
    out = p.sigma * np.sqrt(-2.0 * np.log1p(-q))
    return float(out) if out.ndim == 0 else out


def rayleigh_pdf(r, p=RayleighParams()):
    r = np.asarray(r, dtype=float)
    s2 = p.sigma**2
    out = np.where(r >= 0, r / s2 * np.exp(-(r * r) / (2.0 * s2)), 0.0)
    return float(out) if out.ndim == 0 else out
