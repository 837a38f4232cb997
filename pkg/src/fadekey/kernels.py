"""Hot loops: Eve's phase-adjusted combining (sweep) and trajectory synthesis (ACF).

Two implementations of each with identical semantics. ``eve_envelope`` points at the
one picked by ``FADEKEY_BACKEND``; both stay importable so they can be
compared (see ``benchmarks/bench_kernels.py``).

Array layout for a block of ``n`` trials, ``N`` paths and ``L`` paths per
aperture:

* ``main_phasor``  ``(n, N)`` complex, ``exp(j psi)`` of Bob's paths.
* ``pointing``     ``(n, N)`` real, boresight error of each aperture (rad).
* ``side_beta``    ``(L-1, n, N)`` real, off-axis angles of interference rays.
* ``side_phasor``  ``(L-1, n, N)`` complex, their unit phasors.

Only the first ``n_intercepted`` apertures contribute.
"""

import math

import numpy as np

from fadekey._backend import BACKEND, HAVE_NUMBA, njit
from fadekey.special_math import _jinc_scalar, jinc_numpy


@njit(nogil=True)
def _gain_scalar(beta, scale, obliquity):
    g = _jinc_scalar(scale * math.sin(beta))
    if obliquity:
        g *= 0.5 * (1.0 + math.cos(beta))
    return g


@njit(nogil=True)
def eve_envelope_numba(main_phasor, pointing, side_beta, side_phasor, n_intercepted, scale, obliquity):
    n, n_paths = main_phasor.shape
    n_side = side_beta.shape[0]
    norm = 1.0 / math.sqrt(n_paths)
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = 0.0 + 0.0j
        for p in range(n_intercepted):
            acc += _gain_scalar(pointing[i, p], scale, obliquity) * main_phasor[i, p]
            for k in range(n_side):
                acc += _gain_scalar(side_beta[k, i, p], scale, obliquity) * side_phasor[k, i, p]
        out[i] = acc * norm
    return out


def gain_numpy(beta, scale, obliquity):
    g = jinc_numpy(scale * np.sin(beta))
    if obliquity:
        g = g * 0.5 * (1.0 + np.cos(beta))
    return g


def eve_envelope_numpy(main_phasor, pointing, side_beta, side_phasor, n_intercepted, scale, obliquity):
    n, n_paths = main_phasor.shape
    if n_intercepted == 0:
        return np.zeros(n, dtype=complex)
    k = n_intercepted
    acc = (gain_numpy(pointing[:, :k], scale, obliquity) * main_phasor[:, :k]).sum(axis=1)
    if side_beta.shape[0]:
        side = gain_numpy(side_beta[:, :, :k], scale, obliquity) * side_phasor[:, :, :k]
        acc = acc + side.sum(axis=(0, 2))
    return acc / math.sqrt(n_paths)


@njit(nogil=True)
def envelope_series_numba(aoa, phase, w_d_dt, length):
    # per-path phasor rotation; drift after 1e4 steps is ~1e-12
    n, n_paths = aoa.shape
    norm = 1.0 / math.sqrt(n_paths)
    out = np.zeros((n, length), dtype=np.complex128)
    for i in range(n):
        for p in range(n_paths):
            step = w_d_dt * math.cos(aoa[i, p])
            rot = complex(math.cos(step), math.sin(step))
            z = complex(math.cos(phase[i, p]), math.sin(phase[i, p])) * norm
            for k in range(length):
                out[i, k] += z
                z *= rot
    return out


def envelope_series_numpy(aoa, phase, w_d_dt, length):
    """Envelopes sampled at ``t_k = k dt`` for every realization row, ``(R, length)``."""
    k = np.arange(length)
    out = np.zeros((aoa.shape[0], length), dtype=complex)
    for p in range(aoa.shape[1]):
        step = w_d_dt * np.cos(aoa[:, p])
        out += np.exp(1j * (step[:, None] * k[None, :] + phase[:, p, None]))
    return out / math.sqrt(aoa.shape[1])


if BACKEND == "numba" and HAVE_NUMBA:
    eve_envelope = eve_envelope_numba
    envelope_series = envelope_series_numba
else:
    eve_envelope = eve_envelope_numpy
    envelope_series = envelope_series_numpy
