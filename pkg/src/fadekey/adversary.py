"""Colluding eavesdropper with one circular aperture per intercepted path.

Aperture ``n`` is steered at Bob's ``n``-th last-scattered ray. Its output is
the main-lobe copy of that ray (attenuated by the pointing error) plus
``L - 1`` interference rays arriving at uniformly random off-axis angles with
uniformly random phases, each weighted by the Airy gain. Eve's detectors are
stationary, and her adjusting phase restores Bob's Doppler-and-delay phase on
the main term exactly, so all her imperfection comes from pointing error,
side-lobe leakage, missing paths and receiver noise.
"""

from dataclasses import dataclass
import math

import numpy as np

from fadekey import kernels
from fadekey.fading import add_receiver_noise, path_phases
from fadekey.special_math import J1_FIRST_ZERO, jinc


@dataclass(frozen=True)
class ApertureConfig:
    diameter: float
    wavelength: float = 0.1
    pointing_sigma: float = 0.0
    eve_snr_db: float | None = None
    obliquity_enabled: bool = False
    interference_paths: int | None = None  # None: same as Bob's path count

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError(f"diameter must be > 0, got {self.diameter}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if not self.pointing_sigma >= 0:
            raise ValueError(f"pointing_sigma must be >= 0, got {self.pointing_sigma}")
        if self.interference_paths is not None and self.interference_paths < 0:
            raise ValueError("interference_paths must be >= 0")

    @property
    def scale(self):
        """Factor turning ``sin(beta)`` into the Airy argument ``pi d sin(beta) / lambda``."""
        return math.pi * self.diameter / self.wavelength

    def side_terms(self, n_paths):
        paths = n_paths if self.interference_paths is None else self.interference_paths
        return max(paths - 1, 0)


@dataclass(frozen=True)
class InterceptionPlan:
    intercepted: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.intercepted)
        if len(set(idx)) != len(idx):
            raise ValueError("intercepted indices must be unique")
        object.__setattr__(self, "intercepted", idx)

    @classmethod
    def first(cls, count):
        return cls(tuple(range(count)))

    def validate(self, n_paths):
        if any(i < 0 or i >= n_paths for i in self.intercepted):
            raise ValueError(f"plan indices must lie in [0, {n_paths})")


def first_null_angle(cfg):
    """Smallest off-axis angle where the Airy pattern vanishes (``None`` if beyond 90 degrees)."""
    s = J1_FIRST_ZERO * cfg.wavelength / (math.pi * cfg.diameter)
    return math.asin(s) if s <= 1 else None


def aperture_gain(beta, cfg):
    """Field gain ``2 J1(x)/x`` with ``x = pi d sin(beta) / lambda``; signed, ``|gain| <= 1``."""
    beta = np.asarray(beta, dtype=float)
    g = np.asarray(jinc(cfg.scale * np.sin(beta)))
    if cfg.obliquity_enabled:
        g = g * 0.5 * (1.0 + np.cos(beta))
    return float(g) if g.ndim == 0 else g


def combine(main_phasor, pointing, side_beta, side_phasor, n_intercepted, cfg, backend=None):
    """Noiseless reconstruction for a block of trials (see :mod:`fadekey.kernels` for layout)."""
    if backend is None:
        func = kernels.eve_envelope
    else:
        func = kernels.eve_envelope_numba if backend == "numba" else kernels.eve_envelope_numpy
    return func(
        np.ascontiguousarray(main_phasor, dtype=np.complex128),
        np.ascontiguousarray(pointing, dtype=np.float64),
        np.ascontiguousarray(side_beta, dtype=np.float64),
        np.ascontiguousarray(side_phasor, dtype=np.complex128),
        int(n_intercepted),
        float(cfg.scale),
        bool(cfg.obliquity_enabled),
    )


def intercept_and_combine(real, plan, cfg, dop, t, rng):
    """Eve's estimate of Bob's envelope at time ``t`` for one realization.

    Randomness is drawn from ``rng`` in a fixed order: pointing errors (one per
    intercepted path), interference angles, interference phases, then Eve's
    receiver noise.
    """
    n_paths = real.n_paths
    plan.validate(n_paths)
    idx = np.asarray(plan.intercepted, dtype=int)
    k = idx.size
    n_side = cfg.side_terms(n_paths)
    pointing = cfg.pointing_sigma * rng.standard_normal(k)
    side_beta = rng.uniform(-math.pi, math.pi, size=(n_side, k))
    side_phase = rng.uniform(-math.pi, math.pi, size=(n_side, k))

    psi = path_phases(real.aoa[idx], real.phase[idx], dop.w_d, t)
    # reorder so the intercepted paths come first, padding keeps the 1/sqrt(N) norm
    main = np.zeros((1, n_paths), dtype=complex)
    main[0, :k] = np.exp(1j * psi)
    point = np.zeros((1, n_paths))
    point[0, :k] = pointing
    beta = np.zeros((n_side, 1, n_paths))
    beta[:, 0, :k] = side_beta
    phasor = np.zeros((n_side, 1, n_paths), dtype=complex)
    phasor[:, 0, :k] = np.exp(1j * side_phase)
    g_hat = complex(combine(main, point, beta, phasor, k, cfg)[0])
    return add_receiver_noise(g_hat, cfg.eve_snr_db, rng)
