import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fadekey import kernels
from fadekey.adversary import (
    ApertureConfig,
    InterceptionPlan,
    aperture_gain,
    combine,
    first_null_angle,
    intercept_and_combine,
)
from fadekey.fading import DopplerConfig, draw_angles, draw_realization, envelope_at

DOP = DopplerConfig.from_hz(10.0)
# d = 10 km at 0.1 m: side lobes at uniform angles are ~1e-8 in amplitude
HUGE = 1e4


def test_gain_on_axis():
    for d in (0.01, 0.3, 10.0):
        assert aperture_gain(0.0, ApertureConfig(d)) == 1.0


def test_gain_first_null():
    cfg = ApertureConfig(diameter=1.0, wavelength=0.1)
    beta = math.asin(3.8317059702 * 0.1 / (math.pi * 1.0))
    assert abs(aperture_gain(beta, cfg)) < 1e-6
    assert first_null_angle(cfg) == pytest.approx(beta, abs=1e-10)
    assert first_null_angle(ApertureConfig(diameter=0.05, wavelength=0.1)) is None


def test_gain_small_aperture_limit():
    beta = math.pi / 3
    d = 1e-8 * 0.1 / (math.pi * math.sin(beta))
    assert aperture_gain(beta, ApertureConfig(d)) == pytest.approx(1.0, abs=1e-8)


def test_obliquity_factor():
    cfg = ApertureConfig(1e-9, obliquity_enabled=True)
    assert aperture_gain(math.pi / 2, cfg) == pytest.approx(0.5, abs=1e-9)
    assert aperture_gain(0.0, cfg) == 1.0


@given(st.floats(-math.pi, math.pi), st.floats(1e-3, 100.0), st.booleans())
def test_gain_never_amplifies(beta, d, obliquity):
    assert abs(aperture_gain(beta, ApertureConfig(d, obliquity_enabled=obliquity))) <= 1.0


@pytest.mark.parametrize("kwargs", [dict(diameter=0.0), dict(diameter=1.0, wavelength=-1.0),
                                    dict(diameter=1.0, pointing_sigma=-0.1), dict(diameter=1.0, interference_paths=-1)])
def test_aperture_config_validation(kwargs):
    with pytest.raises(ValueError):
        ApertureConfig(**kwargs)


def test_plan_validation():
    with pytest.raises(ValueError):
        InterceptionPlan((1, 1))
    with pytest.raises(ValueError):
        InterceptionPlan((0, 6)).validate(6)


def _ideal(interference_paths=None):
    return ApertureConfig(HUGE, pointing_sigma=0.0, eve_snr_db=None, interference_paths=interference_paths)


@pytest.mark.parametrize("t", [0.0, 0.0137])
def test_full_interception_reconstructs(t):
    rng = np.random.default_rng(1)
    for _ in range(50):
        real = draw_realization(6, "clarke", rng)
        g = envelope_at(real, DOP, t)
        # no side terms at all: the exact limit
        assert intercept_and_combine(real, InterceptionPlan.first(6), _ideal(1), DOP, t, rng) == pytest.approx(g, abs=1e-12)
        # side terms present but suppressed by the huge aperture (rays near boresight still leak a little)
        assert intercept_and_combine(real, InterceptionPlan.first(6), _ideal(), DOP, t, rng) == pytest.approx(g, abs=1e-4)


def test_missing_path_subtraction_oracle():
    rng = np.random.default_rng(2)
    for missing in range(6):
        real = draw_realization(6, "refined", rng)
        t = 0.021
        plan = InterceptionPlan(tuple(i for i in range(6) if i != missing))
        expected = envelope_at(real, DOP, t) - np.exp(
            1j * (DOP.w_d * t * math.cos(real.aoa[missing]) + real.phase[missing])) / math.sqrt(6)
        got = intercept_and_combine(real, plan, _ideal(1), DOP, t, rng)
        assert got == pytest.approx(expected, abs=1e-9)


def test_empty_plan_is_zero():
    real = draw_realization(4, "clarke", np.random.default_rng(3))
    assert intercept_and_combine(real, InterceptionPlan(()), ApertureConfig(1.0), DOP, 0.0, np.random.default_rng(0)) == 0j


def _reconstruction(d, n, n_paths=6, seed=5):
    rng = np.random.default_rng(seed)
    _, phase = draw_angles(rng, (n, n_paths), "clarke")
    main = np.exp(1j * phase)
    side_beta = rng.uniform(-math.pi, math.pi, (n_paths - 1, n, n_paths))
    side = np.exp(1j * rng.uniform(-math.pi, math.pi, (n_paths - 1, n, n_paths)))
    g = main.sum(axis=1) / math.sqrt(n_paths)
    pointing = np.zeros((n, n_paths))
    return g, combine(main, pointing, side_beta, side, n_paths, ApertureConfig(d))


def test_fidelity_improves_with_diameter():
    errors = []
    for ratio in (1, 2, 5, 10, 20, 50):
        g, g_hat = _reconstruction(ratio * 0.1, 100_000)
        e = np.abs(g_hat - g) ** 2
        errors.append((e.mean(), e.std(ddof=1) / math.sqrt(e.size)))
    for (a, sa), (b, sb) in zip(errors, errors[1:]):
        assert b <= a + 3 * math.hypot(sa, sb)
    assert errors[-1][0] < errors[0][0] / 10


def test_ideal_amplitude_correlation():
    g, g_hat = _reconstruction(HUGE, 100_000, seed=6)
    assert np.corrcoef(np.abs(g), np.abs(g_hat))[0, 1] > 0.999


def test_noise_added_after_combining():
    real = draw_realization(6, "clarke", np.random.default_rng(4))
    g = envelope_at(real, DOP, 0.0)
    cfg = ApertureConfig(HUGE, eve_snr_db=17.0, interference_paths=1)
    diffs = np.array([intercept_and_combine(real, InterceptionPlan.first(6), cfg, DOP, 0.0, np.random.default_rng(s)) - g
                      for s in range(4000)])
    assert np.mean(np.abs(diffs) ** 2) == pytest.approx(10 ** -1.7, rel=0.1)


def test_backends_agree():
    rng = np.random.default_rng(7)
    n, n_paths = 500, 6
    main = np.exp(1j * rng.uniform(-math.pi, math.pi, (n, n_paths)))
    pointing = 0.002 * rng.standard_normal((n, n_paths))
    beta = rng.uniform(-math.pi, math.pi, (11, n, n_paths))
    side = np.exp(1j * rng.uniform(-math.pi, math.pi, (11, n, n_paths)))
    for k in (0, 3, 6):
        for obliquity in (False, True):
            cfg = ApertureConfig(0.7, obliquity_enabled=obliquity)
            a = combine(main, pointing, beta, side, k, cfg, backend="numba")
            b = combine(main, pointing, beta, side, k, cfg, backend="numpy")
            assert np.allclose(a, b, atol=1e-11, rtol=0)


def test_envelope_series_backends_agree():
    rng = np.random.default_rng(8)
    aoa, phase = draw_angles(rng, (20, 6), "clarke")
    a = kernels.envelope_series_numba(aoa, phase, 0.1, 1100)
    b = kernels.envelope_series_numpy(aoa, phase, 0.1, 1100)
    assert np.allclose(a, b, atol=1e-10, rtol=0)
