"""Self-checks run by ``fadekey validate``: fading statistics and estimator sanity."""

from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

from fadekey.experiment import run_acf_experiment
from fadekey.fading import Model, draw_angles
from fadekey.infotheory import conditional_mi, conditional_mi_entropy, conditional_mi_kl, counts_from_bits, JointCounts
from fadekey.keygen import calibrate
from fadekey.special_math import RayleighParams, rayleigh_cdf, rayleigh_quantile


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def rayleigh_ks(n_paths=20, samples=100_000, seed=7, model=Model.CLARKE):
    rng = np.random.default_rng(seed)
    _, phase = draw_angles(rng, (samples, n_paths), model)
    amp = np.abs(np.exp(1j * phase).sum(axis=1)) / math.sqrt(n_paths)
    return float(stats.kstest(amp, rayleigh_cdf).statistic)


def bsc_counts(flip, samples, seed):
    """X uniform, Y = X through a symbol-flip channel, Z independent uniform."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, samples)
    y = x ^ (rng.random(samples) < flip)
    z = rng.integers(0, 2, samples)
    return counts_from_bits(x, y, z)


def run_checks(seed=11):
    checks = []

    acf20 = run_acf_experiment(20, Model.CLARKE, 10_000, seed)
    checks.append(Check("acf first-order N=20", acf20.rmse_first < 0.02, f"rmse={acf20.rmse_first:.4g} (< 0.02)"))

    acf6 = run_acf_experiment(6, Model.CLARKE, 10_000, seed)
    lag0 = acf6.squared_envelope[0]
    checks.append(Check("acf squared-envelope N=6", acf6.rmse_squared < 0.05, f"rmse={acf6.rmse_squared:.4g} (< 0.05)"))
    checks.append(Check("acf squared-envelope lag 0 N=6", abs(lag0 - (2 - 1 / 6)) <= 0.02, f"value={lag0:.4f} (1.8333 +- 0.02)"))

    ks = rayleigh_ks(seed=seed)
    checks.append(Check("rayleigh convergence N=20", ks < 0.01, f"ks={ks:.4g} (< 0.01)"))

    cmi = conditional_mi(bsc_counts(0.11, 1_000_000, seed))
    target = 1 - binary_entropy(0.11)
    checks.append(Check("cmi on BSC(0.11)", abs(cmi - target) <= 0.01, f"cmi={cmi:.4f} (target {target:.4f} +- 0.01)"))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        counts = JointCounts(rng.integers(0, 1000, size=(2, 2, 2)) * (rng.random((2, 2, 2)) > 0.2))
        if counts.total == 0:
            continue
        worst = max(worst, abs(conditional_mi_entropy(counts) - conditional_mi_kl(counts)))
    checks.append(Check("cmi entropy vs divergence form", worst <= 1e-10, f"max gap={worst:.3g} (<= 1e-10)"))

    levels = (np.arange(1_000_000) + 0.5) / 1_000_000
    scheme = calibrate(rayleigh_quantile(levels, RayleighParams.unit_power()), 0.1)
    checks.append(Check("calibration entropy factor", abs(scheme.entropy_s - 0.00493) <= 0.002, f"s={scheme.entropy_s:.5f} (0.00493 +- 0.002)"))
    return checks
