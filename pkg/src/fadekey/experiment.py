"""Monte Carlo experiments: CMI-vs-aperture sweep, low-path pdfs, ACF validation.

Trials are processed in fixed blocks of ``BLOCK_SIZE``. Block ``b`` of an
experiment draws from generators spawned off
``SeedSequence(seed, spawn_key=(experiment_id, b))``, one child per kind of
randomness, so results do not depend on the worker count or completion
order. Each block draws once and is reused for every diameter (common random
numbers), and the per-kind streams keep draws aligned across configurations
that differ only in intercepted count, Eve's noise or pointing error.

Sweep results are merged as integer count tables ``(diameter, batch, x, y, z)``;
standard errors come from ``N_BATCHES`` contiguous batches of trial indices.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from fadekey import __version__, kernels
from fadekey._backend import BACKEND
from fadekey.adversary import ApertureConfig, InterceptionPlan, combine, intercept_and_combine
from fadekey.config import ExperimentConfig, format_config
from fadekey.fading import (
    DopplerConfig,
    Model,
    add_receiver_noise,
    draw_angles,
    draw_realization,
    envelope_at,
    lag_sums,
    quadrature_noise_std,
    theoretical_acf,
)
from fadekey.infotheory import (
    JointCounts,
    analytic_pdf,
    conditional_mi,
    empirical_pdf,
    kl_divergence,
    mutual_information,
)
from fadekey.keygen import Symbol, calibrate, quantize_eve, quantize_eve_array, quantize_legit, quantize_legit_array
from fadekey.special_math import rayleigh_cdf

BLOCK_SIZE = 4096
N_BATCHES = 20

SWEEP_ID = 1
PDF_ID = 2
ACF_ID = 3
CALIBRATION_ID = 4

# child stream index within a block
_CHANNEL, _LEGIT_NOISE, _POINTING, _SIDE_BETA, _SIDE_PHASE, _EVE_NOISE = range(6)


def block_rngs(seed, experiment_id, block, count=6):
    ss = np.random.SeedSequence(seed, spawn_key=(experiment_id, block))
    return [np.random.default_rng(child) for child in ss.spawn(count)]


def trial_rng(seed, trial_index):
    """Generator for the scalar reference path, keyed by trial index."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SWEEP_ID, 2**32 + trial_index)))


def _blocks(total):
    return [(b, s, min(s + BLOCK_SIZE, total)) for b, s in enumerate(range(0, total, BLOCK_SIZE))]


def _map_blocks(func, blocks, workers):
    if workers <= 1 or len(blocks) <= 1:
        return [func(*blk) for blk in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda blk: func(*blk), blocks))


def _complex_noise(rng, std, n):
    # always drawn, even at std = 0, so streams stay aligned across configs
    return std * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def threshold_for(cfg):
    """Guard half-width: ``threshold_multiple`` times the per-quadrature noise std."""
    return cfg.threshold_multiple * quadrature_noise_std(cfg.snr_db)


def aperture_for(cfg, diameter):
    return ApertureConfig(
        diameter=diameter,
        wavelength=cfg.wavelength_m,
        pointing_sigma=cfg.pointing_sigma_rad,
        eve_snr_db=cfg.eve_snr_db,
        obliquity_enabled=cfg.obliquity_enabled,
        interference_paths=cfg.interference_paths,
    )


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------


def calibration_amplitudes(cfg):
    """Bob's noisy amplitude at the configured (N, SNR), ``cfg.calibration_samples`` draws."""
    rng_channel, rng_noise = block_rngs(cfg.seed, CALIBRATION_ID, 0, count=2)
    std = quadrature_noise_std(cfg.snr_db)
    out = np.empty(cfg.calibration_samples)
    for _, start, stop in _blocks(cfg.calibration_samples):
        n = stop - start
        _, phase = draw_angles(rng_channel, (n, cfg.n_paths), cfg.model)
        g = np.exp(1j * phase).sum(axis=1) / math.sqrt(cfg.n_paths)
        out[start:stop] = np.abs(g + _complex_noise(rng_noise, std, n))
    return out


def calibrate_scheme(cfg):
    return calibrate(calibration_amplitudes(cfg), threshold_for(cfg))


# ---------------------------------------------------------------------------
# single trial (reference path)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    alice: Symbol
    bob: Symbol
    eve: Symbol

    def __post_init__(self):
        if self.eve is Symbol.DROP:
            raise ValueError("Eve never drops")

    @property
    def kept(self):
        return self.alice is not Symbol.DROP and self.bob is not Symbol.DROP


def run_trial(cfg, diameter, scheme, rng):
    """One trial composed from the per-realization building blocks.

    The sweep uses a vectorised block path instead; this one is the
    readable reference it is tested against.
    """
    dop = DopplerConfig.from_hz(cfg.doppler_hz)
    real = draw_realization(cfg.n_paths, cfg.model, rng)
    g = envelope_at(real, dop, 0.0)
    alice = abs(add_receiver_noise(g, cfg.snr_db, rng))
    bob = abs(add_receiver_noise(g, cfg.snr_db, rng))
    plan = InterceptionPlan.first(cfg.intercepted_count)
    g_hat = intercept_and_combine(real, plan, aperture_for(cfg, diameter), dop, 0.0, rng)
    return TrialRecord(quantize_legit(alice, scheme), quantize_legit(bob, scheme), quantize_eve(abs(g_hat), scheme))


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    diameter: float
    cmi_bits: float
    cmi_stderr: float
    mi_bits: float
    mi_stderr: float
    key_rate_bound_bits: float
    kept_fraction: float
    ab_mismatch: float
    eve_bob_agreement: float
    trials_kept: int


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    scheme: object
    rows: tuple
    counts: np.ndarray  # (diameter, batch, x, y, z)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]


def _sweep_block(cfg, scheme, block, start, stop):
    n = stop - start
    n_paths = cfg.n_paths
    n_side = max(cfg.interference_paths - 1, 0)
    rngs = block_rngs(cfg.seed, SWEEP_ID, block)

    _, phase = draw_angles(rngs[_CHANNEL], (n, n_paths), cfg.model)
    main_phasor = np.exp(1j * phase)
    g = main_phasor.sum(axis=1) / math.sqrt(n_paths)
    std = quadrature_noise_std(cfg.snr_db)
    alice = np.abs(g + _complex_noise(rngs[_LEGIT_NOISE], std, n))
    bob = np.abs(g + _complex_noise(rngs[_LEGIT_NOISE], std, n))
    x = quantize_legit_array(alice, scheme)
    y = quantize_legit_array(bob, scheme)
    kept = (x != Symbol.DROP) & (y != Symbol.DROP)

    pointing = cfg.pointing_sigma_rad * rngs[_POINTING].standard_normal((n, n_paths))
    side_beta = rngs[_SIDE_BETA].uniform(-math.pi, math.pi, size=(n_side, n, n_paths))
    side_phasor = np.exp(1j * rngs[_SIDE_PHASE].uniform(-math.pi, math.pi, size=(n_side, n, n_paths)))
    eve_noise = _complex_noise(rngs[_EVE_NOISE], quadrature_noise_std(cfg.eve_snr_db), n)

    batch = (np.arange(start, stop, dtype=np.int64) * N_BATCHES) // cfg.trials
    cell_base = (batch * 8 + 4 * x.astype(np.int64) + 2 * y.astype(np.int64))[kept]
    out = np.zeros((len(cfg.diameters_m), N_BATCHES * 8), dtype=np.int64)
    for j, d in enumerate(cfg.diameters_m):
        ap = aperture_for(cfg, d)
        g_hat = combine(main_phasor, pointing, side_beta, side_phasor, cfg.intercepted_count, ap) + eve_noise
        z = quantize_eve_array(np.abs(g_hat), scheme)[kept]
        out[j] = np.bincount(cell_base + z, minlength=N_BATCHES * 8)
    return out


def _batch_stderr(tables, estimator):
    vals = [estimator(JointCounts(t)) for t in tables if t.sum() > 0]
    if len(vals) < 2:
        return float("nan")
    return float(np.std(vals, ddof=1) / math.sqrt(len(vals)))


def _row(diameter, counts, trials):
    total = JointCounts(counts.sum(axis=0))
    kept = total.total
    if kept == 0:
        nan = float("nan")
        return SweepRow(diameter, nan, nan, nan, nan, nan, 0.0, nan, nan, 0)
    t = total.table
    cmi = conditional_mi(total)
    mi = mutual_information(total)
    return SweepRow(
        diameter=float(diameter),
        cmi_bits=cmi,
        cmi_stderr=_batch_stderr(counts, conditional_mi),
        mi_bits=mi,
        mi_stderr=_batch_stderr(counts, mutual_information),
        key_rate_bound_bits=min(mi, cmi),
        kept_fraction=kept / trials,
        ab_mismatch=(t[0, 1].sum() + t[1, 0].sum()) / kept,
        eve_bob_agreement=(t[:, 0, 0].sum() + t[:, 1, 1].sum()) / kept,
        trials_kept=kept,
    )


def run_sweep(cfg, scheme=None, workers=None):
    """Key-rate bound versus Eve's aperture diameter, ``cfg.trials`` trials per diameter."""
    if scheme is None:
        scheme = calibrate_scheme(cfg)
    workers = cfg.workers if workers is None else workers
    parts = _map_blocks(lambda b, s, e: _sweep_block(cfg, scheme, b, s, e), _blocks(cfg.trials), workers)
    counts = np.sum(parts, axis=0).reshape(len(cfg.diameters_m), N_BATCHES, 2, 2, 2)
    rows = tuple(_row(d, counts[j], cfg.trials) for j, d in enumerate(cfg.diameters_m))
    return SweepResult(cfg, scheme, rows, counts)


# ---------------------------------------------------------------------------
# low-path pdfs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PdfResult:
    histograms: dict  # label -> Histogram
    kl_bits: dict  # readout label -> bits


def low_path_amplitudes(n_paths, missing, samples, seed, model=Model.CLARKE):
    """Amplitudes of Bob's N-path envelope and of Eve's perfect copy missing ``missing`` paths."""
    rng = block_rngs(seed, PDF_ID, n_paths, count=1)[0]
    bob = np.empty(samples)
    eve = np.empty(samples)
    kept_paths = max(n_paths - missing, 0)
    for _, start, stop in _blocks(samples):
        _, phase = draw_angles(rng, (stop - start, n_paths), model)
        ph = np.exp(1j * phase)
        bob[start:stop] = np.abs(ph.sum(axis=1)) / math.sqrt(n_paths)
        eve[start:stop] = np.abs(ph[:, :kept_paths].sum(axis=1)) / math.sqrt(n_paths)
    return bob, eve


def run_pdf_experiment(n_paths_list, missing_for_eve, samples, seed, bins=100, max_amplitude=3.0):
    """Empirical amplitude pdfs for each N, Eve's (N - missing)-path copy, and KL readouts.

    ``kl_bits`` holds ``n{N}`` and ``n{N}_eve{N-missing}`` against the analytic
    Rayleigh masses, and ``n{N}_eve{K}||n{N}`` between Eve's and Bob's
    empirical pdfs (reference smoothed by adding half a count per bin).
    """
    if samples < 10_000:
        raise ValueError("pdf experiment needs at least 1e4 samples")
    rng_range = (0.0, max_amplitude)
    hists = {"rayleigh": analytic_pdf(rayleigh_cdf, bins, rng_range)}
    kl = {}
    for n in n_paths_list:
        bob, eve = low_path_amplitudes(n, missing_for_eve, samples, seed)
        k = max(n - missing_for_eve, 0)
        bob_label, eve_label = f"n{n}", f"n{n}_eve{k}"
        hists[bob_label] = empirical_pdf(bob, bins, rng_range)
        hists[eve_label] = empirical_pdf(eve, bins, rng_range)
        kl[bob_label] = kl_divergence(hists[bob_label], hists["rayleigh"])
        kl[eve_label] = kl_divergence(hists[eve_label], hists["rayleigh"])
        kl[f"{eve_label}||{bob_label}"] = kl_divergence(
            hists[eve_label], empirical_pdf(bob, bins, rng_range, add_half=True)
        )
    return PdfResult(hists, kl)


# ---------------------------------------------------------------------------
# ACF validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AcfResult:
    n_paths: int
    w_d_tau: np.ndarray
    first_order: np.ndarray
    squared_envelope: np.ndarray
    theory_first: np.ndarray
    theory_squared: np.ndarray
    theory_squared_rayleigh: np.ndarray

    @property
    def rmse_first(self):
        return float(np.sqrt(np.mean((self.first_order - self.theory_first) ** 2)))

    @property
    def rmse_squared(self):
        return float(np.sqrt(np.mean((self.squared_envelope - self.theory_squared) ** 2)))

    @property
    def rmse_squared_rayleigh(self):
        return float(np.sqrt(np.mean((self.squared_envelope - self.theory_squared_rayleigh) ** 2)))


def run_acf_experiment(n_paths, model, realizations, seed, max_lag_rad=10.0, step_rad=0.1,
                       doppler_hz=10.0, origins_factor=10, chunk=1000):
    """Empirical ACFs of simulated trajectories against the finite-N closed forms.

    Each realization is sampled every ``step_rad / w_d`` seconds for
    ``(origins_factor + 1) * max_lag`` steps; averages run over realizations and
    over the first ``origins_factor * max_lag`` time origins. A single Clarke
    trajectory decorrelates slowly, so a long origin window is what brings the
    lag-0 squared-envelope estimate within a few hundredths at 1e4 realizations.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    if doppler_hz <= 0:
        raise ValueError("ACF validation needs a positive Doppler shift")
    max_lag = int(round(max_lag_rad / step_rad))
    window = max(origins_factor * max_lag, 1)
    first = np.zeros(max_lag + 1)
    second = np.zeros(max_lag + 1)
    rng = block_rngs(seed, ACF_ID, n_paths, count=1)[0]
    for start in range(0, realizations, chunk):
        n = min(chunk, realizations - start)
        aoa, phase = draw_angles(rng, (n, n_paths), model)
        s = kernels.envelope_series(aoa, phase, step_rad, window + max_lag)
        f, q = lag_sums(s, max_lag, window)
        first += f
        second += q
    first /= first[0]
    second /= realizations * window
    x = np.arange(max_lag + 1) * step_rad
    theory = theoretical_acf(x, n_paths)
    return AcfResult(n_paths, x, first, second, theory.first_order, theory.squared_envelope,
                     theoretical_acf(x, None).squared_envelope)


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "diameter_m",
    "cmi_bits",
    "cmi_stderr",
    "mi_bits",
    "mi_stderr",
    "key_rate_bound_bits",
    "kept_fraction",
    "ab_mismatch",
    "eve_bob_agreement",
    "trials_kept",
)


def _g6(v):
    return f"{v:.6g}"


def metadata_lines(cfg, scheme=None, experiment="sweep"):
    lines = [f"# fadekey {__version__} backend={BACKEND} experiment={experiment}", f"# seed = {cfg.seed}"]
    if scheme is not None:
        lines.append(
            f"# scheme median_m={scheme.median_m!r} threshold_t={scheme.threshold_t!r} entropy_s={scheme.entropy_s!r}"
        )
    lines += [f"# cfg {line}" for line in format_config(cfg)]
    return lines


def sweep_csv_lines(result):
    lines = metadata_lines(result.config, result.scheme)
    lines.append(",".join(SWEEP_COLUMNS))
    for r in result.rows:
        vals = [r.diameter, r.cmi_bits, r.cmi_stderr, r.mi_bits, r.mi_stderr, r.key_rate_bound_bits,
                r.kept_fraction, r.ab_mismatch, r.eve_bob_agreement]
        lines.append(",".join([_g6(v) for v in vals] + [str(r.trials_kept)]))
    return lines


def pdf_csv_lines(result, cfg):
    lines = metadata_lines(cfg, experiment="pdf")
    lines += [f"# kl_bits {label} = {_g6(v)}" for label, v in result.kl_bits.items()]
    labels = list(result.histograms)
    lines.append(",".join(["bin_center"] + labels))
    centers = result.histograms["rayleigh"].centers
    for i, c in enumerate(centers):
        lines.append(",".join([_g6(c)] + [_g6(result.histograms[lb].masses[i]) for lb in labels]))
    return lines


def acf_csv_lines(results, cfg):
    lines = metadata_lines(cfg, experiment="acf")
    for res in results:
        lines.append(
            f"# rmse n_paths={res.n_paths} first_order={_g6(res.rmse_first)} "
            f"squared_envelope={_g6(res.rmse_squared)} squared_vs_rayleigh={_g6(res.rmse_squared_rayleigh)}"
        )
    lines.append("n_paths,w_d_tau,first_order,first_order_theory,squared_envelope,squared_envelope_theory")
    for res in results:
        for i in range(res.w_d_tau.size):
            vals = [res.w_d_tau[i], res.first_order[i], res.theory_first[i], res.squared_envelope[i],
                    res.theory_squared[i]]
            lines.append(",".join([str(res.n_paths)] + [_g6(v) for v in vals]))
    return lines


def write_lines(lines, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
