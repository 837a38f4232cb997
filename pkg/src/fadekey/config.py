"""Experiment configuration and its flat ``key = value`` text format.

One setting per line, ``#`` starts a comment. Units are in the key names
(``_m``, ``_hz``, ``_rad``, ``_db``). Lists are comma separated; diameters also
accept ``logspace(lo, hi, count)``. SNR keys take ``noiseless``;
``interference_paths`` takes ``auto`` (same as ``n_paths``).
"""

from dataclasses import dataclass, field, fields, replace
import math
import os
import re

import numpy as np

from fadekey.fading import Model


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class UnknownKeyError(ConfigError):
    pass


class ConfigTypeError(ConfigError):
    pass


class ConstraintError(ConfigError):
    pass


def default_diameters(wavelength=0.1, count=21):
    """Log grid with ``d / lambda`` from 1 to 100."""
    return tuple(float(d) for d in wavelength * np.logspace(0.0, 2.0, count))


def default_workers():
    env = os.environ.get("FADEKEY_WORKERS")
    if env:
        return max(int(env), 1)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    n_paths: int = 6
    intercepted_count: int = 6
    model: Model = Model.CLARKE
    snr_db: float | None = 17.0
    eve_snr_db: float | None = 17.0
    doppler_hz: float = 10.0
    wavelength_m: float = 0.1
    pointing_sigma_rad: float = 0.002
    threshold_multiple: float = 3.0
    diameters_m: tuple = field(default_factory=default_diameters)
    trials: int = 100_000
    calibration_samples: int = 1_000_000
    seed: int = 20240101
    obliquity_enabled: bool = False
    interference_paths: int | None = None
    # pdf experiment
    pdf_paths: tuple = (6,)
    pdf_missing: int = 1
    pdf_samples: int = 1_000_000
    pdf_bins: int = 100
    pdf_max_amplitude: float = 3.0
    # acf experiment
    acf_realizations: int = 10_000
    acf_max_lag_rad: float = 10.0
    acf_step_rad: float = 0.1
    # execution only, never affects results
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "diameters_m", tuple(float(d) for d in self.diameters_m))
        object.__setattr__(self, "pdf_paths", tuple(int(n) for n in self.pdf_paths))
        if self.interference_paths is None:
            object.__setattr__(self, "interference_paths", self.n_paths)
        if self.workers is None:
            object.__setattr__(self, "workers", default_workers())
        self._validate()

    def _validate(self):
        def need(ok, key, msg):
            if not ok:
                raise ConstraintError(key, msg)

        need(self.n_paths >= 1, "n_paths", "must be >= 1")
        need(0 <= self.intercepted_count <= self.n_paths, "intercepted_count", f"must lie in [0, n_paths={self.n_paths}]")
        need(self.trials >= 1, "trials", "must be >= 1")
        need(self.calibration_samples >= 1, "calibration_samples", "must be >= 1")
        need(len(self.diameters_m) > 0, "diameters_m", "must not be empty")
        need(all(d > 0 and math.isfinite(d) for d in self.diameters_m), "diameters_m", "must all be positive")
        need(self.wavelength_m > 0, "wavelength_m", "must be > 0")
        need(self.doppler_hz >= 0, "doppler_hz", "must be >= 0")
        need(self.pointing_sigma_rad >= 0, "pointing_sigma_rad", "must be >= 0")
        need(self.threshold_multiple >= 0, "threshold_multiple", "must be >= 0")
        need(self.interference_paths >= 0, "interference_paths", "must be >= 0")
        need(0 <= self.seed < 2**64, "seed", "must be a 64-bit unsigned integer")
        need(len(self.pdf_paths) > 0 and min(self.pdf_paths) >= 1, "pdf_paths", "must be a non-empty list of counts >= 1")
        need(0 <= self.pdf_missing, "pdf_missing", "must be >= 0")
        need(self.pdf_samples >= 1, "pdf_samples", "must be >= 1")
        need(self.pdf_bins >= 2, "pdf_bins", "must be >= 2")
        need(self.pdf_max_amplitude > 0, "pdf_max_amplitude", "must be > 0")
        need(self.acf_realizations >= 1, "acf_realizations", "must be >= 1")
        need(self.acf_step_rad > 0, "acf_step_rad", "must be > 0")
        need(self.acf_max_lag_rad >= self.acf_step_rad, "acf_max_lag_rad", "must be >= acf_step_rad")
        need(self.workers >= 1, "workers", "must be >= 1")
        for key in ("snr_db", "eve_snr_db"):
            v = getattr(self, key)
            need(v is None or math.isfinite(v), key, "must be finite or 'noiseless'")

    @property
    def w_d(self):
        return 2.0 * math.pi * self.doppler_hz

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}
_LOGSPACE = re.compile(r"^logspace\(\s*([^,]+),\s*([^,]+),\s*([^,]+)\)$")


def _int(s):
    return int(s)


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _snr(s):
    return None if s.lower() in ("noiseless", "none", "inf") else _float(s)


def _bool(s):
    if s.lower() in _TRUE:
        return True
    if s.lower() in _FALSE:
        return False
    raise ValueError("expected true/false")


def _auto_int(s):
    return None if s.lower() == "auto" else int(s)


def _float_list(s):
    m = _LOGSPACE.match(s)
    if m:
        lo, hi, n = _float(m[1]), _float(m[2]), int(m[3])
        if lo <= 0 or hi <= 0 or n < 1:
            raise ValueError("logspace needs positive bounds and count")
        return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n))
    return tuple(_float(p) for p in s.split(",") if p.strip())


def _int_list(s):
    return tuple(int(p) for p in s.split(",") if p.strip())


def _model(s):
    return Model(s.lower())


_PARSERS = {
    int: _int,
    float: _float,
    bool: _bool,
    "snr": _snr,
    "auto_int": _auto_int,
    "floats": _float_list,
    "ints": _int_list,
    Model: _model,
}

_KINDS = {
    "snr_db": "snr",
    "eve_snr_db": "snr",
    "interference_paths": "auto_int",
    "workers": "auto_int",
    "diameters_m": "floats",
    "pdf_paths": "ints",
    "model": Model,
}

KEYS = tuple(f.name for f in fields(ExperimentConfig))
_ECHO_EXCLUDED = {"workers"}


def _kind(f):
    if f.name in _KINDS:
        return _KINDS[f.name]
    return {"int": int, "float": float, "bool": bool}[f.type if isinstance(f.type, str) else f.type.__name__]


_FIELD_KIND = {f.name: _kind(f) for f in fields(ExperimentConfig)}


def parse_value(key, text):
    if key not in _FIELD_KIND:
        raise UnknownKeyError(key, "unknown configuration key")
    try:
        return _PARSERS[_FIELD_KIND[key]](text.strip())
    except ValueError as exc:
        raise ConfigTypeError(key, f"cannot parse {text.strip()!r}: {exc}") from None


def parse_assignments(lines):
    """Parse ``key = value`` lines into a dict of typed values (comments and blanks skipped)."""
    out = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def build_config(values, base=None):
    base = ExperimentConfig() if base is None else base
    unknown = set(values) - set(KEYS)
    if unknown:
        key = sorted(unknown)[0]
        raise UnknownKeyError(key, "unknown configuration key")
    if "n_paths" in values and "interference_paths" not in values:
        values = {**values, "interference_paths": None}
    try:
        return replace(base, **values)
    except TypeError as exc:  # pragma: no cover - guarded by parse_value
        raise ConfigTypeError(None, str(exc)) from None


def load_config(path, overrides=None):
    """Read a config file; ``overrides`` (already-typed dict) win over file values."""
    with open(path, encoding="utf-8") as fh:
        values = parse_assignments(fh)
    values.update(overrides or {})
    return build_config(values)


def parse_overrides(pairs):
    """Turn ``["key=value", ...]`` into typed values."""
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(None, f"override must look like key=value, got {pair!r}")
        key, value = (p.strip() for p in pair.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def _format(value):
    if value is None:
        return "noiseless"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Model):
        return value.value
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg):
    """``key = value`` lines for every result-affecting field; re-parses to an equal config."""
    return [f"{name} = {_format(getattr(cfg, name))}" for name in KEYS if name not in _ECHO_EXCLUDED]


def config_from_echo(lines, prefix="# cfg "):
    """Recover a config from the echo block at the top of an output CSV."""
    body = [ln[len(prefix):] for ln in lines if ln.startswith(prefix)]
    return build_config(parse_assignments(body))
