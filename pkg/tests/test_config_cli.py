import os
from pathlib import Path
import subprocess
import sys

import pytest

from fadekey import cli
from fadekey.config import (
    ConfigTypeError,
    ConstraintError,
    ExperimentConfig,
    UnknownKeyError,
    build_config,
    config_from_echo,
    format_config,
    load_config,
    parse_assignments,
    parse_overrides,
)
from fadekey.fading import Model

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.n_paths, cfg.intercepted_count, cfg.snr_db, cfg.eve_snr_db) == (6, 6, 17.0, 17.0)
    assert cfg.interference_paths == 6
    assert len(cfg.diameters_m) == 21
    assert cfg.diameters_m[0] == pytest.approx(0.1) and cfg.diameters_m[-1] == pytest.approx(10.0)


def test_parse_assignments():
    vals = parse_assignments([
        "# comment", "", "n_paths = 20  # trailing", "eve_snr_db = noiseless", "model = Refined",
        "diameters_m = 0.5, 1, 2", "obliquity_enabled = true", "interference_paths = auto",
    ])
    assert vals == {"n_paths": 20, "eve_snr_db": None, "model": Model.REFINED, "diameters_m": (0.5, 1.0, 2.0),
                    "obliquity_enabled": True, "interference_paths": None}
    cfg = build_config(vals)
    assert cfg.interference_paths == 20


def test_logspace():
    cfg = build_config(parse_assignments(["diameters_m = logspace(0.1, 10, 3)"]))
    assert cfg.diameters_m == pytest.approx((0.1, 1.0, 10.0))


def test_changing_n_paths_resets_auto_interference():
    base = ExperimentConfig()
    assert build_config({"n_paths": 12, "intercepted_count": 12}, base).interference_paths == 12
    assert build_config({"n_paths": 12, "intercepted_count": 12, "interference_paths": 3}, base).interference_paths == 3


@pytest.mark.parametrize("lines, exc, key", [
    (["bogus = 1"], UnknownKeyError, "bogus"),
    (["n_paths = six"], ConfigTypeError, "n_paths"),
    (["obliquity_enabled = maybe"], ConfigTypeError, "obliquity_enabled"),
    (["snr_db = nan"], ConfigTypeError, "snr_db"),
])
def test_parse_errors_name_key(lines, exc, key):
    with pytest.raises(exc) as info:
        build_config(parse_assignments(lines))
    assert info.value.key == key
    assert key in str(info.value)


@pytest.mark.parametrize("values, key", [
    ({"intercepted_count": 7}, "intercepted_count"),
    ({"trials": 0}, "trials"),
    ({"diameters_m": ()}, "diameters_m"),
    ({"diameters_m": (1.0, -1.0)}, "diameters_m"),
    ({"wavelength_m": 0.0}, "wavelength_m"),
    ({"seed": -1}, "seed"),
])
def test_constraint_errors(values, key):
    with pytest.raises(ConstraintError) as info:
        build_config(values)
    assert info.value.key == key


def test_overrides_win(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("trials = 500\nseed = 1\n")
    cfg = load_config(path, parse_overrides(["trials=42"]))
    assert (cfg.trials, cfg.seed) == (42, 1)
    with pytest.raises(Exception):
        parse_overrides(["trials"])


@pytest.mark.parametrize("cfg", [
    ExperimentConfig(),
    ExperimentConfig(n_paths=20, intercepted_count=3, eve_snr_db=None, model="refined", interference_paths=40,
                     diameters_m=(0.1234567890123, 3.0), obliquity_enabled=True, pdf_paths=(1, 6, 20)),
])
def test_echo_round_trip(cfg):
    back = config_from_echo([f"# cfg {ln}" for ln in format_config(cfg)])
    assert back == cfg.with_overrides(workers=back.workers)


def test_workers_from_env(monkeypatch):
    monkeypatch.setenv("FADEKEY_WORKERS", "3")
    assert ExperimentConfig().workers == 3


def test_presets():
    top = load_config(CONFIGS / "paper_fig2_top.cfg")
    assert (top.n_paths, top.intercepted_count, top.snr_db, top.eve_snr_db) == (6, 6, 17.0, 17.0)
    assert (top.doppler_hz, top.wavelength_m, top.pointing_sigma_rad, top.threshold_multiple) == (10.0, 0.1, 0.002, 3.0)
    assert top.trials == 1_000_000 and not top.obliquity_enabled
    mid = load_config(CONFIGS / "paper_fig2_mid.cfg")
    assert (mid.n_paths, mid.intercepted_count, mid.interference_paths) == (20, 20, 20)
    bot = load_config(CONFIGS / "paper_fig2_bot.cfg")
    assert bot.eve_snr_db is None and bot.pointing_sigma_rad == 0.0
    fig1 = load_config(CONFIGS / "paper_fig1.cfg")
    assert (fig1.pdf_paths, fig1.pdf_missing, fig1.pdf_samples, fig1.pdf_bins) == ((6,), 1, 1_000_000, 100)
    ci = load_config(CONFIGS / "ci_fig2_top.cfg")
    assert ci.trials == 100_000 and ci.with_overrides(trials=top.trials) == top.with_overrides(workers=ci.workers)
    load_config(CONFIGS / "acf_validation.cfg")


def _sweep_args(out, *extra):
    return ["sweep", "--config", str(CONFIGS / "paper_fig2_top.cfg"), "--set", "trials=1000",
            "--set", "calibration_samples=20000", "--seed", "42", "--out", str(out), *extra]


def test_cli_sweep_is_deterministic(tmp_path, capsys):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert cli.main(_sweep_args(a)) == 0
    assert cli.main(_sweep_args(b)) == 0
    assert cli.main(_sweep_args(c, "--workers", "3")) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    text = a.read_text()
    assert "# seed = 42" in text and "# cfg trials = 1000" in text
    assert "wrote" in capsys.readouterr().out


def test_cli_config_errors(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert cli.main(["sweep", "--set", "intercepted_count=9", "--out", str(out)]) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("fadekey: config error: intercepted_count") and "\n" not in err
    assert cli.main(["sweep", "--set", "nope=1", "--out", str(out)]) == 2
    assert "nope" in capsys.readouterr().err
    assert cli.main(["sweep", "--set", "trials=x", "--out", str(out)]) == 2
    assert "trials" in capsys.readouterr().err
    assert not out.exists()


def test_cli_runtime_error(tmp_path, capsys):
    code = cli.main(["calibrate", "--set", "calibration_samples=100", "--out", str(tmp_path / "no" / "dir.txt")])
    assert code == 1
    assert capsys.readouterr().err.startswith("fadekey: error:")


def test_cli_calibrate_and_pdf(tmp_path, capsys):
    assert cli.main(["calibrate", "--set", "calibration_samples=50000"]) == 0
    assert "entropy_s = " in capsys.readouterr().out
    out = tmp_path / "pdf.csv"
    assert cli.main(["pdf", "--set", "pdf_samples=20000", "--out", str(out)]) == 0
    assert "# kl_bits n6_eve5 = " in out.read_text()


def test_cli_acf(tmp_path):
    out = tmp_path / "acf.csv"
    assert cli.main(["acf", "--set", "acf_realizations=300", "--out", str(out)]) == 0
    assert "# rmse n_paths=6" in out.read_text()


def test_cli_validate(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 7 and "7/7 checks passed" in out


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "fadekey", "--help"], capture_output=True, text=True)
    assert done.returncode == 0 and "sweep" in done.stdout


def test_numpy_backend_subprocess(tmp_path):
    code = (
        "import numpy as np, fadekey\n"
        "from fadekey import kernels, special_math\n"
        "assert fadekey.BACKEND == 'numpy'\n"
        "assert kernels.eve_envelope is kernels.eve_envelope_numpy\n"
        "assert special_math.bessel_j0(1.0) == special_math.j0_numpy(np.array([1.0]))[0]\n"
    )
    env = {**os.environ, "FADEKEY_BACKEND": "numpy"}
    done = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    bad = subprocess.run([sys.executable, "-c", "import fadekey"], env={**os.environ, "FADEKEY_BACKEND": "cuda"},
                         capture_output=True, text=True)
    assert bad.returncode != 0 and "FADEKEY_BACKEND" in bad.stderr


def test_backends_produce_same_sweep(tmp_path):
    outs = []
    for backend in ("numba", "numpy"):
        out = tmp_path / f"{backend}.csv"
        env = {**os.environ, "FADEKEY_BACKEND": backend}
        args = _sweep_args(out)
        subprocess.run([sys.executable, "-m", "fadekey", *args], env=env, check=True, capture_output=True)
        outs.append([ln for ln in out.read_text().splitlines() if not ln.startswith("# fadekey")])
    assert outs[0] == outs[1]
