"""Command-line entry point: ``fadekey {sweep,pdf,acf,calibrate,validate}``."""

import argparse
import sys

from fadekey.config import ConfigError, ExperimentConfig, build_config, load_config, parse_overrides
from fadekey.experiment import (
    acf_csv_lines,
    calibrate_scheme,
    pdf_csv_lines,
    run_acf_experiment,
    run_pdf_experiment,
    run_sweep,
    sweep_csv_lines,
    write_lines,
)


def _parser():
    p = argparse.ArgumentParser(prog="fadekey", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("sweep", "conditional MI versus Eve's aperture diameter"),
        ("pdf", "low-path amplitude pdfs and KL divergences"),
        ("acf", "autocorrelation validation against the closed forms"),
        ("calibrate", "print the calibrated quantizer"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="key = value config file (defaults if omitted)")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key; repeatable, wins over the file")
        sp.add_argument("--seed", type=int, help="shortcut for --set seed=N")
        sp.add_argument("--workers", type=int, help="worker threads (default: FADEKEY_WORKERS or CPU count)")
        sp.add_argument("--out", required=name != "calibrate", help="output CSV path")
    sub.add_parser("validate", help="run the fading-statistics and estimator self-checks")
    return p


def _config(args):
    overrides = parse_overrides(args.overrides)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.config:
        return load_config(args.config, overrides)
    return build_config(overrides, ExperimentConfig())


def _sweep(cfg, out):
    result = run_sweep(cfg)
    write_lines(sweep_csv_lines(result), out)
    s = result.scheme
    print(f"scheme: m={s.median_m:.6g} T={s.threshold_t:.6g} s={s.entropy_s:.6g}")
    print(f"{'diameter_m':>10} {'cmi_bits':>9} {'mi_bits':>8} {'cmi/mi':>7} {'kept':>6}")
    for r in result:
        ratio = r.cmi_bits / r.mi_bits if r.mi_bits > 0 else float("nan")
        print(f"{r.diameter:10.4g} {r.cmi_bits:9.4f} {r.mi_bits:8.4f} {ratio:7.3f} {r.kept_fraction:6.3f}")
    print(f"wrote {out}")


def _pdf(cfg, out):
    result = run_pdf_experiment(cfg.pdf_paths, cfg.pdf_missing, cfg.pdf_samples, cfg.seed,
                                bins=cfg.pdf_bins, max_amplitude=cfg.pdf_max_amplitude)
    write_lines(pdf_csv_lines(result, cfg), out)
    for label, v in result.kl_bits.items():
        p, q = label.split("||") if "||" in label else (label, "rayleigh")
        print(f"KL[{p} || {q}] = {v:.5g} bits")
    print(f"wrote {out}")


def _acf(cfg, out):
    res = run_acf_experiment(cfg.n_paths, cfg.model, cfg.acf_realizations, cfg.seed, cfg.acf_max_lag_rad,
                             cfg.acf_step_rad, cfg.doppler_hz)
    write_lines(acf_csv_lines([res], cfg), out)
    print(f"N={res.n_paths} first-order rmse={res.rmse_first:.4g} squared-envelope rmse={res.rmse_squared:.4g} "
          f"(vs Rayleigh limit {res.rmse_squared_rayleigh:.4g})")
    print(f"wrote {out}")


def _calibrate(cfg, out):
    s = calibrate_scheme(cfg)
    lines = [
        f"median_m = {s.median_m!r}",
        f"threshold_t = {s.threshold_t!r}",
        f"entropy_s = {s.entropy_s!r}",
    ]
    print("\n".join(lines))
    if out:
        write_lines(lines, out)


def _validate():
    from fadekey.validation import run_checks

    checks = run_checks()
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _validate()
        cfg = _config(args)
        {"sweep": _sweep, "pdf": _pdf, "acf": _acf, "calibrate": _calibrate}[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"fadekey: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"fadekey: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
