"""Command-line harness around the library: simulate, sample, reconstruct,
estimate interference, recover echoes, or run the full pipeline and sweeps.

Exit codes: 0 success, 2 missing input file, 3 malformed configuration,
4 dimension mismatch, 5 malformed matrix file, 1 any other failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baseline import digital_integration
from .bic import select_order
from .echo_recovery import recover_echo
from .freq_init import fast_freq_init
from .mmrelax import mmrelax_full
from .obm1 import Obm1FormatError, read_obm1, write_obm1
from .pipeline import (ConfigError, ExperimentConfig, build_scenario,
                       config_to_text, load_measured_rfi, parse_config,
                       report_csv, run_pipeline, run_sweep)
from .signal_model import SignedMatrix, ThresholdMatrix, sign_sample

EXIT_OK = 0
EXIT_MISSING_FILE = 2
EXIT_BAD_CONFIG = 3
EXIT_DIMENSION = 4
EXIT_BAD_FORMAT = 5
EXIT_OTHER = 1


class DimensionError(ValueError):
    pass


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        cfg = parse_config(path.read_text())
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "sinr_db", None) is not None and not isinstance(args.sinr_db, list):
        cfg = replace(cfg, sinr_db=args.sinr_db)
    if getattr(args, "inr_db", None) is not None and not isinstance(args.inr_db, list):
        cfg = replace(cfg, inr_db=args.inr_db)
    if getattr(args, "kmax", None) is not None:
        cfg = replace(cfg, k_max=args.kmax)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_signed(path) -> SignedMatrix:
    mat = read_obm1(path)
    if not isinstance(mat, SignedMatrix):
        raise Obm1FormatError("expected signed matrix (OBM1 dtype 2)")
    return mat


def _thresholds_for(cfg: ExperimentConfig, y: SignedMatrix) -> ThresholdMatrix:
    return ThresholdMatrix(cfg.h, y.n_fast, y.m_slow)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    scenario = build_scenario(cfg)
    write_obm1(out / "echo.obm1", scenario.echo_true[:, None])
    write_obm1(out / "analog.obm1", scenario.signal)
    write_obm1(out / "rfi.obm1", scenario.rfi_matrix)
    print(f"wrote echo.obm1, analog.obm1, rfi.obm1 to {out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    signal = read_obm1(args.input)
    if isinstance(signal, SignedMatrix):
        raise Obm1FormatError("expected real matrix (OBM1 dtype 1) to sample")
    thresholds = ThresholdMatrix(cfg.h, signal.shape[0], signal.shape[1])
    write_obm1(out / "signed.obm1", sign_sample(signal, thresholds))
    print(f"wrote signed.obm1 to {out}")
    return EXIT_OK


def cmd_di(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    y = _read_signed(args.input)
    estimate = digital_integration(y.data, _thresholds_for(cfg, y))
    write_obm1(out / "di.obm1", estimate[:, None])
    print(f"wrote di.obm1 to {out}")
    return EXIT_OK


def cmd_rfi_est(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    y = _read_signed(args.input)
    hmat = _thresholds_for(cfg, y).full()
    fi = fast_freq_init(y.data, hmat, cfg.fi, cfg.k_max)
    if fi.omegas.size:
        fit = mmrelax_full(y.data, hmat, min(cfg.k_max, fi.omegas.size),
                           fi.omegas, cfg.mm, lam_init=fi.lam)
        k_hat, params, _ = select_order(y.data, hmat, fit.params.n_components, fit=fit)
    else:
        from .bic import fit_scale_only
        params, k_hat = fit_scale_only(y.data, hmat, fi.lam), 0
    r_hat = params.to_unscaled().synthesize(y.n_fast) if k_hat else np.zeros(y.data.shape)
    write_obm1(out / "rfi_est.obm1", r_hat)
    lines = ["k,omega,lambda"]
    for k in range(k_hat):
        lines.append(f"{k + 1},{float(params.freqs[k])!r},{float(params.lam)!r}")
    if not k_hat:
        lines.append(f"0,,{float(params.lam)!r}")
    (out / "rfi_params.csv").write_text("\n".join(lines) + "\n")
    print(f"k_hat={k_hat}; wrote rfi_est.obm1, rfi_params.csv to {out}")
    return EXIT_OK


def cmd_recover(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    y = _read_signed(args.input)
    r_hat = read_obm1(args.rfi) if args.rfi else np.zeros(y.data.shape)
    if isinstance(r_hat, SignedMatrix):
        raise Obm1FormatError("expected real matrix (OBM1 dtype 1) for the RFI estimate")
    if r_hat.shape != y.data.shape:
        raise DimensionError(f"RFI estimate {r_hat.shape} does not match data {y.data.shape}")
    from .pipeline import make_echo
    cfg = replace(cfg, n_fast=y.n_fast, m_slow=y.m_slow)
    _, _, dictionary = make_echo(cfg)
    hmat = _thresholds_for(cfg, y).full()
    result = recover_echo(y.data, hmat, r_hat, dictionary, cfg.er)
    write_obm1(out / "recovered.obm1", result.echo[:, None])
    write_obm1(out / "gamma.obm1", result.gamma[:, None])
    print(f"wrote recovered.obm1, gamma.obm1 to {out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    report, artifacts = run_pipeline(cfg)
    (out / "report.csv").write_text(report_csv([report]))
    if args.save_matrices:
        write_obm1(out / "signed.obm1", artifacts["scenario"].signed)
        write_obm1(out / "r_hat.obm1", artifacts["r_hat"])
        write_obm1(out / "recovered.obm1", artifacts["recovery"].echo[:, None])
        write_obm1(out / "di.obm1", artifacts["di_echo"][:, None])
    for stage, secs in report.timings.items():
        print(f"timing {stage}: {secs:.3f}s", file=sys.stderr)
    print(f"k_hat={report.k_hat} nre_proposed={report.nre_proposed_db:.2f} dB "
          f"nre_di={report.nre_di_db:.2f} dB; wrote report.csv to {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    sinr_list = args.sinr_db if args.sinr_db else [cfg.sinr_db]
    inr_list = args.inr_db if args.inr_db else [cfg.inr_db]
    table, reports = run_sweep(cfg, sinr_list, inr_list)
    (out / "sweep.csv").write_text(table)
    (out / "reports.csv").write_text(report_csv(reports))
    print(f"wrote sweep.csv ({len(reports)} points) to {out}")
    return EXIT_OK


def _csv_floats(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onebit-radar", description=__doc__)
    parser.add_argument("--config", type=str, default="", help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="write echo, analog and RFI matrices")
    p = sub.add_parser("sample", help="one-bit sample a real matrix")
    p.add_argument("--input", required=True)
    p = sub.add_parser("di", help="digital-integration reconstruction")
    p.add_argument("--input", required=True)
    p = sub.add_parser("rfi-est", help="estimate interference from signed data")
    p.add_argument("--input", required=True)
    p.add_argument("--kmax", type=int, default=None)
    p = sub.add_parser("recover", help="sparse echo recovery from signed data")
    p.add_argument("--input", required=True)
    p.add_argument("--rfi", default="", help="OBM1 interference estimate to subtract")
    p = sub.add_parser("pipeline", help="full simulate-to-metrics run")
    p.add_argument("--sinr-db", type=float, default=None, dest="sinr_db")
    p.add_argument("--inr-db", type=float, default=None, dest="inr_db")
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--save-matrices", action="store_true")
    p = sub.add_parser("sweep", help="NRE-vs-SINR table for both methods")
    p.add_argument("--sinr-db", type=_csv_floats, default=None, dest="sinr_db",
                   help="comma-separated SINR grid in dB")
    p.add_argument("--inr-db", type=_csv_floats, default=None, dest="inr_db",
                   help="comma-separated INR grid in dB")
    p.add_argument("--kmax", type=int, default=None)
    return parser


_HANDLERS = {
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "di": cmd_di,
    "rfi-est": cmd_rfi_est,
    "recover": cmd_recover,
    "pipeline": cmd_pipeline,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except DimensionError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except Obm1FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_BAD_FORMAT
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
