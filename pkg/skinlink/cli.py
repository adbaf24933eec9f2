"""Command-line interface: ``python -m skinlink {eval,sweep,validate,jitter}``.

Reports go to stdout (or ``--out`` as CSV); logging goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from skinlink.config import load_run_config, settings
from skinlink.exceptions import JitterInfeasibleError, LinkModelError
from skinlink.models.schemas import (
    DetectionScheme,
    JitterReport,
    McConfig,
    MetricsReport,
    RunConfig,
    SweepAxis,
    SweepRow,
    ValidationReport,
)
from skinlink.services.link_service import LinkEvaluationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2

# Column order of every metrics CSV (sweep rows prepend their axis columns).
METRIC_COLUMNS = (
    ("wavelength_nm", "wavelength_nm"),
    ("delta_mm", "delta_mm"),
    ("scheme", "scheme"),
    ("psi", "psi"),
    ("xi", "xi"),
    ("a0", "a0"),
    ("w_eq_mm", "w_eq_mm"),
    ("path_loss", "path_loss"),
    ("responsivity_a_per_w", "responsivity"),
    ("avg_snr", "avg_snr"),
    ("avg_snr_db", "avg_snr_db"),
    ("peak_snr", "peak_snr"),
    ("peak_snr_db", "peak_snr_db"),
    ("gamma_th", "gamma_th"),
    ("outage_probability", "outage_probability"),
    ("se_bits_per_use", "spectral_efficiency"),
    ("se_lower_bound_bits_per_use", "spectral_efficiency_lower_bound"),
    ("capacity_bps", "capacity_bps"),
    ("capacity_lower_bound_bps", "capacity_lower_bound_bps"),
    ("flags", "flags"),
)
JITTER_COLUMNS = (
    "target_outage",
    "gamma_th",
    "h_value",
    "sigma_s_mm",
    "xi",
    "w_eq_mm",
    "capacity_bps",
    "capacity_lower_bound_bps",
    "capacity_is_lower_bound",
)
VALIDATION_COLUMNS = ("metric", "closed_form", "mc_mean", "mc_std_error", "z_score", "passed")

SWEEP_PRESETS: Dict[str, List[str]] = {
    "snr-vs-thickness": ["lambda:900:1500:4", "delta:1:10:10"],
    "outage-vs-normalized-snr": ["xi:0.1:10:3:log", "gamma_th_norm:0:50:11"],
    "snr-vs-wavelength": ["lambda:400:1500:111"],
    "capacity-vs-thickness-wavelength": ["delta:1:10:10", "lambda:400:1500:12"],
    "se-vs-thickness-psd": ["Ptilde_s:0.001:0.1:3:log", "delta:1:10:10"],
    "capacity-vs-thickness-bandwidth": ["B:1:100:3:log", "delta:1:10:10"],
    "snr-vs-wavelength-jitter": ["sigma_s:0.1:1:3:log", "lambda:400:1500:12"],
    "outage-vs-thickness-jitter": ["sigma_s:0.1:1:3:log", "delta:1:10:10"],
    "outage-vs-thickness-threshold": ["r_th:1:3:3", "delta:1:10:10"],
    "outage-vs-wavelength-threshold": ["r_th:1:3:3", "lambda:400:1500:12"],
    "capacity-vs-wavelength-thickness-imdd": ["delta:1:10:4", "lambda:400:1500:12"],
    "snr-vs-divergence-jitter": ["sigma_s:0.1:1:3:log", "theta:10:60:11"],
    "snr-vs-area-efficiency": ["eta:0.5:0.9:3", "area:0.5:5:10"],
}
# Presets that fix the receiver unless --scheme is given.
PRESET_SCHEMES: Dict[str, DetectionScheme] = {
    "capacity-vs-wavelength-thickness-imdd": DetectionScheme.IM_DD,
}

# CLI flag -> RunConfig field; values stay strings so units can be attached.
PARAMETER_FLAGS = (
    ("--lambda", "wavelength", "Wavelength, e.g. 1100nm"),
    ("--delta", "delta", "Skin thickness, e.g. 4mm"),
    ("--theta", "theta", "Full divergence angle, e.g. 20deg"),
    ("--area", "aperture_area", "Receiver aperture area, e.g. 1mm2"),
    ("--radius", "aperture_radius", "Receiver aperture radius, e.g. 0.56mm"),
    ("--sigma-s", "sigma_s", "Pointing-jitter standard deviation, e.g. 0.5mm"),
    ("--eta", "eta", "Photodiode quantum efficiency"),
    ("--dark-current", "dark_current", "Dark current, e.g. 0.05nA"),
    ("--background-power", "background_power", "Background optical power, e.g. 0uW"),
    ("--noise-density", "noise_density", "Thermal-noise current density, e.g. 1.3pA/rtHz"),
    ("--thermal-variance", "thermal_noise_variance", "Thermal-noise variance in A^2"),
    ("--psd", "signal_psd", "Signal power spectral density, e.g. 0.01uW/MHz"),
    ("--power", "signal_power", "Average signal optical power, e.g. 0.1uW"),
    ("--bandwidth", "bandwidth", "Bandwidth, e.g. 10MHz"),
    ("--rate-threshold", "rate_threshold", "Rate threshold in bits/s/Hz"),
    ("--gamma-th", "gamma_th", "Linear SNR threshold (overrides --rate-threshold)"),
    ("--xi", "xi", "Use this jitter ratio instead of the one derived from sigma_s"),
)


# --------------------------------------------------------------------------
# Formatting
# --------------------------------------------------------------------------


def format_value(value: Any, digits: Optional[int] = None) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, DetectionScheme):
        return value.value
    if isinstance(value, float):
        return format(value, f".{digits or settings.csv_digits}g")
    if isinstance(value, list):
        return "|".join(str(v) for v in value)
    return str(value)


def metrics_row(report: MetricsReport) -> List[str]:
    return [format_value(getattr(report, attribute)) for _, attribute in METRIC_COLUMNS]


def write_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def sweep_csv(axes: Sequence[SweepAxis], rows: Sequence[SweepRow]) -> str:
    header = [axis.column for axis in axes] + [name for name, _ in METRIC_COLUMNS]
    body = [[format_value(row.axes[axis.name]) for axis in axes] + metrics_row(row.report) for row in rows]
    return write_csv(header, body)


def _decibels(value: Optional[float]) -> str:
    return "-inf dB" if value is None else f"{value:.4f} dB"


def render_metrics(report: MetricsReport) -> str:
    bound_note = " (lower bound on capacity)" if report.capacity_is_lower_bound else ""
    lines = [
        f"wavelength          {report.wavelength_nm:.6g} nm",
        f"skin thickness      {report.delta_mm:.6g} mm",
        f"scheme              {report.scheme.value} (psi={report.psi:.6g})",
        f"A0                  {report.a0:.6g}",
        f"w_eq                {report.w_eq_mm:.6g} mm",
        f"xi                  {report.xi:.6g}",
        f"path loss h_l       {report.path_loss:.6g}",
        f"responsivity        {report.responsivity:.6g} A/W",
        f"average SNR         {report.avg_snr:.6g} ({_decibels(report.avg_snr_db)})",
        f"peak SNR            {report.peak_snr:.6g} ({_decibels(report.peak_snr_db)})",
        f"SNR threshold       {report.gamma_th:.6g}",
        f"outage probability  {report.outage_probability:.6g}",
        f"spectral efficiency {report.spectral_efficiency:.6g} bits/use{bound_note}",
        f"  lower bound       {report.spectral_efficiency_lower_bound:.6g} bits/use",
        f"capacity            {report.capacity_bps / 1e6:.6g} Mbps{bound_note}",
        f"  lower bound       {report.capacity_lower_bound_bps / 1e6:.6g} Mbps",
    ]
    if report.flags:
        lines.append(f"flags               {', '.join(report.flags)}")
    return "\n".join(lines) + "\n"


def render_jitter(report: JitterReport) -> str:
    bound_note = " (lower bound on capacity)" if report.capacity_is_lower_bound else ""
    return "\n".join(
        [
            f"target outage       {report.target_outage:.6g}",
            f"SNR threshold       {report.gamma_th:.6g}",
            f"H                   {report.h_value:.6g}",
            f"tolerable sigma_s   {report.sigma_s_mm:.6g} mm",
            f"implied xi          {report.xi:.6g}",
            f"w_eq                {report.w_eq_mm:.6g} mm",
            f"capacity            {report.capacity_bps / 1e6:.6g} Mbps{bound_note}",
            f"  lower bound       {report.capacity_lower_bound_bps / 1e6:.6g} Mbps",
        ]
    ) + "\n"


def render_validation(report: ValidationReport) -> str:
    lines = [
        f"rng={report.rng} seed={report.seed} n_samples={report.n_samples} "
        f"block_size={report.block_size} limit={report.sigma_limit:g} sigma",
        f"{'metric':<10} {'closed form':>20} {'monte carlo':>20} {'std error':>12} {'z':>8}  status",
    ]
    for row in report.rows:
        z_text = "n/a" if row.z_score is None else f"{row.z_score:.3f}"
        lines.append(
            f"{row.metric:<10} {row.closed_form:>20.12g} {row.mc_mean:>20.12g} "
            f"{row.mc_std_error:>12.4g} {z_text:>8}  {'PASS' if row.passed else 'FAIL'}"
        )
    lines.append("PASSED" if report.passed else "FAILED")
    return "\n".join(lines) + "\n"


def emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def build_config(args: argparse.Namespace) -> RunConfig:
    overrides: Dict[str, Any] = {field: getattr(args, field, None) for _, field, _ in PARAMETER_FLAGS}
    overrides["scheme"] = args.scheme
    overrides["attenuation_file"] = args.attenuation_file
    return load_run_config(args.config, overrides)


def cmd_eval(args: argparse.Namespace, service: LinkEvaluationService) -> int:
    report = service.evaluate(build_config(args))
    sys.stdout.write(render_metrics(report))
    if args.out:
        emit(write_csv([name for name, _ in METRIC_COLUMNS], [metrics_row(report)]), args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, service: LinkEvaluationService) -> int:
    specs: List[str] = []
    if args.preset:
        specs.extend(SWEEP_PRESETS[args.preset])
        if args.scheme is None and args.preset in PRESET_SCHEMES:
            args.scheme = PRESET_SCHEMES[args.preset].value
    specs.extend(spec for spec in (args.axis, args.axis2) if spec)
    if not specs:
        raise LinkModelError("sweep needs --axis or --preset")
    if len(specs) > 2:
        raise LinkModelError("at most two sweep axes are supported")
    axes = [SweepAxis.parse(spec) for spec in specs]
    rows = service.sweep(build_config(args), axes, workers=args.workers)
    emit(sweep_csv(axes, rows), args.out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, service: LinkEvaluationService) -> int:
    mc = McConfig(
        n_samples=args.samples,
        seed=args.seed,
        n_streams=args.streams,
        block_size=args.block_size,
    )
    report = service.validate(build_config(args), mc, sigma_limit=args.sigma_limit)
    sys.stdout.write(render_validation(report))
    if args.out:
        rows = [[format_value(getattr(row, column)) for column in VALIDATION_COLUMNS] for row in report.rows]
        emit(write_csv(VALIDATION_COLUMNS, rows), args.out)
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def cmd_jitter(args: argparse.Namespace, service: LinkEvaluationService) -> int:
    report = service.jitter(build_config(args), args.target_outage)
    sys.stdout.write(render_jitter(report))
    if args.out:
        row = [format_value(getattr(report, column)) for column in JITTER_COLUMNS]
        emit(write_csv(JITTER_COLUMNS, [row]), args.out)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "jitter": cmd_jitter,
}


# --------------------------------------------------------------------------
# Entry points
# --------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="key=value file with link parameters")
    parser.add_argument("--attenuation-file", help="CSV with wavelength_nm,alpha_per_mm columns")
    parser.add_argument("--scheme", choices=[scheme.value for scheme in DetectionScheme])
    parser.add_argument("--out", help="Write CSV output to this path")
    for flag, field, help_text in PARAMETER_FLAGS:
        parser.add_argument(flag, dest=field, help=help_text)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="skinlink",
        description="Evaluate a transcutaneous optical wireless link.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("eval", parents=[common], help="Closed-form metrics at one design point")

    sweep = subparsers.add_parser("sweep", parents=[common], help="Metrics over a one- or two-axis grid")
    sweep.add_argument("--axis", help="NAME:START:STOP:COUNT[:log]")
    sweep.add_argument("--axis2", help="Second axis, same format as --axis")
    sweep.add_argument("--preset", choices=sorted(SWEEP_PRESETS), help="Predefined sweep grid")
    sweep.add_argument("--workers", type=int, default=settings.sweep_workers)

    validate = subparsers.add_parser("validate", parents=[common], help="Closed forms against Monte Carlo")
    validate.add_argument("--seed", type=int, default=settings.mc_seed)
    validate.add_argument("--samples", type=int, default=settings.mc_samples)
    validate.add_argument("--streams", type=int, default=settings.mc_streams)
    validate.add_argument("--block-size", type=int, default=settings.mc_block_size)
    validate.add_argument("--sigma-limit", type=float, default=3.0)

    jitter = subparsers.add_parser("jitter", parents=[common], help="Largest tolerable pointing jitter")
    jitter.add_argument("--target-outage", type=float, required=True)

    return parser.parse_args(argv)


def run_cli(args: argparse.Namespace, service: Optional[LinkEvaluationService] = None) -> int:
    service = service or LinkEvaluationService()
    try:
        return COMMANDS[args.command](args, service)
    except JitterInfeasibleError as exc:
        print(f"❌ Infeasible: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"❌ Invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LinkModelError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=settings.log_level.upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = parse_args(argv)
    return run_cli(args)


if __name__ == "__main__":
    raise SystemExit(main())
