"""Command-line front end.

    ditherdac angle-sweep       EVM versus departure angle
    ditherdac resolution-sweep  worst-case EVM over (M, N)
    ditherdac transfer-function staircase and dithered transfer curve
    ditherdac noise-stats       equivalent-noise statistics
    ditherdac validate          all statistical self-checks

Each run writes ``<name>.csv`` and ``<name>.manifest.json`` to the output
directory (``--output-dir``, else ``$DITHERDAC_OUTPUT_DIR``, else the
current directory). Exit codes: 0 success, 1 failed validation, 2 usage or
configuration error.
"""
import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channel import ChannelScene
from .dither import (DitherSpec, equivalent_noise, is_matched_uniform, noise_property_test,
                     transfer_function_closed_form_uniform, transfer_function_numeric)
from .harness import ExperimentConfig, SweepRow, angle_sweep, calibrate_step, resolution_sweep
from .quantizer import QuantizerConfig, RangeError, quantization_error
from .validation import validation_suite

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("ditherdac")

OUTPUT_DIR_ENV = "DITHERDAC_OUTPUT_DIR"
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

_TOP_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_SCENE_KEYS = {"antennas", "users", "geometry"}
_DITHER_KEYS = {"family", "param"}


class ConfigError(ValueError):
    pass


def _parse_grid(text, cast=float):
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ConfigError(f"grid step must be > 0 in {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [cast(start + i * step) for i in range(count)]
    return [cast(v) for v in text.split(",") if v.strip()]


def load_config_file(path):
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def parse_config(path=None, overrides=None):
    """Resolve defaults < config file < flag overrides into a validated config.

    ``overrides`` uses the same nested layout as the file; ``None`` values
    are ignored.
    """
    raw = load_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if isinstance(value, dict):
            section = raw.setdefault(key, {})
            if not isinstance(section, dict):
                raise ConfigError(f"{key!r} must be a table")
            section.update({k: v for k, v in value.items() if v is not None})
        elif value is not None:
            raw[key] = value

    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    scene_raw = raw.pop("scene", {})
    dither_raw = raw.pop("dither", {})
    for name, section, allowed in (("scene", scene_raw, _SCENE_KEYS),
                                   ("dither", dither_raw, _DITHER_KEYS)):
        if not isinstance(section, dict):
            raise ConfigError(f"{name!r} must be a table")
        bad = set(section) - allowed
        if bad:
            raise ConfigError(f"unknown config key(s): "
                              f"{', '.join(f'{name}.{k}' for k in sorted(bad))}")

    try:
        kwargs = dict(raw)
        if scene_raw:
            kwargs["scene"] = ChannelScene(
                antennas=scene_raw.get("antennas", 100),
                users=tuple(scene_raw.get("users", (0.0,))),
                geometry=scene_raw.get("geometry", "ula_half_wavelength"),
            )
        if dither_raw:
            kwargs["dither"] = DitherSpec(dither_raw.get("family", "uniform"),
                                          dither_raw.get("param", 1.0))
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def render_table(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".partial-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_outputs(out_dir, name, table, cfg, extra=None):
    """Write ``<name>.csv`` and its manifest; returns both paths."""
    os.makedirs(out_dir, exist_ok=True)
    table_path = os.path.join(out_dir, f"{name}.csv")
    manifest_path = os.path.join(out_dir, f"{name}.manifest.json")
    manifest = {
        "tool": "ditherdac",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "subcommand": name.replace("_", "-"),
        "master_seed": cfg.master_seed,
        "config": cfg.to_dict(),
        "outputs": {"table": os.path.basename(table_path),
                    "table_sha256": hashlib.sha256(table.encode()).hexdigest()},
        "conventions": {
            "signal_power": "complex variance E|y|^2 at the user",
            "per_antenna_power": "signal_power / M^2, complex",
            "step": "sqrt(10^(peak2rms_db/10) * per_antenna_power) / 2^(bits-1)",
            "evm_db": "10*log10(error energy / signal energy)",
            "dither_param": "in units of the calibrated step",
        },
    }
    manifest.update(extra or {})
    try:
        _atomic_write(table_path, table)
        _atomic_write(manifest_path, json.dumps(manifest, indent=2) + "\n")
    except OSError:
        for p in (table_path, manifest_path):
            if os.path.exists(p):
                os.remove(p)
        raise
    return table_path, manifest_path


SWEEP_COLUMNS = [f.name for f in dataclasses.fields(SweepRow)]


def _sweep_table(rows, cfg):
    header = SWEEP_COLUMNS + ["peak2rms_db", "signal_power"]
    body = [[getattr(r, c) for c in SWEEP_COLUMNS] + [cfg.peak2rms_db, cfg.signal_power]
            for r in rows]
    return render_table(header, body)


def cmd_angle_sweep(cfg, args):
    rows = angle_sweep(cfg, workers=args.workers)
    return _sweep_table(rows, cfg), EXIT_OK


def cmd_resolution_sweep(cfg, args):
    rows = resolution_sweep(cfg, workers=args.workers)
    return _sweep_table(rows, cfg), EXIT_OK


def cmd_transfer_function(cfg, args):
    step = args.step
    qcfg = QuantizerConfig(cfg.bits, step)
    dither = cfg.dither.scaled(step)
    span = 2 ** (cfg.bits - 1) * step
    grid = np.linspace(-span, span, args.points)
    staircase = transfer_function_numeric(grid, DitherSpec.none(), qcfg).values
    if dither.family.value == "none":
        numeric = staircase
    else:
        numeric = transfer_function_numeric(grid, dither, qcfg).values
    closed = np.full_like(grid, np.nan)
    if is_matched_uniform(dither, qcfg):
        inside = qcfg.in_range(grid)
        if inside.any():
            closed[inside] = transfer_function_closed_form_uniform(grid[inside], qcfg).values
    header = ["x", "staircase", "transfer_numeric", "transfer_closed_form", "bits", "step",
              "dither_family", "dither_param"]
    body = [[x, s, n, c, cfg.bits, step, dither.family.value, dither.param]
            for x, s, n, c in zip(grid, staircase, numeric, closed)]
    return render_table(header, body), EXIT_OK


def cmd_noise_stats(cfg, args):
    power = 1.0
    step = calibrate_step(cfg.bits, cfg.peak2rms, power)
    qcfg = QuantizerConfig(cfg.bits, step)
    dither = cfg.dither.scaled(step)
    n = max(cfg.samples, 10_000)
    rng = np.random.default_rng([cfg.master_seed, 11])
    x = math.sqrt(power / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    noise_a = equivalent_noise(x, dither, qcfg, np.random.default_rng([cfg.master_seed, 12]))
    noise_b = equivalent_noise(x, dither, qcfg, np.random.default_rng([cfg.master_seed, 13]))
    stats = noise_property_test(x, noise_a, noise_b)
    conventional = float(np.mean(np.abs(quantization_error(x, qcfg).value) ** 2))
    header = ["dither_family", "dither_param", "bits", "step", "peak2rms_db", "samples",
              "mean_re", "mean_im", "variance", "variance_over_step2",
              "conventional_variance_over_step2", "variance_ratio_db",
              "input_correlation_abs", "pairwise_correlation_abs",
              "mean_z", "input_z", "pairwise_z"]
    row = [dither.family.value, cfg.dither.param, cfg.bits, step, cfg.peak2rms_db, n,
           stats.mean.real, stats.mean.imag, stats.variance, stats.variance / step ** 2,
           conventional / step ** 2, 10 * math.log10(stats.variance / conventional),
           abs(stats.input_correlation), abs(stats.pairwise_correlation),
           stats.mean_z, stats.input_z, stats.pairwise_z]
    return render_table(header, [row]), EXIT_OK


def cmd_validate(cfg, args):
    report = validation_suite(cfg, shared_dither=args.shared_dither)
    header = ["check", "passed", "statistic", "threshold", "samples", "detail"]
    body = [[c.name, c.passed, c.statistic, c.threshold, c.samples, c.detail]
            for c in report.checks]
    for c in report.checks:
        log.info("%-34s %s", c.name, "PASS" if c.passed else "FAIL")
    return render_table(header, body), EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "angle-sweep": cmd_angle_sweep,
    "resolution-sweep": cmd_resolution_sweep,
    "transfer-function": cmd_transfer_function,
    "noise-stats": cmd_noise_stats,
    "validate": cmd_validate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; keys mirror ExperimentConfig")
    common.add_argument("--bits", type=int)
    common.add_argument("--antennas", type=int)
    common.add_argument("--users", help="comma-separated user directions in radians")
    common.add_argument("--samples", type=int)
    common.add_argument("--peak2rms-db", type=float)
    common.add_argument("--angles", help="degrees: 'a,b,c' or 'start:stop:step'")
    common.add_argument("--m-grid", help="antenna counts, e.g. '1,10,100'")
    common.add_argument("--n-grid", help="bit widths, e.g. '2:8:1'")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--signal-power", type=float)
    common.add_argument("--dither", choices=["none", "uniform", "gaussian", "triangular"])
    common.add_argument("--dither-param", type=float, help="in units of the step")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--output-dir",
                        default=os.environ.get(OUTPUT_DIR_ENV, "."))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ditherdac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "transfer-function":
            p.add_argument("--step", type=float, default=1.0)
            p.add_argument("--points", type=int, default=401)
        if name == "validate":
            p.add_argument("--shared-dither", action="store_true",
                           help="reuse one dither stream on both antennas (must fail)")
    return parser


def overrides_from_args(args):
    scene = {"antennas": args.antennas}
    if args.users is not None:
        scene["users"] = _parse_grid(args.users)
    return {
        "bits": args.bits,
        "samples": args.samples,
        "peak2rms_db": args.peak2rms_db,
        "angle_grid": _parse_grid(args.angles) if args.angles else None,
        "M_grid": _parse_grid(args.m_grid, int) if args.m_grid else None,
        "N_grid": _parse_grid(args.n_grid, int) if args.n_grid else None,
        "master_seed": args.seed,
        "signal_power": args.signal_power,
        "scene": scene,
        "dither": {"family": args.dither, "param": args.dither_param},
    }


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if getattr(args, "points", 2) < 2:
            raise ConfigError("--points must be >= 2")
        if getattr(args, "step", 1.0) <= 0:
            raise ConfigError("--step must be > 0")
        cfg = parse_config(args.config, overrides_from_args(args))
    except (ConfigError, OSError, ValueError) as exc:
        print(f"ditherdac: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    name = args.command.replace("-", "_")
    try:
        table, status = COMMANDS[args.command](cfg, args)
    except RangeError as exc:
        print(f"ditherdac: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        table_path, _ = write_outputs(args.output_dir, name, table, cfg,
                                      {"workers": args.workers})
    except OSError as exc:
        print(f"ditherdac: cannot write to {args.output_dir}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(table_path)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
