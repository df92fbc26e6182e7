"""Command-line interface: ``lowlight {enhance,curve,metrics,batch}``.

Exit codes: 0 ok, 1 internal error, 2 I/O error, 3 bad configuration,
4 image size mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, EnhanceConfig, load_toml
from .fusion import enhance_full
from .imageops import SizeMismatchError
from .imfile import ImageReadError, read_image, write_image
from .metrics import MetricsReport, evaluate_pair
from .tone import gamma_sweep

log = logging.getLogger("lowlight")

EXIT_OK, EXIT_INTERNAL, EXIT_IO, EXIT_CONFIG, EXIT_SIZE = 0, 1, 2, 3, 4

REPORT_COLUMNS = ["id", "gamma_star", "fit_mse", "delta_e", "psnr", "mssim", "loe",
                  "dv_m", "ds_m", "d_m", "total_ms"]


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default exit 2
    def error(self, message):
        raise ConfigError(message)


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"expected a comma separated list of numbers, got {text!r}") from None


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("enhancement settings")
    g.add_argument("--lambda", dest="lam", type=float, help="joint factor in (1, 2] (default 2)")
    g.add_argument("--gammas", type=_float_list, help="probe gammas, comma separated")
    g.add_argument("--dv", dest="dv_star", type=float, help="target lightness gain (default 0.25)")
    g.add_argument("--seg-thresh", dest="seg_threshold", type=float,
                   help="dark/bright threshold (default 0.5)")
    g.add_argument("--downsample", type=int, help="weight map downsampling rate R (default 2)")
    g.add_argument("--gf-subsample", dest="gf_subsample", type=int,
                   help="guided filter subsample rate r (default 10)")
    g.add_argument("--eta", type=float, help="guided filter regularizer (default 0.04)")
    g.add_argument("--gamma-clamp", dest="gamma_clamp", type=_float_list,
                   help="working gamma range lo,hi (default 0.1,5)")
    g.add_argument("--config", type=Path, help="TOML file with settings")


_CONFIG_DESTS = ("lam", "gammas", "dv_star", "seg_threshold", "downsample", "gf_subsample",
                 "eta", "gamma_clamp")


def build_config(args) -> EnhanceConfig:
    """Defaults, then the TOML file, then command-line flags."""
    overrides = {}
    if getattr(args, "config", None) is not None:
        try:
            overrides.update(load_toml(args.config))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
    for dest in _CONFIG_DESTS:
        value = getattr(args, dest, None)
        if value is not None:
            overrides[dest] = value
    return EnhanceConfig().updated(**overrides)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def cmd_enhance(args) -> int:
    cfg = build_config(args)
    image = read_image(args.input)
    output, diag = enhance_full(image, cfg)
    try:
        write_image(args.output, output)
    except (OSError, ValueError) as exc:
        raise ImageReadError(f"{args.output}: cannot write image: {exc}") from None
    report = diag.to_dict()
    report.update(input=str(args.input), output=str(args.output), config=cfg.to_dict())
    _emit(report)
    return EXIT_OK


def _parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"sweep must be numeric lo:hi:step, got {text!r}") from None
    if hi < lo:
        raise ConfigError(f"sweep upper bound {hi} is below lower bound {lo}")
    if not step > 0 or not lo > 0:
        raise ConfigError("sweep needs lo > 0 and step > 0")
    return lo, hi, step


def cmd_curve(args) -> int:
    cfg = build_config(args)
    lo, hi, step = _parse_sweep(args.sweep)
    from .imageops import rgb_to_v

    v = rgb_to_v(read_image(args.input))
    params, grid, measured, fitted = gamma_sweep(v, cfg, lo, hi, step)
    out = sys.stdout
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["gamma", "dv_measured", "dv_fitted"])
    for g, m, f in zip(grid, measured, fitted):
        writer.writerow([f"{g:.6g}", repr(float(m)), repr(float(f))])
    footer = params.to_dict()
    footer["sweep_mse"] = float(((measured - fitted) ** 2).mean())
    footer["sweep"] = [lo, hi, step]
    _emit(footer)
    return EXIT_OK


def cmd_metrics(args) -> int:
    enhanced = read_image(args.enhanced)
    reference = read_image(args.reference)
    low = read_image(args.low) if args.low is not None else None
    report = evaluate_pair(enhanced, reference, low, image_id=Path(args.enhanced).stem)
    _emit(report.to_dict())
    return EXIT_OK


def read_manifest(path) -> list:
    """Rows of ``id,low,ref``; relative paths resolve against the manifest folder."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            fieldnames = reader.fieldnames or []
            rows = list(reader)
    except OSError as exc:
        raise ImageReadError(f"{path}: cannot read manifest: {exc}") from None
    missing = {"id", "low"} - set(fieldnames)
    if missing:
        raise ConfigError(f"{path}: manifest header lacks {', '.join(sorted(missing))}")
    if not rows:
        raise ConfigError(f"{path}: manifest has no rows")
    base = path.parent
    out, seen = [], set()
    for row in rows:
        rid = (row.get("id") or "").strip()
        if not rid:
            raise ConfigError(f"{path}: row without id")
        if rid in seen:
            raise ConfigError(f"{path}: duplicate id {rid!r}")
        seen.add(rid)
        low = base / row["low"].strip()
        ref = (row.get("ref") or "").strip()
        out.append({"id": rid, "low": low, "ref": base / ref if ref else None})
    return out


def process_row(row: dict, cfg: EnhanceConfig, out_dir=None) -> dict:
    """Enhance and score one manifest row.  Never raises."""
    try:
        low = read_image(row["low"])
        ref = read_image(row["ref"]) if row["ref"] is not None else None
        output, diag = enhance_full(low, cfg)
        if out_dir is not None:
            write_image(Path(out_dir) / f"{row['id']}.png", output)
        report = evaluate_pair(output, ref, low, image_id=row["id"])
    except Exception as exc:  # a bad row must not stop the batch
        return {"id": row["id"], "error": f"{type(exc).__name__}: {exc}"}
    values = {"id": row["id"], "gamma_star": diag.gamma_star, "fit_mse": diag.curve.fit_mse,
              "total_ms": diag.timings["total_ms"]}
    values.update({k: getattr(report, k) for k in MetricsReport.FIELDS})
    return values


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def mean_row(results: list) -> dict:
    """Column means over successful rows; blank where no row has a value."""
    row = {"id": "mean"}
    for col in REPORT_COLUMNS[1:]:
        vals = [r[col] for r in results if "error" not in r and r.get(col) is not None]
        row[col] = math.fsum(vals) / len(vals) if vals else None
    return row


def write_report(path, results: list) -> dict:
    summary = mean_row(results)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in results:
            if "error" in r:
                writer.writerow([r["id"]] + ["error"] * (len(REPORT_COLUMNS) - 1))
            else:
                writer.writerow([_fmt(r.get(c)) for c in REPORT_COLUMNS])
        writer.writerow([_fmt(summary[c]) for c in REPORT_COLUMNS])
    return summary


def cmd_batch(args) -> int:
    cfg = build_config(args)
    if args.jobs is not None and args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    rows = read_manifest(args.manifest)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs or os.cpu_count() or 1
    t0 = time.perf_counter()
    if jobs == 1 or len(rows) == 1:
        results = [process_row(r, cfg, args.out_dir) for r in rows]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(rows))) as pool:
            results = list(pool.map(process_row, rows, [cfg] * len(rows),
                                    [args.out_dir] * len(rows)))
    for r in results:
        if "error" in r:
            log.error("row %s failed: %s", r["id"], r["error"])
    try:
        summary = write_report(args.output, results)
    except OSError as exc:
        raise ImageReadError(f"{args.output}: cannot write report: {exc}") from None
    _emit({
        "report": str(args.output),
        "rows": len(results),
        "failed": [r["id"] for r in results if "error" in r],
        "mean": {k: v for k, v in summary.items() if k != "id"},
        "config": cfg.to_dict(),
        "wall_ms": (time.perf_counter() - t0) * 1e3,
    })
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lowlight", description="Low-light image enhancement.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enhance", help="enhance one image")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("curve", help="measured vs fitted lightness gain over a gamma sweep")
    p.add_argument("input", type=Path)
    p.add_argument("--sweep", default="0.3:2.2:0.05", help="lo:hi:step (default 0.3:2.2:0.05)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("metrics", help="score an enhanced image against a reference")
    p.add_argument("enhanced", type=Path)
    p.add_argument("reference", type=Path)
    p.add_argument("--low", type=Path, help="low-light source for LOE and lightness statistics")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("batch", help="enhance and score every row of a manifest")
    p.add_argument("manifest", type=Path, help="CSV with header id,low,ref")
    p.add_argument("-o", "--output", type=Path, required=True, help="report CSV")
    p.add_argument("--out-dir", type=Path, help="also save enhanced images here")
    p.add_argument("--jobs", type=int, help="parallel workers (default: CPU count)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="lowlight: %(levelname)s: %(message)s")
    try:
        args = make_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        return args.func(args)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except SizeMismatchError as exc:
        log.error("size mismatch: %s", exc)
        return EXIT_SIZE
    except ImageReadError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except Exception as exc:
        log.error("internal error: %s: %s", type(exc).__name__, exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
