"""Command-line harness: generation, noising, denoising, sweeps, reports.

Every command is deterministic given its flags (plus seed where noise is
involved): written PGM/CSV/JSON files carry no timestamps, JSON keys are
sorted, and floats are serialized by repr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _engine
from .filters import VARIANTS, FilterParams, apply_filter
from .image import (
    PRNG_NAME,
    GrayImage,
    NoiseSpec,
    add_awgn,
    estimate_noise_sigma,
    load_image,
    mse,
    psnr,
    save_image,
)
from .sure import SweepGrid, default_grid, denoise_auto, sweep
from .synthetic import KINDS, SyntheticImageSpec, generate
from .tensor import gradient_dog, orientation_field, structure_tensor


class CliError(Exception):
    """Invalid flags or inputs; reported on stderr with exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _parse_size(text: str):
    """'256' -> (256, 256); '320x200' -> (320, 200) as width x height."""
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            w = h = int(parts[0])
        elif len(parts) == 2:
            w, h = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise CliError(f"bad --size {text!r} (expected N or WxH)") from None
    return w, h


def _parse_grid_axis(text: str) -> np.ndarray:
    """'lo:hi:n' -> n log-spaced values in [lo, hi]."""
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"bad grid spec {text!r} (expected lo:hi:n)")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"bad grid spec {text!r}") from None
    if n < 1 or lo <= 0 or hi < lo:
        raise CliError(f"bad grid spec {text!r} (need 0 < lo <= hi, n >= 1)")
    return np.geomspace(lo, hi, n) if n > 1 else np.array([lo])


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"bad {flag} {text!r}") from None
    if not values:
        raise CliError(f"{flag} must list at least one value")
    return values


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"bad {flag} {text!r}") from None
    if not values:
        raise CliError(f"{flag} must list at least one value")
    return values


def _resolve_grid(args, sigma: float) -> SweepGrid:
    base = default_grid(sigma)
    d_vals = (_parse_grid_axis(args.grid_d) if args.grid_d
              else base.rho_d_values)
    r_vals = (_parse_grid_axis(args.grid_r) if args.grid_r
              else base.rho_r_values)
    return SweepGrid(d_vals, r_vals)


def _resolve_sigma(args) -> tuple[float, str]:
    """Noise level from --sigma, or from the image when --estimate-sigma."""
    if args.sigma is not None:
        return float(args.sigma), "given"
    if getattr(args, "estimate_sigma", False):
        sigma = estimate_noise_sigma(load_image(args.input))
        return sigma, "estimated-mad"
    raise CliError("this command needs --sigma (or --estimate-sigma)")


def _field_for(img, args):
    return orientation_field(img, args.sigma_g, args.rho_tensor,
                             formula=args.theta_formula)


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2)
                          + "\n", encoding="ascii")


def _synthetic_spec(args) -> SyntheticImageSpec:
    w, h = _parse_size(args.size)
    return SyntheticImageSpec(kind=args.kind, width=w, height=h,
                              period=args.period, amplitude=args.amplitude,
                              offset=args.offset, angle_deg=args.angle)


def cmd_gen(args) -> int:
    save_image(generate(_synthetic_spec(args)), args.out)
    return 0


def cmd_add_noise(args) -> int:
    noisy = add_awgn(load_image(args.input), NoiseSpec(args.sigma, args.seed))
    save_image(noisy, args.out)
    return 0


def cmd_denoise(args) -> int:
    y = load_image(args.input)
    clean = load_image(args.clean) if args.clean else None
    common_meta = {"command": "denoise", "input": str(args.input),
                   "seed": args.seed, "config": args.config_echo}
    if args.auto:
        sigma, sigma_source = _resolve_sigma(args)
        common_meta["sigma_source"] = sigma_source
        grid = _resolve_grid(args, sigma)
        denoised, report = denoise_auto(
            y, sigma, args.filter, grid, sigma_g=args.sigma_g,
            rho_tensor=args.rho_tensor, clean=clean,
            window_radius=args.window, theta_formula=args.theta_formula,
            metadata=common_meta)
        payload = json.loads(report.to_json_text())
    else:
        if args.rho_d is None:
            raise CliError("denoise needs --rho-d unless --auto is given")
        params = FilterParams(args.filter, args.rho_d, args.rho_r,
                              args.window)
        field = None if args.filter == "gbf" else _field_for(y, args)
        denoised = apply_filter(y, params, field)
        payload = dict(common_meta)
        payload.update({
            "variant": args.filter, "rho_d": args.rho_d, "rho_r": args.rho_r,
            "window_radius": params.window_radius, "sigma": args.sigma,
            "sigma_g": args.sigma_g, "rho_tensor": args.rho_tensor,
            "theta_formula": args.theta_formula, "prng": PRNG_NAME,
        })
    if clean is not None:
        payload["output_psnr_db"] = psnr(clean, denoised)
        payload["input_psnr_db"] = psnr(clean, y)
    save_image(denoised, args.out)
    _write_json(Path(args.out).with_suffix(".json"), payload)
    return 0


def cmd_sweep(args) -> int:
    y = load_image(args.input)
    clean = load_image(args.clean) if args.clean else None
    sigma, sigma_source = _resolve_sigma(args)
    grid = _resolve_grid(args, sigma)
    report = sweep(y, sigma, grid, args.filter, sigma_g=args.sigma_g,
                   rho_tensor=args.rho_tensor, clean=clean,
                   window_radius=args.window,
                   theta_formula=args.theta_formula,
                   metadata={"command": "sweep", "input": str(args.input),
                             "seed": args.seed, "config": args.config_echo,
                             "sigma_source": sigma_source})
    report.write(args.out)
    return 0


def cmd_eval(args) -> int:
    a = load_image(args.ref)
    b = load_image(args.test)
    print(f"psnr_db={psnr(a, b, args.peak)!r} mse={mse(a, b)!r}")
    return 0


def cmd_tensor(args) -> int:
    img = load_image(args.input)
    field = _field_for(img, args)
    # theta in [0, pi) and C in [0, 1] are stretched over the 8-bit range.
    save_image(GrayImage(field.theta * (255.0 / np.pi)),
               f"{args.out}-theta.pgm")
    save_image(GrayImage((field.gamma2 - 1.0) * 255.0),
               f"{args.out}-coherence.pgm")
    if args.csv:
        gx, gy = gradient_dog(img, args.sigma_g)
        tf = structure_tensor(gx, gy, args.rho_tensor)
        lines = ["m,n,j11,j12,j22"]
        for m in range(tf.height):
            for n in range(tf.width):
                lines.append(f"{m},{n},{float(tf.j11[m, n])!r},"
                             f"{float(tf.j12[m, n])!r},"
                             f"{float(tf.j22[m, n])!r}")
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="ascii")
    return 0


def cmd_bench(args) -> int:
    clean = generate(_synthetic_spec(args))
    sigmas = _parse_float_list(args.sigmas, "--sigmas")
    seeds = _parse_int_list(args.seeds, "--seeds")
    variants = [v.strip() for v in args.filters.split(",") if v.strip()]
    for v in variants:
        if v not in VARIANTS:
            raise CliError(f"unknown filter variant {v!r}")
    if not variants:
        raise CliError("--filters must list at least one variant")
    outdir = Path(args.out)
    rundir = outdir / "runs"
    rundir.mkdir(parents=True, exist_ok=True)

    input_psnr = {s: [] for s in sigmas}
    output_psnr = {(v, s): [] for v in variants for s in sigmas}
    for sigma in sigmas:
        grid = _resolve_grid(args, sigma)
        for seed in seeds:
            y = add_awgn(clean, NoiseSpec(sigma, seed))
            input_psnr[sigma].append(psnr(clean, y))
            field = (None if set(variants) <= {"gbf"}
                     else _field_for(y, args))
            for variant in variants:
                denoised, report = denoise_auto(
                    y, sigma, variant, grid, sigma_g=args.sigma_g,
                    rho_tensor=args.rho_tensor, window_radius=args.window,
                    theta_formula=args.theta_formula,
                    field=None if variant == "gbf" else field)
                out_db = psnr(clean, denoised)
                output_psnr[(variant, sigma)].append(out_db)
                _write_json(rundir / f"{variant}-sigma{sigma:g}-seed{seed}.json", {
                    "command": "bench-run", "variant": variant,
                    "sigma": sigma, "seed": seed,
                    "input_psnr_db": input_psnr[sigma][-1],
                    "output_psnr_db": out_db,
                    "best_rho_d": report.best_params[0],
                    "best_rho_r": report.best_params[1],
                    "best_sure": report.best_sure,
                    "sigma_g": args.sigma_g, "rho_tensor": args.rho_tensor,
                    "theta_formula": args.theta_formula, "prng": PRNG_NAME,
                    "config": args.config_echo,
                })

    def _std(vals):
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    csv_lines = ["variant,sigma,input_psnr_db_mean,output_psnr_db_mean,"
                 "output_psnr_db_std"]
    for variant in variants:
        for sigma in sigmas:
            vals = output_psnr[(variant, sigma)]
            csv_lines.append(
                f"{variant},{sigma!r},{float(np.mean(input_psnr[sigma]))!r},"
                f"{float(np.mean(vals))!r},{_std(vals)!r}")
    (outdir / "table.csv").write_text("\n".join(csv_lines) + "\n",
                                      encoding="ascii")

    cols = [f"{float(np.mean(input_psnr[s])):.2f} dB" for s in sigmas]
    md = ["| filter | " + " | ".join(cols) + " |",
          "|---" * (len(sigmas) + 1) + "|"]
    for variant in variants:
        cells = [f"{float(np.mean(output_psnr[(variant, s)])):.2f} "
                 f"± {_std(output_psnr[(variant, s)]):.2f}"
                 for s in sigmas]
        md.append(f"| {variant} | " + " | ".join(cells) + " |")
    (outdir / "table.md").write_text("\n".join(md) + "\n", encoding="utf-8")
    return 0


def _add_synthetic_flags(p) -> None:
    p.add_argument("--kind", choices=KINDS, default="oriented-fringe")
    p.add_argument("--size", default="256", help="N or WxH in pixels")
    p.add_argument("--period", type=float, default=8.0)
    p.add_argument("--amplitude", type=float, default=100.0)
    p.add_argument("--offset", type=float, default=128.0)
    p.add_argument("--angle", type=float, default=0.0,
                   help="fringe intensity-variation direction, degrees")


def _add_tensor_flags(p) -> None:
    p.add_argument("--sigma-g", type=float, default=1.0,
                   help="gradient kernel scale, pixels")
    p.add_argument("--rho-tensor", type=float, default=2.0,
                   help="tensor smoothing scale, pixels")
    p.add_argument("--theta-formula", choices=("paper", "eigen"),
                   default="eigen")


def _add_grid_flags(p) -> None:
    p.add_argument("--grid-d", help="rho_d grid as lo:hi:n (log-spaced)")
    p.add_argument("--grid-r", help="rho_r grid as lo:hi:n (log-spaced)")


def _build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config",
                        help="key=value file overriding flag defaults")
    common.add_argument("--threads", type=int,
                        help="cap engine worker threads")

    root = _Parser(prog="dbfilter",
                   description="Tensor-steered bilateral denoising toolkit")
    sub = root.add_subparsers(dest="command", required=True,
                              parser_class=_Parser)
    subparsers = {}

    p = sub.add_parser("gen", parents=[common],
                       help="write a synthetic test image")
    _add_synthetic_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    subparsers["gen"] = p

    p = sub.add_parser("add-noise", parents=[common],
                       help="add seeded white Gaussian noise")
    p.add_argument("input")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_add_noise)
    subparsers["add-noise"] = p

    p = sub.add_parser("denoise", parents=[common],
                       help="filter an image at fixed or swept parameters")
    p.add_argument("input")
    p.add_argument("--filter", choices=VARIANTS, default="dbf")
    p.add_argument("--sigma", type=float, help="noise std for --auto/SURE")
    p.add_argument("--estimate-sigma", action="store_true",
                   help="estimate sigma from the image (extension)")
    p.add_argument("--rho-d", type=float, help="domain scale, pixels")
    p.add_argument("--rho-r", type=float, help="range scale, intensity")
    p.add_argument("--window", type=int, help="window radius override")
    p.add_argument("--auto", action="store_true",
                   help="pick rho_d/rho_r by SURE grid search")
    p.add_argument("--clean", help="clean image; adds PSNR to the report")
    p.add_argument("--seed", type=int, help="echoed into the report")
    p.add_argument("--out", required=True)
    _add_tensor_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_denoise)
    subparsers["denoise"] = p

    p = sub.add_parser("sweep", parents=[common],
                       help="write the SURE (and MSE) surface over a grid")
    p.add_argument("input")
    p.add_argument("--filter", choices=VARIANTS, default="dbf")
    p.add_argument("--sigma", type=float)
    p.add_argument("--estimate-sigma", action="store_true")
    p.add_argument("--window", type=int)
    p.add_argument("--clean", help="clean image; attaches the MSE surface")
    p.add_argument("--seed", type=int, help="echoed into the report")
    p.add_argument("--out", required=True, help="CSV path; JSON lands beside")
    _add_tensor_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_sweep)
    subparsers["sweep"] = p

    p = sub.add_parser("eval", parents=[common],
                       help="print PSNR and MSE between two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--peak", type=float, default=255.0)
    p.set_defaults(func=cmd_eval)
    subparsers["eval"] = p

    p = sub.add_parser("tensor", parents=[common],
                       help="dump orientation and coherence maps")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--csv", help="also dump raw tensor components here")
    _add_tensor_flags(p)
    p.set_defaults(func=cmd_tensor)
    subparsers["tensor"] = p

    p = sub.add_parser("bench", parents=[common],
                       help="PSNR table over noise levels, seeds, variants")
    _add_synthetic_flags(p)
    p.add_argument("--sigmas", default="10,20,30,40,50",
                   help="comma-separated noise levels")
    p.add_argument("--seeds", default="1,2,3,4,5",
                   help="comma-separated noise seeds")
    p.add_argument("--filters", default="gbf,adf,dbf",
                   help="comma-separated variant subset")
    p.add_argument("--window", type=int)
    p.add_argument("--out", required=True, help="output directory")
    _add_tensor_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_bench)
    subparsers["bench"] = p

    return root, subparsers


def _scan_config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise CliError("--config needs a file path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _load_config(path) -> dict:
    mapping = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _apply_config(parser, mapping: dict) -> None:
    """Overlay config values as typed defaults; explicit flags still win."""
    actions = {a.dest: a for a in parser._actions}
    for key, raw in mapping.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise CliError(f"unknown config key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction,
                               argparse._StoreFalseAction)):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(raw)
            except ValueError:
                raise CliError(f"config key {key!r}: bad value {raw!r}") \
                    from None
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            raise CliError(f"config key {key!r}: {value!r} not one of "
                           f"{tuple(action.choices)}")
        parser.set_defaults(**{dest: value})


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        root, subparsers = _build_parser()
        config_path = _scan_config_path(argv)
        config = _load_config(config_path) if config_path else {}
        if config:
            command = next((t for t in argv if t in subparsers), None)
            if command is None:
                raise CliError("--config given without a known command")
            _apply_config(subparsers[command], config)
        args = root.parse_args(argv)
        args.config_echo = config
        if getattr(args, "threads", None):
            _engine.set_threads(args.threads)
        return args.func(args)
    except CliError as exc:
        print(f"dbfilter: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"dbfilter: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
