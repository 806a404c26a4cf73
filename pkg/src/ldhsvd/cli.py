"""Command line interface: ``ldhsvd {process,synth,spectrogram,composite,svd-inspect}``."""
import argparse
import hashlib
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .core import Roi, plan_windows
from .doppler import FrequencyBand, spectrogram
from .exceptions import FormatError, InvalidInputError, NumericalFailureError
from .io import (
    read_manifest,
    read_pgm,
    read_stack,
    write_manifest,
    write_pgm,
    write_ppm,
    write_profile_csv,
    write_series_csv,
    write_stack,
)
from .pipeline import STAGES, PipelineConfig, process_stack
from .svd import (
    compute_svd_basis,
    eigenvector_mean_image,
    eigenvector_spectra,
    energy_fractions,
    singular_energy_profile,
)
from .synth import dump_scene, generate_stack, load_scene
from .viz import composite_two_band, composite_two_phase, to_display_gray

PROG = "ldhsvd"


def _band(text):
    try:
        return FrequencyBand.parse(text)
    except InvalidInputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _index_range(text):
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from exc
    return a, b


def _ranges(text):
    return [_index_range(t) for t in text.split(",") if t]


def _add_window_args(p, *, window_required=True):
    p.add_argument("--window", type=int, required=window_required,
                   help="window length n_t in frames")
    p.add_argument("--hop", type=int, default=None, help="window advance (default: window/2)")


def _add_filter_args(p):
    p.add_argument("--nc", type=int, default=None, help="explicit clutter rank")
    p.add_argument("--cutoff", type=float, default=None,
                   help="frequency-equivalent SVD threshold in Hz (default: lower band edge)")


def _add_display_args(p):
    p.add_argument("--lo-pct", type=float, default=1.0)
    p.add_argument("--hi-pct", type=float, default=99.0)
    p.add_argument("--scale", choices=("linear", "log"), default="log")


def build_parser():
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__)
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="power Doppler movie and mean image")
    p.add_argument("--input", help="stack file")
    p.add_argument("--manifest", help="replay the parameters of a previous run")
    p.add_argument("--band", type=_band, help="F1:F2 in Hz (k suffix for kHz)")
    _add_window_args(p, window_required=False)
    p.add_argument("--mode", choices=("fourier", "svd"), default=None)
    _add_filter_args(p)
    p.add_argument("--roi", default=None, help="X0:X1,Y0:Y1 rectangle or PGM mask path")
    p.add_argument("--jobs", type=int, default=None, help="windows processed concurrently")
    p.add_argument("--no-frames", action="store_true", help="skip per-frame rasters")
    _add_display_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="render a synthetic scene")
    p.add_argument("--scene", required=True, help="scene description file")
    p.add_argument("--out", required=True, help="output stack file")

    p = sub.add_parser("spectrogram", help="ROI spectrogram")
    p.add_argument("--input", required=True)
    _add_window_args(p)
    _add_filter_args(p)
    p.add_argument("--roi", required=True)
    p.add_argument("--dynamic-range", type=float, default=60.0, help="dB mapped to black")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("composite", help="two-band or two-phase colour composite")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=("band", "phase"), default="band")
    p.add_argument("--low", type=_band, help="low band (kind=band)")
    p.add_argument("--high", type=_band, help="high band (kind=band)")
    p.add_argument("--band", type=_band, help="band of the movie (kind=phase)")
    p.add_argument("--systole", type=_index_range, help="window index range A:B (kind=phase)")
    p.add_argument("--diastole", type=_index_range, help="window index range A:B (kind=phase)")
    _add_window_args(p)
    p.add_argument("--mode", choices=("fourier", "svd"), default="svd")
    _add_filter_args(p)
    _add_display_args(p)
    p.add_argument("--out", required=True, help="output PPM file")

    p = sub.add_parser("svd-inspect", help="singular value diagnostics of one window")
    p.add_argument("--input", required=True)
    p.add_argument("--start", type=int, default=0, help="first frame of the window")
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--ranges", type=_ranges, default=[(1, 1)],
                   help="1-based eigenvector ranges M:N[,M:N...] to average")
    p.add_argument("--dynamic-range", type=float, default=60.0)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _parse_roi(text, shape):
    if text is None:
        return None
    if os.path.exists(text):
        return Roi(read_pgm(text) > 0)
    try:
        xs, ys = text.split(",")
        x0, x1 = (int(v) for v in xs.split(":"))
        y0, y1 = (int(v) for v in ys.split(":"))
    except ValueError as exc:
        raise InvalidInputError(f"ROI must be X0:X1,Y0:Y1 or a PGM path, got {text!r}") from exc
    return Roi.from_rect(shape, x0, x1, y0, y1)


def _db_to_gray(db, dynamic_range):
    unit = np.clip(1.0 + np.asarray(db) / dynamic_range, 0.0, 1.0)
    return np.rint(unit * 255).astype(np.uint8)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions():
    return {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


_REPLAYED = ("input", "band", "window", "hop", "mode", "nc", "cutoff", "roi", "jobs",
             "lo_pct", "hi_pct", "scale")


def _apply_manifest(args):
    entries = read_manifest(args.manifest)
    if entries.get("command") != "process":
        raise FormatError("manifest was not written by 'process'")
    conv = {
        "band": FrequencyBand.parse, "window": int, "hop": int, "nc": int, "jobs": int,
        "cutoff": float, "lo_pct": float, "hi_pct": float,
    }
    for key in _REPLAYED:
        if getattr(args, key) is not None and key not in ("lo_pct", "hi_pct", "scale"):
            continue
        raw = entries.get(key, "None")
        if raw == "None":
            continue
        setattr(args, key, conv.get(key, str)(raw))


def cmd_process(args):
    if args.manifest:
        _apply_manifest(args)
    for name in ("input", "band", "window"):
        if getattr(args, name) is None:
            raise InvalidInputError(f"--{name} is required (directly or through --manifest)")
    mode = args.mode or "svd"
    jobs = args.jobs or 1
    stack = read_stack(args.input)
    roi = _parse_roi(args.roi, stack.image_shape)
    cfg = PipelineConfig(window=args.window, band=args.band, hop=args.hop, mode=mode,
                         n_c=args.nc, cutoff=args.cutoff, n_jobs=jobs)
    movie = process_stack(stack, cfg, roi=roi)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    display = dict(lo_pct=args.lo_pct, hi_pct=args.hi_pct, scale=args.scale)
    np.save(out / "movie.npy", movie.frames)
    np.save(out / "mean.npy", movie.mean_image)
    write_pgm(to_display_gray(movie.mean_image, **display), out / "mean.pgm")
    if not args.no_frames:
        frames_dir = out / "frames"
        frames_dir.mkdir(exist_ok=True)
        for k, frame in enumerate(movie.frames):
            write_pgm(to_display_gray(frame, **display), frames_dir / f"frame_{k:04d}.pgm")
    if roi is not None:
        write_series_csv(out / "series.csv", movie.timestamps, movie.series)

    entries = {"command": "process", **_versions(),
               "input": os.path.abspath(args.input), "input_sha256": _sha256(args.input),
               "band": str(args.band), "window": args.window, "hop": movie.starts[1] - movie.starts[0]
               if len(movie) > 1 else (args.hop or max(args.window // 2, 1)),
               "mode": mode, "nc": args.nc, "cutoff": args.cutoff, "roi": args.roi,
               "jobs": jobs, "lo_pct": args.lo_pct, "hi_pct": args.hi_pct, "scale": args.scale,
               "n_c_applied": movie.n_c, "n_windows": len(movie), "fs": stack.fs,
               "shape": f"{stack.nx}x{stack.ny}x{stack.nt_total}"}
    for name, stats in movie.timing_summary().items():
        entries[f"time_{name}_mean_s"] = f"{stats['mean']:.6f}"
        entries[f"time_{name}_total_s"] = f"{stats['total']:.6f}"
    write_manifest(out / "manifest.txt", entries)
    print(f"{len(movie)} windows, n_c = {movie.n_c}, written to {out}")
    return 0


def _write_truth(path, scene, truth):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# ground truth: scene parameters, then per-pixel maps (rows = y)\n")
        fh.write(dump_scene(scene))
        for name, arr in (("labels", truth.labels), ("width_hz", truth.width_map),
                          ("power", truth.power_map)):
            fh.write(f"[{name}]\n")
            for row in arr.T:
                fh.write(" ".join(f"{v:g}" for v in row) + "\n")
        if truth.jitter_pattern is not None:
            fh.write("[jitter_pattern]\n")
            for row in truth.jitter_pattern.T:
                fh.write(" ".join(f"{v:.6e}" for v in row) + "\n")


def cmd_synth(args):
    scene = load_scene(args.scene)
    stack, truth = generate_stack(scene)
    write_stack(stack, args.out)
    _write_truth(f"{args.out}.truth.txt", scene, truth)
    print(f"wrote {args.out} and {args.out}.truth.txt")
    return 0


def cmd_spectrogram(args):
    stack = read_stack(args.input)
    roi = _parse_roi(args.roi, stack.image_shape)
    plan = plan_windows(stack.nt_total, args.window, args.hop, fs=stack.fs)
    spec = spectrogram(stack, roi, plan, n_c=args.nc, cutoff=args.cutoff)
    db, freqs = spec.display()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    # rows of the raster are frequencies, highest at the top
    write_pgm(_db_to_gray(db[::-1], args.dynamic_range).T, out / "spectrogram.pgm")
    with open(out / "spectrogram.csv", "w") as fh:
        fh.write("freq_hz," + ",".join(f"{t:.6f}" for t in spec.times) + "\n")
        for f, row in zip(freqs, db):
            fh.write(f"{f:.3f}," + ",".join(f"{v:.6f}" for v in row) + "\n")
    print(f"{len(spec.times)} windows, n_c = {spec.n_c}, written to {out}")
    return 0


def cmd_composite(args):
    stack = read_stack(args.input)
    display = dict(lo_pct=args.lo_pct, hi_pct=args.hi_pct, scale=args.scale)
    common = dict(window=args.window, hop=args.hop, mode=args.mode, n_c=args.nc,
                  cutoff=args.cutoff)
    if args.kind == "band":
        if args.low is None or args.high is None:
            raise InvalidInputError("--low and --high are required for kind=band")
        # one clutter rank for both bands, derived from the low band by default
        cutoff = args.cutoff if args.cutoff is not None else args.low.f1
        common["cutoff"] = cutoff
        low = process_stack(stack, PipelineConfig(band=args.low, **common)).mean_image
        high = process_stack(stack, PipelineConfig(band=args.high, **common)).mean_image
        comp = composite_two_band(low, high, **display)
    else:
        if args.band is None or args.systole is None or args.diastole is None:
            raise InvalidInputError("--band, --systole and --diastole are required for kind=phase")
        movie = process_stack(stack, PipelineConfig(band=args.band, **common))
        comp = composite_two_phase(movie.phase_mean(*args.systole),
                                   movie.phase_mean(*args.diastole))
    write_ppm(comp.to_uint8(), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_svd_inspect(args):
    stack = read_stack(args.input)
    H = stack.casorati(args.start, args.window)
    basis = compute_svd_basis(H, image_shape=stack.image_shape)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fractions = energy_fractions(basis)
    write_profile_csv(out / "profile.csv", basis.lambdas, singular_energy_profile(basis), fractions)
    db, _ = eigenvector_spectra(basis, stack.fs)
    # rows: frequency (highest at top), columns: singular index
    write_pgm(_db_to_gray(db[::-1], args.dynamic_range).T, out / "spectra.pgm")
    for m, n in args.ranges:
        img = eigenvector_mean_image(basis, m, n)
        write_pgm(to_display_gray(img, 1.0, 99.0, "linear"), out / f"U_{m}-{n}.pgm")
    print(f"rank_eff = {basis.rank_eff}, first component energy fraction = {fractions[0]:.6f}")
    return 0


COMMANDS = {
    "process": cmd_process,
    "synth": cmd_synth,
    "spectrogram": cmd_spectrogram,
    "composite": cmd_composite,
    "svd-inspect": cmd_svd_inspect,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InvalidInputError, FormatError, NumericalFailureError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
