"""Command-line pipeline: gen-scene -> degrade -> enhance -> refine ->
eval, plus flow and map utilities. Stages compose via the filesystem
(PNG sequences + JSON manifests, `.flo` flow fields) so external tools
can be slotted between them. All reports are JSON."""

import json
import os
import sys
from pathlib import Path

import click

from . import aggregate, flow as flowmod, quality, seqio, synth, texture
from .core import AggregationParams
from .flow import FlowParams
from .seqio import FormatError


def _threads_cap():
    raw = os.environ.get("DWTA_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise click.UsageError(f"DWTA_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise click.UsageError(f"DWTA_THREADS must be >= 0, got {n}")
    return n


def _jsonable(x):
    if isinstance(x, float):
        if x == float("inf"):
            return "inf"
        if x == float("-inf"):
            return "-inf"
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit_report(report, json_path):
    text = json.dumps(_jsonable(report), indent=2)
    click.echo(text)
    if json_path:
        Path(json_path).write_text(text + "\n")


def _parse_roi(s):
    parts = s.split(",")
    if len(parts) != 4:
        raise click.UsageError(f"roi must be x,y,w,h, got {s!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise click.UsageError(f"roi components must be integers, got {s!r}")


@click.group()
def cli():
    """Flow-guided recurrent temporal denoising toolkit."""
    _threads_cap()


@cli.command("gen-scene")
@click.option("--kind", type=click.Choice(synth.SCENE_KINDS), required=True, help="Scene type.")
@click.option("--width", type=int, default=64, show_default=True, help="Frame width in pixels.")
@click.option("--height", type=int, default=64, show_default=True, help="Frame height in pixels.")
@click.option("--frames", "n_frames", type=int, default=60, show_default=True, help="Number of frames.")
@click.option("--fps", type=float, default=24.0, show_default=True, help="Manifest fps metadata.")
@click.option("--seed", type=int, required=True, help="Seed fixing all randomness.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Output directory.")
def gen_scene_cmd(kind, width, height, n_frames, fps, seed, out_dir):
    """Generate a deterministic clean test scene."""
    frames = synth.gen_scene(kind, width, height, n_frames, seed)
    manifest = seqio.manifest_for(width, height, n_frames, fps=fps)
    path = seqio.write_sequence(manifest, frames, out_dir)
    click.echo(str(path))


@cli.command("degrade")
@click.option("--in", "manifest_path", type=click.Path(), required=True, help="Input manifest JSON.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Output directory.")
@click.option("--gain", type=float, default=0.15, show_default=True, help="Linear darkening gain.")
@click.option("--gamma", type=float, default=2.2, show_default=True, help="Degradation gamma exponent.")
@click.option("--read-sigma", type=float, default=0.03, show_default=True, help="Signal-independent noise std.")
@click.option("--shot-k", type=float, default=0.02, show_default=True, help="Signal-dependent variance coefficient.")
@click.option("--seed", type=int, required=True, help="Seed fixing all randomness.")
def degrade_cmd(manifest_path, out_dir, gain, gamma, read_sigma, shot_k, seed):
    """Apply synthetic low-light degradation to a sequence."""
    params = synth.DegradeParams(gain=gain, gamma=gamma, read_sigma=read_sigma, shot_k=shot_k, seed=seed)
    manifest, frames = seqio.read_sequence(manifest_path)
    path = seqio.write_sequence(manifest, synth.degrade_sequence(frames, params), out_dir)
    click.echo(str(path))


@cli.command("enhance")
@click.option("--in", "manifest_path", type=click.Path(), required=True, help="Input manifest JSON.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Output directory.")
@click.option("--method", type=click.Choice(["identity", "histstretch", "gamma"]), default="histstretch", show_default=True, help="Enhancement baseline.")
@click.option("--p-lo", type=float, default=1.0, show_default=True, help="Low luma percentile (histstretch).")
@click.option("--p-hi", type=float, default=99.0, show_default=True, help="High luma percentile (histstretch).")
@click.option("--g", type=float, default=2.2, show_default=True, help="Gamma value (gamma method).")
def enhance_cmd(manifest_path, out_dir, method, p_lo, p_hi, g):
    """Apply a non-learned enhancement baseline frame by frame."""
    if method == "identity":
        m = synth.Identity()
    elif method == "gamma":
        m = synth.Gamma(g=g)
    else:
        m = synth.HistStretch(p_lo=p_lo, p_hi=p_hi)
    manifest, frames = seqio.read_sequence(manifest_path)
    warnings = []

    def enhanced():
        for i, f in enumerate(frames):
            out, degenerate = synth.enhance_baseline(f, m)
            if degenerate:
                warnings.append(i)
            yield out

    path = seqio.write_sequence(manifest, enhanced(), out_dir)
    for i in warnings:
        click.echo(f"warning: frame {i} has degenerate percentiles, left unchanged", err=True)
    click.echo(str(path))


@cli.command("flow")
@click.option("--in", "manifest_path", type=click.Path(), required=True, help="Input manifest JSON.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Directory for .flo files.")
@click.option("--levels", type=int, default=3, show_default=True, help="Pyramid levels.")
@click.option("--block", type=int, default=8, show_default=True, help="Block size in pixels.")
@click.option("--radius", type=int, default=4, show_default=True, help="Search radius per level.")
@click.option("--subpixel/--no-subpixel", default=True, show_default=True, help="Parabolic subpixel refinement.")
def flow_cmd(manifest_path, out_dir, levels, block, radius, subpixel):
    """Estimate flow for every frame transition; writes NNNNNN.flo files."""
    params = FlowParams(levels=levels, block=block, radius=radius, subpixel=subpixel)
    _, frames = seqio.read_sequence(manifest_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prev = None
    for t, curr in enumerate(frames):
        if prev is not None:
            fl = flowmod.estimate_flow(prev, curr, params)
            seqio.write_flo(fl, out / f"{t - 1:06d}.flo")
        prev = curr
    click.echo(str(out))


@cli.command("refine")
@click.option("--in", "manifest_path", type=click.Path(), required=True, help="Input manifest JSON.")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Output directory.")
@click.option("--mode", type=click.Choice(["dynamic", "ema", "window"]), default="dynamic", show_default=True, help="Aggregation mode.")
@click.option("--a", type=float, default=10.0, show_default=True, help="Weight sigmoid steepness.")
@click.option("--b", type=float, default=0.5, show_default=True, help="Residual threshold.")
@click.option("--c", type=float, default=0.1, show_default=True, help="Weight floor.")
@click.option("--lambda", "ema_lambda", type=float, default=0.2, show_default=True, help="EMA weight (ema mode).")
@click.option("--window-n", type=int, default=5, show_default=True, help="Window size (window mode).")
@click.option("--flow", "flow_source", default="builtin", show_default=True, help="'builtin' or a directory of .flo files.")
@click.option("--levels", type=int, default=3, show_default=True, help="Builtin flow pyramid levels.")
@click.option("--block", type=int, default=8, show_default=True, help="Builtin flow block size.")
@click.option("--radius", type=int, default=4, show_default=True, help="Builtin flow search radius.")
@click.option("--residual", "residual_reduce", type=click.Choice(["mean", "luma"]), default="mean", show_default=True, help="Channel reduction for the residual.")
@click.option("--median-weights/--no-median-weights", default=False, show_default=True, help="3x3 median filter on the weight map.")
@click.option("--adjust-blend/--no-adjust-blend", default=True, show_default=True, help="Blend the brightness-adjusted history (not just flow estimation).")
@click.option("--dump-weights", "dump_dir", type=click.Path(), default=None, help="Directory for per-frame weight map PNGs.")
@click.option("--json", "json_path", type=click.Path(), default=None, help="Write the summary JSON here too.")
def refine_cmd(manifest_path, out_dir, mode, a, b, c, ema_lambda, window_n, flow_source,
               levels, block, radius, residual_reduce, median_weights, adjust_blend,
               dump_dir, json_path):
    """Run the recurrent refinement over a sequence."""
    params = AggregationParams(a=a, b=b, c=c, mode=mode, ema_lambda=ema_lambda, window_n=window_n)
    flow_params = FlowParams(levels=levels, block=block, radius=radius)
    flow_dir = None if flow_source == "builtin" else flow_source
    manifest, frames = seqio.read_sequence(manifest_path)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if dump_dir:
        Path(dump_dir).mkdir(parents=True, exist_ok=True)

    def emit(t, frame):
        seqio.write_image(frame, out / manifest.frames[t])

    def tap(t, info):
        if dump_dir:
            seqio.write_map(info["weights"], Path(dump_dir) / f"{t:06d}.png")

    stats = aggregate.refine_sequence(
        frames,
        params=params,
        flow_params=flow_params,
        flow_dir=flow_dir,
        adjust_blend=adjust_blend,
        residual_reduce=residual_reduce,
        median_weights=median_weights,
        emit=emit,
        tap=tap,
    )
    doc = {
        "width": manifest.width,
        "height": manifest.height,
        "fps": manifest.fps,
        "frames": list(manifest.frames),
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")
    _emit_report(stats, json_path)


@cli.command("eval")
@click.option("--ref", "ref_path", type=click.Path(), required=True, help="Reference manifest JSON.")
@click.option("--test", "test_path", type=click.Path(), required=True, help="Test manifest JSON.")
@click.option("--metrics", default="psnr,ssim", show_default=True, help="Comma-separated subset of psnr,ssim,composite.")
@click.option("--alpha", type=float, default=0.5, show_default=True, help="Composite loss mixing weight.")
@click.option("--json", "json_path", type=click.Path(), default=None, help="Write the JSON report here too.")
def eval_cmd(ref_path, test_path, metrics, alpha, json_path):
    """Full-reference evaluation of a test sequence against a reference."""
    wanted = [m.strip() for m in metrics.split(",") if m.strip()]
    for m in wanted:
        if m not in ("psnr", "ssim", "composite"):
            raise click.UsageError(f"unknown metric {m!r}, expected psnr, ssim or composite")
    _, ref_frames = seqio.read_sequence(ref_path)
    _, test_frames = seqio.read_sequence(test_path)

    per_frame = []
    for i, (rf, tf) in enumerate(zip(ref_frames, test_frames)):
        entry = {"index": i}
        if "psnr" in wanted:
            entry["psnr"] = quality.psnr(tf, rf)
        if "ssim" in wanted:
            entry["ssim"] = quality.ssim(tf, rf)
        if "composite" in wanted:
            total, breakdown = quality.composite_loss(tf, rf, alpha=alpha)
            entry["composite"] = total
            entry["composite_breakdown"] = breakdown
        per_frame.append(entry)

    means = {}
    for m in wanted:
        vals = [e[m] for e in per_frame]
        means[m] = float("inf") if any(v == float("inf") for v in vals) else sum(vals) / len(vals)
    _emit_report({"frames": per_frame, "mean": means}, json_path)


@cli.command("pseudo-gt")
@click.option("--in", "manifest_path", type=click.Path(), required=True, help="Input manifest JSON.")
@click.option("--roi", required=True, help="Static region as x,y,w,h.")
@click.option("--out", "out_path", type=click.Path(), required=True, help="Output PNG path.")
def pseudo_gt_cmd(manifest_path, roi, out_path):
    """Average a static region over all frames into a pseudo ground truth."""
    _, frames = seqio.read_sequence(manifest_path)
    gt = synth.pseudo_gt(list(frames), _parse_roi(roi))
    seqio.write_image(gt, out_path)
    click.echo(str(out_path))


@cli.command("texture-map")
@click.option("--in", "image_path", type=click.Path(), required=True, help="Input image (PNG).")
@click.option("--out", "out_path", type=click.Path(), required=True, help="Output grayscale PNG.")
@click.option("--window", type=int, default=8, show_default=True, help="Box-mean window.")
@click.option("--sigma-axis", type=click.Choice(["bands", "spatial"]), default="bands", show_default=True, help="Axis of the deviation step.")
def texture_map_cmd(image_path, out_path, window, sigma_axis):
    """Compute the texture-complexity map of a single image."""
    frame = seqio.read_image(image_path)
    mt = texture.texture_map(frame, window=window, sigma_axis=sigma_axis)
    seqio.write_map(mt, out_path)
    click.echo(str(out_path))


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        return 1
    except (FileNotFoundError, FormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
