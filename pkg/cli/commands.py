"""
Command implementations.

Each ``cmd_*`` takes the parsed arguments, writes its outputs plus a run
manifest, prints a rich summary unless ``--quiet`` was given and returns the
process exit code. Bad flags and input files raise ``UsageError`` or a
format error, which the entry point turns into exit code 2.
"""

from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from accel_sim import compare, load_config, simulate
from cli import __version__
from cli.console import (
    StatusLog,
    console,
    create_access_table,
    create_census_table,
    create_codec_table,
    create_comparison_table,
    create_cycle_table,
    create_header,
    create_trace_table,
    framed,
)
from cli.manifest import RunManifest, manifest_path
from geometry import Camera, default_camera
from renderer import (
    Pipeline,
    RenderOptions,
    SampleRange,
    compare_access_counts,
    compare_images,
    render,
    write_image,
)
from scene import GeneratorSettings, Scene, generate_occluder_scene, generate_synthetic_scene, load_scene, save_scene
from shading import TransmittanceConvention
from sparse import (
    CodecStats,
    SizeModel,
    Variant,
    decode,
    dense_codec_stats,
    dump_encoding,
    encode,
    iter_named_factors,
    profile_queries,
    sparsity_census,
)

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    """A flag combination or input file the command cannot work with."""


def _manifest(args: argparse.Namespace, seed: int | None = None) -> RunManifest:
    arguments = {
        k: v for k, v in vars(args).items() if k not in ("handler", "verbose", "quiet", "manifest_out")
    }
    return RunManifest(command=args.command, arguments=arguments, version=__version__, seed=seed)


def _finish(args: argparse.Namespace, manifest: RunManifest, primary: Path, log: StatusLog, *tables) -> int:
    path = Path(args.manifest_out) if getattr(args, "manifest_out", None) else manifest_path(primary)
    manifest.write(path)
    log.add(f"Manifest written to {path}", "success")
    if not args.quiet:
        console.print(create_header(args.command))
        for title, table in tables:
            console.print(framed(table, title))
        console.print(framed(log.render(), "Status Log"))
    return 0


def _write_json(path: str | Path, data: dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def _read_json(path: str | Path, flag: str) -> Any:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{flag}: no such file {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{flag}: {path} is not valid JSON ({exc.msg})") from exc


def _load_scene_arg(path: str | Path, manifest: RunManifest) -> Scene:
    if not Path(path).exists():
        raise UsageError(f"--scene: no such file {path}")
    manifest.add_input(path)
    return load_scene(path)


def build_camera(args: argparse.Namespace, scene: Scene) -> Camera:
    """Camera from the flags, or the default front view when no position is given."""
    if args.cam_pos is None:
        return default_camera(scene.bounds, args.width, args.height, args.fov_deg)
    target = scene.bounds.midpoint if args.cam_look_at is None else np.asarray(args.cam_look_at)
    try:
        return Camera.look_at(np.asarray(args.cam_pos), target, args.fov_deg, args.width, args.height)
    except ValueError as exc:
        raise UsageError(f"--cam-pos/--cam-look-at: {exc}") from exc


def render_options(args: argparse.Namespace, pipeline: Pipeline | None = None) -> RenderOptions:
    return RenderOptions(
        pipeline=pipeline or Pipeline(args.pipeline),
        exact=args.exact,
        threshold=args.tau,
        n_samples=args.n_samples,
        sample_range=SampleRange(args.sample_range),
        octant_ordering=not args.no_octant_order,
        convention=TransmittanceConvention(args.transmittance),
    )


def cmd_gen_scene(args: argparse.Namespace) -> int:
    log = StatusLog()
    manifest = _manifest(args, seed=args.seed)
    settings = GeneratorSettings(
        factor_sparsity=tuple(args.factor_sparsity),
        max_cell_optical_depth=args.max_cell_depth,
        direction_degree=args.direction_degree,
    )
    if args.layout == "occluder":
        scene = generate_occluder_scene(
            args.res, args.rank, args.channels, args.seed, args.optical_depth, settings
        )
    else:
        scene = generate_synthetic_scene(
            args.res, args.occupancy, args.rank, args.channels, args.seed, settings
        )
    out = save_scene(scene, args.out)
    manifest.add_output(out)
    log.add(
        f"Scene {scene.grid.resolution} with {scene.grid.popcount} occupied cells "
        f"({100 * scene.grid.occupancy_ratio:.2f}%) written to {out}",
        "success",
    )
    log.add(f"Fingerprint {scene.fingerprint()[:16]}")
    return _finish(args, manifest, out, log, ("Sparsity Census", create_census_table(sparsity_census(scene.decomp))))


def cmd_render(args: argparse.Namespace) -> int:
    log = StatusLog()
    manifest = _manifest(args)
    scene = _load_scene_arg(args.scene, manifest)
    manifest.seed = scene.seed
    camera = build_camera(args, scene)
    image, trace = render(scene, camera, render_options(args))
    out = write_image(image, args.image_out)
    manifest.add_output(out)
    log.add(f"Image written to {out}", "success")
    if args.trace_out:
        manifest.add_output(trace.write(args.trace_out))
        log.add(f"Trace written to {args.trace_out}", "success")
    return _finish(args, manifest, out, log, ("Step Trace", create_trace_table(trace)))


def cmd_compare(args: argparse.Namespace) -> int:
    log = StatusLog()
    manifest = _manifest(args)
    scene = _load_scene_arg(args.scene, manifest)
    manifest.seed = scene.seed
    camera = build_camera(args, scene)
    first, second = (Pipeline(p) for p in args.pipelines)
    image_a, trace_a = render(scene, camera, render_options(args, first))
    image_b, trace_b = render(scene, camera, render_options(args, second))
    delta = compare_images(image_a, image_b)
    access = compare_access_counts(scene, camera, args.n_samples)
    data = {
        "pipelines": [first.value, second.value],
        "image_delta": delta.to_dict(),
        "access_report": access.to_dict(),
        "points_shaded": [trace_a.points_shaded, trace_b.points_shaded],
    }
    out = _write_json(args.out, data)
    manifest.add_output(out)
    log.add(f"max |delta| {delta.max_abs:.4g}, mean |delta| {delta.mean_abs:.4g}")
    log.add(f"Comparison written to {out}", "success")
    return _finish(args, manifest, out, log, ("Occupancy Accesses", create_access_table(access)))


def _size_model(args: argparse.Namespace) -> SizeModel:
    return SizeModel(
        value_width=args.value_width,
        coord_width=args.coord_width,
        ptr_width=args.ptr_width,
        leaf_capacity=args.leaf_capacity,
    )


def cmd_codec_stats(args: argparse.Namespace) -> int:
    log = StatusLog()
    manifest = _manifest(args)
    scene = _load_scene_arg(args.scene, manifest)
    manifest.seed = scene.seed
    model = _size_model(args)
    forced = Variant(args.force_variant) if args.force_variant else None
    census = sparsity_census(scene.decomp)
    dump_dir = Path(args.dump_encodings) if args.dump_encodings else None
    if dump_dir is not None:
        dump_dir.mkdir(parents=True, exist_ok=True)

    factors = []
    round_trip = True
    for name, array in iter_named_factors(scene.decomp):
        enc = encode(array, forced, model)
        exact = bool(np.array_equal(decode(enc), array))
        round_trip &= exact
        factors.append(
            {
                "name": name,
                "variant": enc.variant.value,
                "sparsity": enc.sparsity,
                "encoded_bytes": enc.encoded_bytes,
                "bitmap_bytes": encode(array, Variant.BITMAP, model).encoded_bytes,
                "coo_bytes": encode(array, Variant.COO, model).encoded_bytes,
                "round_trip_exact": exact,
            }
        )
        if dump_dir is not None:
            manifest.add_output(_write_json(dump_dir / f"{name}.json", dump_encoding(enc)))
    stats = profile_queries(scene, forced, model)
    data = {
        "scene": scene.fingerprint(),
        "size_model": {
            "value_width": model.value_width,
            "coord_width": model.coord_width,
            "ptr_width": model.ptr_width,
            "leaf_capacity": model.leaf_capacity,
        },
        "force_variant": forced.value if forced else None,
        "census": census.to_dict(),
        "factors": factors,
        "codec_stats": stats.to_dict(),
        "dense_codec_stats": dense_codec_stats(scene, model).to_dict(),
        "round_trip_exact": round_trip,
    }
    out = _write_json(args.out, data)
    manifest.add_output(out)
    if round_trip:
        log.add("Every factor decodes exactly", "success")
    else:
        log.add("Round trip mismatch on at least one factor", "error")
    log.add(f"Codec stats written to {out}", "success")
    return _finish(
        args,
        manifest,
        out,
        log,
        ("Sparsity Census", create_census_table(census)),
        ("Query Latency", create_codec_table(stats)),
    )


def _codec_stats_arg(path: str | None, manifest: RunManifest) -> CodecStats | None:
    """Accept either a ``codec-stats`` output or a bare CodecStats object."""
    if path is None:
        return None
    data = _read_json(path, "--codec-stats")
    manifest.add_input(path)
    if isinstance(data, dict) and "codec_stats" in data:
        data = data["codec_stats"]
    try:
        return CodecStats.from_dict(data)
    except ValueError as exc:
        raise UsageError(f"--codec-stats: {exc}") from exc


def cmd_simulate(args: argparse.Namespace) -> int:
    log = StatusLog()
    manifest = _manifest(args)
    if args.compare_out and not args.against:
        raise UsageError("--compare-out needs --against")
    config = load_config(args.config)
    trace = _read_json(args.trace, "--trace")
    manifest.add_input(args.trace)
    codec = _codec_stats_arg(args.codec_stats, manifest)

    report = simulate(trace, codec, config)
    out = report.write(args.out)
    manifest.add_output(out)
    log.add(f"{config.name}: {report.total_cycles:,.0f} cycles, {report.fps:,.2f} fps", "success")
    tables = [(f"Cycle Breakdown: {config.name}", create_cycle_table(report))]

    if args.against:
        other = simulate(trace, codec, load_config(args.against))
        comparison = compare(report, other)
        compare_out = args.compare_out or Path(args.out).with_suffix(".compare.json")
        manifest.add_output(_write_json(compare_out, comparison.to_dict()))
        log.add(f"{other.config_name} runs {comparison.total_speedup:.2f}x faster than {config.name}")
        tables.append((f"{config.name} vs {other.config_name}", create_comparison_table(comparison)))
    return _finish(args, manifest, out, log, *tables)
