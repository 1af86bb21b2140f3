"""Step definitions for scene synthesis and scene container scenarios."""

from __future__ import annotations

import struct

import numpy as np
from behave import given, when, then

from scene import (
    AppearanceHead,
    BadMagicError,
    DimensionMismatchError,
    GeneratorSettings,
    ModeFactors,
    OccupancyGrid,
    OccupancyUnreachableError,
    Scene,
    SceneFormatError,
    TruncatedPayloadError,
    VMDecomposition,
    VersionMismatchError,
    decode_scene,
    encode_scene,
    generate_occluder_scene,
    generate_synthetic_scene,
    load_scene,
    save_scene,
)
from shading import densities
from sparse import sparsity_census
from tests.helpers.assertions import (
    AssertionError,
    assert_arrays_identical,
    assert_at_most,
    assert_close,
    assert_equal,
)
from tests.helpers.fixtures import cached_scene

HEADER_BYTES = struct.calcsize("<4sIIIIIIQIII")
BOUNDS_BYTES = 48

CORRUPTION_ERRORS = {
    "magic": BadMagicError,
    "version": VersionMismatchError,
    "truncation": TruncatedPayloadError,
    "trailing": DimensionMismatchError,
}


@given("a {res:d}^3 blob scene at occupancy {occupancy:f}")
def step_blob_scene(context, res: int, occupancy: float):
    """Generate (or reuse) a blob scene with the suite seed."""
    context.scene = cached_scene(context, res, occupancy)


@given("a {res:d}^3 blob scene at occupancy {occupancy:f} with rank {rank:d} and {channels:d} channels")
def step_blob_scene_shaped(context, res: int, occupancy: float, rank: int, channels: int):
    """Generate a blob scene with an explicit rank and channel count."""
    context.scene = cached_scene(context, res, occupancy, rank=rank, channels=channels)


@when("I generate a {res:d}^3 scene at occupancy {occupancy:f}")
def step_generate_scene(context, res: int, occupancy: float):
    """Try to generate a scene, keeping any error."""
    try:
        context.scene = generate_synthetic_scene(res, occupancy, 2, 3, context.config.scene_seed)
    except ValueError as exc:
        context.error = exc


@when('I generate a {res:d}^3 scene at occupancy {occupancy:f} with factor sparsity "{targets}"')
def step_generate_sparse_scene(context, res: int, occupancy: float, targets: str):
    """Generate a scene whose factor slices cycle through sparsity targets."""
    context.targets = tuple(float(t) for t in targets.split(","))
    settings = GeneratorSettings(factor_sparsity=context.targets)
    context.scene = generate_synthetic_scene(res, occupancy, 4, 3, context.config.scene_seed, settings)


@when("I generate the same scene twice with seed {seed:d}")
def step_generate_twice(context, seed: int):
    """Generate two scenes with identical arguments."""
    context.scenes = [generate_synthetic_scene(16, 0.05, 2, 3, seed) for _ in range(2)]


@when("I generate an occluder scene at resolution {res:d}")
def step_generate_occluder(context, res: int):
    """Build the slab-and-blob layout."""
    context.scene = generate_occluder_scene(res, seed=context.config.scene_seed)


@then("the occupancy ratio is within 10% of {occupancy:f}")
def step_check_occupancy(context, occupancy: float):
    """Verify the achieved occupancy."""
    assert_at_most(abs(context.scene.grid.occupancy_ratio - occupancy), 0.1 * occupancy, "occupancy error")


@then("the popcount equals round({occupancy:f} * cells)")
def step_check_popcount(context, occupancy: float):
    """Verify the exact number of occupied cells."""
    grid = context.scene.grid
    assert_equal(grid.popcount, int(round(occupancy * grid.num_cells)), "popcount")


@then("generation fails because the occupancy is unreachable")
def step_check_unreachable(context):
    """Verify the generator refused the target."""
    if not isinstance(context.error, OccupancyUnreachableError):
        raise AssertionError(f"Expected OccupancyUnreachableError, got {context.error!r}")


@then("both scenes have the same fingerprint")
def step_check_same_fingerprint(context):
    """Verify byte-identical encodings."""
    a, b = context.scenes
    assert_equal(a.fingerprint(), b.fingerprint(), "scene fingerprint")
    if encode_scene(a) != encode_scene(b):
        raise AssertionError("Scene encodings differ")


@then("a scene with seed {seed:d} has a different fingerprint")
def step_check_other_seed(context, seed: int):
    """Verify another seed changes the scene."""
    other = generate_synthetic_scene(16, 0.05, 2, 3, seed)
    if other.fingerprint() == context.scenes[0].fingerprint():
        raise AssertionError(f"Seed {seed} produced the same scene")


@then("every factor sparsity is within {tolerance:f} of its cyclic target")
def step_check_factor_targets(context, tolerance: float):
    """Verify each census entry against ``targets[i % len(targets)]``."""
    census = sparsity_census(context.scene.decomp)
    targets = context.targets
    for i, entry in enumerate(census.factors):
        assert_close(entry.sparsity, targets[i % len(targets)], tolerance, f"sparsity of {entry.name}")


@then("the occluder slab is occupied in front of the blob")
def step_check_occluder(context):
    """Verify the slab cells and the blob centre are occupied."""
    grid = context.scene.grid
    n = grid.resolution[2]
    slab_z = n // 8
    mid = n // 2
    for cell in ((mid, mid, slab_z), (n // 8, n // 8, slab_z), (mid, mid, int(0.7 * n))):
        if not grid.is_occupied(cell):
            raise AssertionError(f"Expected cell {cell} to be occupied")
    if grid.is_occupied((mid, mid, slab_z + max(2, n // 8) + 1)):
        raise AssertionError("Gap between slab and blob should be empty")


@then("every occupied occluder cell has optical depth {depth:f} per cell")
def step_check_occluder_depth(context, depth: float):
    """Verify the uniform slab density."""
    grid = context.scene.grid
    sigma = densities(context.scene.decomp, grid.occupied_cells())
    side = float(grid.cell_size.max())
    assert_close(float(sigma.max()) * side, depth, 1e-4, "largest cell optical depth")
    assert_close(float(sigma.min()) * side, depth, 1e-4, "smallest cell optical depth")


@then("the densest occupied cell has optical depth {depth:f} per cell")
def step_check_densest_cell(context, depth: float):
    """Verify the generator's density scaling against the shading lookup."""
    grid = context.scene.grid
    sigma = densities(context.scene.decomp, grid.occupied_cells())
    side = float(grid.cell_size.max())
    assert_close(float(sigma.max()) * side, depth, 1e-5, "largest cell optical depth")


@then("the occupied cells are listed in x-fastest order")
def step_check_cell_order(context):
    """Verify the flat ordering of occupied cells."""
    grid = context.scene.grid
    flat = grid.flat_index(grid.occupied_cells())
    if not np.all(np.diff(flat) > 0):
        raise AssertionError("Occupied cells are not strictly ascending in flat index")
    assert_equal(int(flat.shape[0]), grid.popcount, "occupied cell count")


@then("an empty grid has occupancy 0 and a full grid has occupancy 1")
def step_check_grid_extremes(context):
    """Verify the occupancy ratio at the extremes."""
    assert_equal(OccupancyGrid.empty((8, 8, 8)).occupancy_ratio, 0.0, "empty occupancy")
    assert_equal(OccupancyGrid.full((8, 9, 10)).occupancy_ratio, 1.0, "full occupancy")
    assert_equal(OccupancyGrid.empty((8, 8, 8)).occupied_bounds(), None, "empty occupied bounds")


@when("I save and reload the scene")
def step_save_reload(context):
    """Round trip the scene through a file."""
    path = save_scene(context.scene, context.workdir / "scene.rtnf")
    context.reloaded = load_scene(path)


@then("the reloaded scene is identical")
def step_check_reloaded(context):
    """Verify every array and the fingerprint survive the round trip."""
    a, b = context.scene, context.reloaded
    assert_equal(b.fingerprint(), a.fingerprint(), "fingerprint")
    assert_arrays_identical(b.grid.bits, a.grid.bits, "occupancy bits")
    for field in ("density", "appearance"):
        fa, fb = getattr(a.decomp, field), getattr(b.decomp, field)
        for (r, name, c, arr_a), (_, _, _, arr_b) in zip(fa.iter_factors(), fb.iter_factors()):
            assert_arrays_identical(arr_b, arr_a, f"{field}.r{r}.{name}.c{c}")
    for i, (wa, wb) in enumerate(zip(a.head.weights, b.head.weights)):
        assert_arrays_identical(wb, wa, f"head weight {i}")
    assert_equal(b.seed, a.seed, "seed")
    assert_equal(b.decomp.activation, a.decomp.activation, "activation")


def _corrupt(data: bytes, scene: Scene, kind: str) -> bytes:
    buf = bytearray(data)
    if kind == "magic":
        buf[0:4] = b"NOPE"
    elif kind == "version":
        struct.pack_into("<I", buf, 4, 99)
    elif kind == "truncation":
        widths = len(scene.head.layer_widths)
        occupancy = (scene.grid.num_cells + 7) // 8
        cut = HEADER_BYTES + 4 * widths + BOUNDS_BYTES + occupancy + 10
        del buf[cut:]
    elif kind == "trailing":
        buf.extend(b"\x00\x00\x00\x00")
    else:
        raise ValueError(f"unknown corruption {kind}")
    return bytes(buf)


@when('I decode the scene file with its {kind} corrupted')
def step_decode_corrupted(context, kind: str):
    """Corrupt the encoding in one way and decode it."""
    context.corruption = kind
    data = _corrupt(encode_scene(context.scene), context.scene, kind)
    try:
        decode_scene(data)
    except SceneFormatError as exc:
        context.error = exc


@then('decoding fails naming the field "{field}"')
def step_check_decode_field(context, field: str):
    """Verify the error type and the field it names."""
    error = context.error
    expected = CORRUPTION_ERRORS[context.corruption]
    if not isinstance(error, expected):
        raise AssertionError(f"Expected {expected.__name__}, got {error!r}")
    if not error.field.startswith(field):
        raise AssertionError(f"Expected field starting with {field!r}, got {error.field!r}")


@then("a head whose input width disagrees with the features is rejected")
def step_check_bad_head(context):
    """Verify the head width invariant."""
    scene = context.scene
    width = scene.decomp.feature_width + 3 + 12 + 1
    head = AppearanceHead.constant(width, scene.decomp.channels, 0.0, hidden=(4,))
    try:
        Scene(scene.grid, scene.decomp, head)
    except ValueError:
        return
    raise AssertionError("Scene accepted a head with the wrong input width")


@then("density factors with more than one channel are rejected")
def step_check_density_channels(context):
    """Verify density factors are single-channel."""
    res = context.scene.grid.resolution
    try:
        VMDecomposition(ModeFactors.zeros(1, 2, res), ModeFactors.zeros(1, 3, res))
    except ValueError:
        return
    raise AssertionError("Decomposition accepted two density channels")
