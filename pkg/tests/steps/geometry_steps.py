"""Step definitions for camera, ball and octant geometry scenarios."""

from __future__ import annotations

import numpy as np
from behave import given, when, then

from geometry import (
    Ball,
    Camera,
    CellNotOccupiedError,
    PixelOutOfRangeError,
    Ray,
    ball_radius,
    cube_to_ball,
    octant_distances,
    octant_of_points,
    octant_order,
    pixel_to_ray,
    project_ball,
    ray_sphere_intersect,
)
from scene import OccupancyGrid, SceneBounds
from tests.helpers.assertions import (
    AssertionError,
    assert_at_most,
    assert_close,
    assert_equal,
)
from tests.helpers.fixtures import random_look_at
from tests.helpers.oracles import march_sphere, pixels_hitting_ball


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    d = rng.normal(size=3)
    return d / np.linalg.norm(d)


@when("I intersect {count:d} random rays with random balls")
def step_intersect_random(context, count: int):
    """Compare analytic intersections with marching, skipping near-tangent rays."""
    rng = np.random.default_rng(context.config.scene_seed)
    context.checked = 0
    context.mismatches = []
    while context.checked < count:
        origin = rng.uniform(-5.0, 5.0, size=3)
        center = rng.uniform(-2.0, 2.0, size=3)
        radius = float(rng.uniform(0.2, 2.0))
        direction = _random_unit(rng)
        oc = center - origin
        perp = np.linalg.norm(oc - (oc @ direction) * direction)
        if abs(perp - radius) < 1e-3 * radius:
            continue
        context.checked += 1
        analytic = ray_sphere_intersect(Ray(origin, direction), Ball(center, radius, (0, 0, 0)))
        marched = march_sphere(origin, direction, center, radius)
        if (analytic is None) != (marched is None):
            context.mismatches.append((origin, direction, center, radius, analytic, marched))
            continue
        if analytic is None:
            continue
        tolerance = radius / 50.0
        if abs(analytic[0] - marched[0]) > tolerance or abs(analytic[1] - marched[1]) > tolerance:
            context.mismatches.append((origin, direction, center, radius, analytic, marched))


@then("every analytic intersection agrees with ray marching")
def step_check_marching(context):
    """Verify no pair disagreed."""
    if context.mismatches:
        first = context.mismatches[0]
        raise AssertionError(
            f"{len(context.mismatches)} of {context.checked} pairs disagree; first: "
            f"analytic {first[4]} vs marched {first[5]}"
        )


@then(
    "a ray from ({ox:g}, {oy:g}, {oz:g}) along ({dx:g}, {dy:g}, {dz:g}) meets the ball "
    "at ({cx:g}, {cy:g}, {cz:g}) radius {r:g} between t={t0:g} and t={t1:g}"
)
def step_check_known_intersection(context, ox, oy, oz, dx, dy, dz, cx, cy, cz, r, t0, t1):
    """Verify a hand-computed intersection."""
    hit = ray_sphere_intersect(Ray((ox, oy, oz), (dx, dy, dz)), Ball((cx, cy, cz), r, (0, 0, 0)))
    if hit is None:
        raise AssertionError("Expected the ray to hit the ball")
    assert_close(hit[0], t0, 1e-9, "entry distance")
    assert_close(hit[1], t1, 1e-9, "exit distance")


@then("a ray from the origin along +z misses a ball behind it")
def step_check_behind(context):
    """Verify balls behind the origin are not hit."""
    hit = ray_sphere_intersect(Ray((0, 0, 0), (0, 0, 1)), Ball((0, 0, -5), 1.0, (0, 0, 0)))
    assert_equal(hit, None, "intersection with a ball behind the ray")


@given("a {size:d}x{size2:d} camera with focal length {focal:g} at the origin looking along +z")
def step_identity_camera(context, size: int, size2: int, focal: float):
    """Build a camera with identity rotation and a centred principal point."""
    context.camera = Camera(np.zeros(3), np.eye(3), focal, focal, size / 2, size2 / 2, size, size2)


@then("pixel ({px:d}, {py:d}) maps to the direction of ({u:g}, {v:g}, 1)")
def step_check_pixel_ray(context, px: int, py: int, u: float, v: float):
    """Verify the pixel-centre direction."""
    ray = pixel_to_ray(context.camera, px, py)
    expected = np.array([u, v, 1.0]) / np.linalg.norm([u, v, 1.0])
    assert_at_most(float(np.abs(ray.direction - expected).max()), 1e-12, "direction error")
    assert_close(float(np.linalg.norm(ray.direction)), 1.0, 1e-12, "direction norm")


@then("pixel ({px:d}, {py:d}) is rejected as out of range")
def step_check_pixel_range(context, px: int, py: int):
    """Verify out-of-image pixels raise."""
    try:
        pixel_to_ray(context.camera, px, py)
    except PixelOutOfRangeError:
        return
    raise AssertionError(f"Pixel ({px}, {py}) was accepted")


@when("I project {count:d} random balls through random {size:d}x{size2:d} cameras")
def step_project_random(context, count: int, size: int, size2: int):
    """Compare projected regions with per-pixel analytic hits."""
    rng = np.random.default_rng(context.config.scene_seed + 1)
    context.projection_failures = []
    context.projection_trials = 0
    for _ in range(count):
        camera = random_look_at(rng, size)
        ball = Ball(rng.uniform(-1.5, 1.5, size=3), float(rng.uniform(0.1, 1.0)), (0, 0, 0))
        hits = pixels_hitting_ball(camera, ball.center, ball.radius)
        region = project_ball(camera, ball)
        context.projection_trials += 1
        if region is None:
            if hits:
                context.projection_failures.append(f"None returned but {len(hits)} pixels hit")
            continue
        if region.covers_all:
            continue
        members = {
            (int(i % camera.width), int(i // camera.width)) for i in region.member_pixels(camera)
        }
        missed = hits - members
        extra = members - hits
        if missed:
            context.projection_failures.append(f"{len(missed)} hit pixels missing from the region")
        if len(extra) > max(1, int(np.ceil(0.05 * len(hits)))):
            context.projection_failures.append(f"{len(extra)} false positives for {len(hits)} hits")


@then("no projected region misses a pixel whose ray hits the ball")
def step_check_projection(context):
    """Verify the projection is conservative and tight."""
    if context.projection_failures:
        raise AssertionError(
            f"{len(context.projection_failures)} of {context.projection_trials} projections failed: "
            f"{context.projection_failures[0]}"
        )


@then("a ball around the camera covers the whole image")
def step_check_inside_ball(context):
    """Verify the degenerate inside-the-ball case."""
    region = project_ball(context.camera, Ball((0.1, 0.0, 0.0), 1.0, (0, 0, 0)))
    if region is None or not region.covers_all:
        raise AssertionError(f"Expected a full-image region, got {region!r}")
    assert_equal(region.member_pixels(context.camera).size, context.camera.num_pixels, "member count")


@then("a ball behind the camera projects to nothing")
def step_check_ball_behind(context):
    """Verify culling of balls behind the image plane."""
    assert_equal(project_ball(context.camera, Ball((0.0, 0.0, -10.0), 1.0, (0, 0, 0))), None, "region")


@given("a {res:d}^3 grid with only cell ({x:d}, {y:d}, {z:d}) occupied")
def step_single_cell_grid(context, res: int, x: int, y: int, z: int):
    """Build a grid holding one occupied cell."""
    bits = np.zeros((res, res, res), dtype=bool)
    bits[x, y, z] = True
    context.grid = OccupancyGrid((res, res, res), bits, SceneBounds.unit_cells((res, res, res)))


@then("the ball of cell ({x:d}, {y:d}, {z:d}) is centred at ({cx:g}, {cy:g}, {cz:g}) with radius sqrt(3)/2")
def step_check_cell_ball(context, x: int, y: int, z: int, cx: float, cy: float, cz: float):
    """Verify the circumscribed ball."""
    ball = cube_to_ball((x, y, z), context.grid)
    assert_at_most(float(np.abs(ball.center - (cx, cy, cz)).max()), 1e-12, "centre error")
    assert_close(ball.radius, np.sqrt(3.0) / 2.0, 1e-12, "radius")
    assert_close(ball_radius(context.grid), ball.radius, 0.0, "grid ball radius")
    assert_equal(ball.source_cell, (x, y, z), "source cell")


@then("asking for the ball of cell ({x:d}, {y:d}, {z:d}) fails")
def step_check_empty_cell_ball(context, x: int, y: int, z: int):
    """Verify balls exist only for occupied cells."""
    try:
        cube_to_ball((x, y, z), context.grid)
    except CellNotOccupiedError:
        return
    raise AssertionError(f"Cell ({x}, {y}, {z}) produced a ball")


@then("octants are ordered nearest first from ({x:g}, {y:g}, {z:g})")
def step_check_octant_order(context, x: float, y: float, z: float):
    """Verify the view-dependent octant order against the distances."""
    bounds = SceneBounds((0, 0, 0), (8, 8, 8))
    order = octant_order(bounds, (x, y, z))
    distances = octant_distances(bounds, (x, y, z))
    assert_equal(sorted(order), list(range(8)), "octant order")
    for a, b in zip(order, order[1:]):
        if distances[a] > distances[b] or (distances[a] == distances[b] and a > b):
            raise AssertionError(f"Octant {a} precedes {b} out of order: {order}")


@then("the octant nearest to ({x:g}, {y:g}, {z:g}) is {k:d}")
def step_check_nearest_octant(context, x: float, y: float, z: float, k: int):
    """Verify which octant is visited first."""
    assert_equal(octant_order(SceneBounds((0, 0, 0), (8, 8, 8)), (x, y, z))[0], k, "nearest octant")


@then("points on the midpoint planes belong to the upper octants")
def step_check_octant_midpoint(context):
    """Verify octant assignment at the split planes."""
    bounds = SceneBounds((0, 0, 0), (8, 8, 8))
    points = np.array([[4.0, 4.0, 4.0], [3.9, 4.0, 0.0], [0.0, 0.0, 0.0], [7.9, 0.1, 4.0]])
    assert_equal(octant_of_points(bounds, points).tolist(), [7, 2, 0, 5], "octants")
