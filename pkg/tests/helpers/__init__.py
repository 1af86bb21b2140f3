"""Test helpers for the rt-nerf-sim feature suite."""

from .assertions import (
    assert_arrays_identical,
    assert_at_least,
    assert_at_most,
    assert_between,
    assert_close,
    assert_equal,
    assert_exit_code,
    assert_json_file_matches_schema,
    assert_matches_schema,
)
from .fixtures import (
    cached_occluder,
    cached_scene,
    constant_scene,
    front_camera,
    random_decomposition,
    random_factors,
    random_look_at,
    sparse_matrix,
)

__all__ = [
    "assert_arrays_identical",
    "assert_at_least",
    "assert_at_most",
    "assert_between",
    "assert_close",
    "assert_equal",
    "assert_exit_code",
    "assert_json_file_matches_schema",
    "assert_matches_schema",
    "cached_occluder",
    "cached_scene",
    "constant_scene",
    "front_camera",
    "random_decomposition",
    "random_factors",
    "random_look_at",
    "sparse_matrix",
]
