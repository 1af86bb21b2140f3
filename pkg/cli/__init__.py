"""Command-line surface: scene generation, rendering, codec statistics and simulation."""

__version__ = "0.1.0"

from .manifest import RunManifest, manifest_path, sha256_file  # noqa: E402
from .commands import (  # noqa: E402
    UsageError,
    cmd_codec_stats,
    cmd_compare,
    cmd_gen_scene,
    cmd_render,
    cmd_simulate,
)

__all__ = [
    "RunManifest",
    "UsageError",
    "__version__",
    "cmd_codec_stats",
    "cmd_compare",
    "cmd_gen_scene",
    "cmd_render",
    "cmd_simulate",
    "manifest_path",
    "sha256_file",
]
