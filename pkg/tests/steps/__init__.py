"""Step definitions for the rt-nerf-sim feature suite."""
