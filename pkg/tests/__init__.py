"""rt-nerf-sim feature tests using Behave."""
