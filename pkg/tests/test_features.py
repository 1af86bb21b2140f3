"""Collect the behave feature suite under pytest, one test per feature file."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).parent.parent
FEATURES = sorted((PROJECT_ROOT / "tests" / "features").glob("*.feature"))


@pytest.mark.parametrize("feature", FEATURES, ids=lambda p: p.stem)
def test_feature(feature: Path) -> None:
    result = subprocess.run(
        [sys.executable, "-m", "behave", "--no-capture", "-f", "plain",
         str(feature.relative_to(PROJECT_ROOT))],
        cwd=PROJECT_ROOT,
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stdout + result.stderr
