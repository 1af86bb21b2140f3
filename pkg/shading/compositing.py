"""Volume compositing with early-ray termination."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_TERMINATION_THRESHOLD = 1e-4


class UnsortedSamplesError(ValueError):
    """Samples handed to compositing are not ascending in t."""


class TransmittanceConvention(Enum):
    """
    Which transmittance weights each sample.

    ``PRINTED`` uses the transmittance after the sample itself
    (``T_k = exp(-sum_{j<=k} sigma_j delta_j)``); ``CONVENTIONAL`` uses the
    transmittance in front of it (``j < k``).
    """

    PRINTED = "printed"
    CONVENTIONAL = "conventional"


@dataclass(frozen=True)
class ShadedSample:
    """One shaded point along a ray."""

    t: float
    delta: float
    sigma: float
    color: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.delta > 0.0:
            raise ValueError(f"segment length must be positive, got {self.delta}")
        if not self.sigma >= 0.0:
            raise ValueError(f"density must be non-negative, got {self.sigma}")
        color = tuple(float(c) for c in self.color)
        if any(not 0.0 <= c <= 1.0 for c in color):
            raise ValueError(f"color channels must lie in [0, 1], got {color}")
        object.__setattr__(self, "color", color)


@dataclass
class CompositeState:
    """Running per-ray compositing state."""

    transmittance: float = 1.0
    color: np.ndarray | None = None
    terminated: bool = False
    samples_shaded: int = 0


class CompositeBatch:
    """
    Per-pixel compositing state for a whole image, folded one sample slot at a time.

    Optical depth accumulates per pixel and transmittance is its exponential,
    so the same samples folded in any batching give identical results.
    """

    def __init__(
        self,
        num_pixels: int,
        channels: int,
        threshold: float = DEFAULT_TERMINATION_THRESHOLD,
        convention: TransmittanceConvention = TransmittanceConvention.PRINTED,
    ) -> None:
        if not 0.0 <= threshold < 1.0:
            raise ValueError(f"termination threshold must lie in [0, 1), got {threshold}")
        self.threshold = threshold
        self.convention = convention
        self.optical_depth = np.zeros(num_pixels)
        self.transmittance = np.ones(num_pixels)
        self.color = np.zeros((num_pixels, channels))
        self.terminated = np.zeros(num_pixels, dtype=bool)
        self.shaded = np.zeros(num_pixels, dtype=np.int64)

    @property
    def active(self) -> np.ndarray:
        return ~self.terminated

    def fold(self, pixels: np.ndarray, sigma: np.ndarray, delta: np.ndarray, colors: np.ndarray) -> None:
        """
        Fold one sample into each listed pixel; pixels must be unique and active.
        """
        prev_t = self.transmittance[pixels]
        depth = sigma * delta
        new_depth = self.optical_depth[pixels] + depth
        new_t = np.exp(-new_depth)
        alpha = -np.expm1(-depth)
        if self.convention is TransmittanceConvention.PRINTED:
            weight = new_t * alpha
        else:
            weight = prev_t * alpha
        self.color[pixels] += weight[:, None] * colors
        self.optical_depth[pixels] = new_depth
        self.transmittance[pixels] = new_t
        self.shaded[pixels] += 1
        self.terminated[pixels] = new_t < self.threshold

    def state(self, pixel: int) -> CompositeState:
        return CompositeState(
            transmittance=float(self.transmittance[pixel]),
            color=self.color[pixel].copy(),
            terminated=bool(self.terminated[pixel]),
            samples_shaded=int(self.shaded[pixel]),
        )


@dataclass(frozen=True)
class CompositeResult:
    color: np.ndarray
    samples_shaded: int
    transmittance: float


def composite(
    samples: Sequence[ShadedSample],
    threshold: float = DEFAULT_TERMINATION_THRESHOLD,
    convention: TransmittanceConvention = TransmittanceConvention.PRINTED,
    channels: int | None = None,
) -> CompositeResult:
    """
    Composite an ordered list of shaded samples along one ray.

    Args:
        samples: Samples ascending in ``t``.
        threshold: Folding stops for good once transmittance drops below this.
        convention: Transmittance convention for the sample weights.
        channels: Color width for an empty list; inferred from samples otherwise.

    Returns:
        Accumulated color, number of folded samples and final transmittance.

    Raises:
        UnsortedSamplesError: If ``t`` decreases anywhere in the list.
    """
    for k in range(1, len(samples)):
        if samples[k].t < samples[k - 1].t:
            raise UnsortedSamplesError(
                f"sample {k} at t={samples[k].t} precedes sample {k - 1} at t={samples[k - 1].t}"
            )
    if channels is None:
        channels = len(samples[0].color) if samples else 3
    batch = CompositeBatch(1, channels, threshold, convention)
    pixel = np.zeros(1, dtype=np.int64)
    for sample in samples:
        if batch.terminated[0]:
            break
        batch.fold(
            pixel,
            np.array([sample.sigma]),
            np.array([sample.delta]),
            np.array([sample.color], dtype=np.float64),
        )
    return CompositeResult(batch.color[0].copy(), int(batch.shaded[0]), float(batch.transmittance[0]))
