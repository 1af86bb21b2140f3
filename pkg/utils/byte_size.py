from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class ByteSize:
    """
    A byte quantity that can be expressed in bytes, megabytes or gigabytes.

    Units are decimal (1 MB = 1,000,000 bytes), matching how SRAM sizes and
    DRAM bandwidths are quoted on accelerator datasheets.

    Examples:
        >>> sram = ByteSize.from_megabytes(3.5)
        >>> sram.bytes
        3500000
        >>> ByteSize.from_gigabytes(17).format_bytes()
        '17000000000 B (17.000 GB)'
    """

    _bytes: int

    BYTES_PER_MB = 1_000_000
    BYTES_PER_GB = 1_000_000_000

    def __post_init__(self) -> None:
        if self._bytes < 0:
            raise ValueError(f"byte size must be non-negative, got {self._bytes}")

    @classmethod
    def from_bytes(cls, amount: int) -> "ByteSize":
        """Create a size from a raw byte count."""
        return cls(_bytes=int(amount))

    @classmethod
    def from_megabytes(cls, amount: float) -> "ByteSize":
        """Create a size from a decimal megabyte value."""
        return cls(_bytes=round(amount * cls.BYTES_PER_MB))

    @classmethod
    def from_gigabytes(cls, amount: float) -> "ByteSize":
        """Create a size from a decimal gigabyte value."""
        return cls(_bytes=round(amount * cls.BYTES_PER_GB))

    @property
    def bytes(self) -> int:
        """Get the size in bytes."""
        return self._bytes

    @property
    def megabytes(self) -> float:
        """Get the size in decimal megabytes."""
        return self._bytes / self.BYTES_PER_MB

    @property
    def gigabytes(self) -> float:
        """Get the size in decimal gigabytes."""
        return self._bytes / self.BYTES_PER_GB

    def format_human(self) -> str:
        """
        Format with the largest unit that keeps the value at or above one.

        Returns:
            Formatted string like "3.500 MB" or "812 B"
        """
        if self._bytes >= self.BYTES_PER_GB:
            return f"{self.gigabytes:.3f} GB"
        if self._bytes >= self.BYTES_PER_MB:
            return f"{self.megabytes:.3f} MB"
        if self._bytes >= 1000:
            return f"{self._bytes / 1000:.3f} kB"
        return f"{self._bytes} B"

    def format_bytes(self, show_human: bool = True) -> str:
        """
        Format as bytes with an optional human unit in parentheses.

        Args:
            show_human: If True, append the human-scaled value

        Returns:
            Formatted string like "2560 B (2.560 kB)"
        """
        if show_human and self._bytes >= 1000:
            return f"{self._bytes} B ({self.format_human()})"
        return f"{self._bytes} B"

    def __str__(self) -> str:
        return self.format_human()

    def __repr__(self) -> str:
        return f"ByteSize(bytes={self._bytes})"

    def __add__(self, other: "ByteSize") -> "ByteSize":
        """Add two sizes."""
        return ByteSize.from_bytes(self._bytes + other._bytes)

    def __sub__(self, other: "ByteSize") -> "ByteSize":
        """Subtract two sizes; the result may not go negative."""
        return ByteSize.from_bytes(self._bytes - other._bytes)

    def ratio(self, other: "ByteSize") -> float:
        """Return self / other, or infinity when other is zero."""
        if other._bytes == 0:
            return float("inf")
        return self._bytes / other._bytes
