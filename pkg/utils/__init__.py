"""Utility value types shared across the simulator."""

from .byte_size import ByteSize

__all__ = ["ByteSize"]
