"""Utility package for skinlink."""

__all__ = []
