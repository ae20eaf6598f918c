"""Relaxation fluctuations of quantum and random-matrix systems."""

from ._relaxometer import *  # noqa: F401,F403
from ._relaxometer import __version__

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
