"""Limit-cycle gait continuum, switching analysis and speed supervisor."""

from ._core import *  # noqa: F401,F403
from ._core import HzdError

__all__ = [name for name in dir() if not name.startswith("_")]
