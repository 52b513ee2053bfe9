"""Newton iterations for time-dependent mean field games on the torus."""

from __future__ import annotations

__version__ = "0.1.0"
