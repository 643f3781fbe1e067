"""Exact decreasing rearrangements and BMO seminorms on finite and 1-D spaces."""
from __future__ import annotations

from ._numbers import INF
from .errors import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from .metric import *  # noqa: F401,F403
from .oscillation import *  # noqa: F401,F403
from .rearrange import *  # noqa: F401,F403
from .transforms import *  # noqa: F401,F403

__version__ = "0.1.0"
