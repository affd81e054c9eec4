"""Shared numerical constants.

All downstream formulas are expressed through these values; keeping them in
one frozen container makes the provenance of every constant auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: Euler-Mascheroni constant.
EULER_C = 0.5772156649015328606

#: log(2*pi).
LN_TWO_PI = math.log(2.0 * math.pi)

TWO_PI = 2.0 * math.pi

#: Growth constant pi*sqrt(2/3) in the leading-order partition estimate.
HR_K = math.pi * math.sqrt(2.0 / 3.0)

#: Inversion floor: the defining map V -> V ln V + (EULER_C - LN_TWO_PI) V is
#: strictly increasing for V > 2*pi*exp(-EULER_C), so solutions above this
#: value are unique.
V_FLOOR = TWO_PI * math.exp(-EULER_C)

#: Smallest ordinate at which the ladder inversion is offered.
T0_FLOOR = 100.0

#: Maximum iteration depth for the ladder; each step walks down roughly
#: (1 - EULER_C) * t / ln t, so 12 steps keep desk-scale ordinates well above
#: the floor.
MAX_ITER_DEPTH = 12


@dataclass(frozen=True)
class Constants:
    """Constant pack handed to code that wants explicit dependencies."""

    euler_c: float = EULER_C
    ln_two_pi: float = LN_TWO_PI
    c0: float = 0.0
    K: float = HR_K

    def __post_init__(self):
        if not self.euler_c < 0.58:
            raise ValueError("euler_c must stay below 0.58")


DEFAULT_CONSTANTS = Constants()
