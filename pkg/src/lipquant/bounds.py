"""Closed-form error and budget bounds for the adaptive quantile algorithms.

All quantities are functions of the problem constants: dimension d,
Lipschitz constant L, level-set constant M (volume of the band
{|f - q| <= delta} is at most M*delta) and the quantile level alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ProblemConstants:
    dim: int
    lipschitz: float
    level_set: float
    alpha: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.lipschitz <= 0:
            raise ValueError(f"lipschitz must be positive, got {self.lipschitz}")
        if self.level_set <= 0:
            raise ValueError(f"level_set must be positive, got {self.level_set}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")


def bracket_halfwidth(lipschitz: float, level: int, dim: int) -> float:
    """Deterministic bracket half-width L * sqrt(d) / (2 * 3^k)."""
    return lipschitz * math.sqrt(dim) / 2.0 * 3.0 ** (-level)


def known_bound(c: ProblemConstants, budget: int) -> float:
    """Worst-case error of the known-constant algorithm at budget N."""
    d, L, M = c.dim, c.lipschitz, c.level_set
    if d == 1:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        big_c = 0.5 * L * 3.0 ** (1.0 + 1.0 / (4.0 * M * L))
        rho = 3.0 ** (-1.0 / (4.0 * M * L))
        return big_c * rho ** budget
    if budget <= 1:
        raise ValueError("budget must be > 1 for d > 1")
    big_c = 1.5 * L * math.sqrt(d) * (3.0 ** d * M * L * math.sqrt(d)) ** (1.0 / (d - 1))
    return big_c * (budget - 1) ** (-1.0 / (d - 1))


def unknown_bound(c: ProblemConstants, budget: int) -> float:
    """Worst-case error of the unknown-constant algorithm at budget N.

    Requires L >= 1; for d > 1 the budget must exceed the start-up cost
    (pi^2/3) * (log3(L) + 2)^2.
    """
    d, L, M = c.dim, c.lipschitz, c.level_set
    if L < 1.0:
        raise ValueError(f"unknown-constant bound needs lipschitz >= 1, got {L}")
    g = math.log(L) / math.log(3.0) + 2.0
    if d == 1:
        big_c = 18.0 * L * 3.0 ** (1.0 / (2.0 * M * L))
        rho = 3.0 ** (-1.0 / (g ** 2 * 2.0 * math.pi ** 2 * M * L))
        return big_c * rho ** budget
    startup = math.pi ** 2 / 3.0 * g ** 2
    if budget <= startup:
        raise ValueError(f"budget must exceed {startup:.3f} for d > 1")
    big_c = (
        18.0
        * L
        * math.sqrt(d)
        * (3.0 ** d * M * L * math.sqrt(d) * math.pi ** 2 / 2.0 * g ** 2) ** (1.0 / (d - 1))
    )
    return big_c * (budget - startup) ** (-1.0 / (d - 1))


def calls_upper(c: ProblemConstants, level: int) -> float:
    """Upper bound on the calls needed to complete subdivision level k."""
    if level < 0:
        raise ValueError("level must be >= 0")
    d, L, M = c.dim, c.lipschitz, c.level_set
    if d == 1:
        return 1.0 + 4.0 * M * L * level
    return 1.0 + 3.0 ** d * 2.0 * M * L * math.sqrt(d) * (
        3.0 ** (level * (d - 1)) - 1.0
    ) / (3.0 ** (d - 1) - 1.0)


def level_lower(c: ProblemConstants, budget: int) -> int:
    """Lower bound on the level reached with budget N."""
    d, L, M = c.dim, c.lipschitz, c.level_set
    if d == 1:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        return int(math.floor((budget - 1) / (4.0 * M * L)))
    if budget <= 1:
        raise ValueError("budget must be > 1 for d > 1")
    return int(
        math.floor(
            (math.log(budget - 1) - math.log(3.0 ** d * M * L * math.sqrt(d)))
            / ((d - 1) * math.log(3.0))
        )
    )
