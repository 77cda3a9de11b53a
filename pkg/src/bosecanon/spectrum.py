"""Level structure of the 3D isotropic harmonic trap.

Energies are measured in units of the level spacing unless a spacing is
given explicitly. Level m carries energy ``ground_offset + m*level_spacing``
and degeneracy ``(m+1)(m+2)/2`` (the number of ways to split m quanta among
three Cartesian axes). The cumulative number of one-particle states up to
level M is ``(M+1)(M+2)(M+3)/6``.

The condensation temperature for N particles follows from equating N to the
continuum excited-state capacity ``zeta(3) * (T/spacing)**3``, giving
``Tc = N**(1/3) * zeta(3)**(-1/3) * spacing``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Apery's constant zeta(3), full double precision.
ZETA3 = 1.2020569031595942854

__all__ = [
    "ZETA3",
    "DomainError",
    "TrapSpectrum",
    "EnsembleParams",
    "degeneracy",
    "cumulative_states",
    "critical_temperature",
    "weighted_geometric_tail",
    "weighted_geometric_partial",
]


class DomainError(ValueError):
    """Raised when an input lies outside the physical domain of a formula."""


def degeneracy(m: int) -> int:
    """Number of one-particle states in level m: (m+1)(m+2)/2."""
    if m < 0:
        raise DomainError(f"level index must be nonnegative, got {m}")
    return (m + 1) * (m + 2) // 2


def cumulative_states(m_max: int) -> int:
    """Total one-particle states in levels 0..m_max: (M+1)(M+2)(M+3)/6."""
    if m_max < 0:
        raise DomainError(f"level index must be nonnegative, got {m_max}")
    return (m_max + 1) * (m_max + 2) * (m_max + 3) // 6


@dataclass(frozen=True)
class TrapSpectrum:
    """Truncated trap spectrum: spacing, ground offset, top level index.

    ``max_level`` may be None for objects that only need spacing and offset;
    operations that materialise level arrays then require an explicit cap.
    """

    level_spacing: float = 1.0
    ground_offset: float = 0.0
    max_level: int | None = None

    def __post_init__(self) -> None:
        if not self.level_spacing > 0:
            raise DomainError(f"level_spacing must be positive, got {self.level_spacing}")
        if self.ground_offset < 0:
            raise DomainError(f"ground_offset must be nonnegative, got {self.ground_offset}")
        if self.max_level is not None and self.max_level < 0:
            raise DomainError(f"max_level must be nonnegative, got {self.max_level}")

    def energy(self, m: int) -> float:
        """Energy of level m, ``ground_offset + m*level_spacing``."""
        if m < 0 or (self.max_level is not None and m > self.max_level):
            raise DomainError(f"level index {m} outside [0, {self.max_level}]")
        return self.ground_offset + m * self.level_spacing

    def resolved_max_level(self, m_max: int | None = None) -> int:
        """Effective top level: requests beyond a finite cap clamp to it."""
        mm = self.max_level if m_max is None else m_max
        if mm is None:
            raise DomainError("spectrum has no max_level and none was given")
        if self.max_level is not None:
            mm = min(int(mm), self.max_level)
        return int(mm)

    def energies(self, m_max: int | None = None) -> np.ndarray:
        mm = self.resolved_max_level(m_max)
        return self.ground_offset + np.arange(mm + 1, dtype=np.float64) * self.level_spacing

    def degeneracies(self, m_max: int | None = None) -> np.ndarray:
        mm = self.resolved_max_level(m_max)
        m = np.arange(mm + 1, dtype=np.float64)
        return (m + 1.0) * (m + 2.0) / 2.0

    def with_ground_offset(self, ground_offset: float) -> "TrapSpectrum":
        return TrapSpectrum(self.level_spacing, ground_offset, self.max_level)


@dataclass(frozen=True)
class EnsembleParams:
    """Particle number and temperature for one ensemble evaluation."""

    n: int
    t: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"particle number must be >= 1, got {self.n}")
        if not self.t > 0:
            raise DomainError(f"temperature must be positive, got {self.t}")

    def t_over_tc(self, spectrum: TrapSpectrum) -> float:
        return self.t / critical_temperature(spectrum, self.n)


def critical_temperature(spectrum: TrapSpectrum, n: int) -> float:
    """Condensation temperature ``N^(1/3) zeta(3)^(-1/3) * spacing``."""
    if n < 1:
        raise DomainError(f"particle number must be >= 1, got {n}")
    return float(n / ZETA3) ** (1.0 / 3.0) * spectrum.level_spacing


def weighted_geometric_tail(x: float, m_max: int) -> float:
    """Closed form of ``sum_{m>m_max} (m+1)(m+2)/2 * x**m`` for 0 <= x < 1.

    Follows from shifting the index in the full sum ``(1-x)**-3`` by
    ``a = m_max+1``:  x**a * [ (1-x)**-3 + a*x*(1-x)**-2 + a(a+3)/2*(1-x)**-1 ].
    """
    if not 0.0 <= x < 1.0:
        raise DomainError(f"geometric argument must lie in [0, 1), got {x}")
    if x == 0.0:
        return 0.0
    a = m_max + 1.0
    om = 1.0 - x
    lead = x ** (m_max + 1)  # underflows to 0 harmlessly for large m_max
    return lead * (1.0 / om**3 + a * x / om**2 + a * (a + 3.0) / (2.0 * om))


def weighted_geometric_partial(x: float, m_max: int) -> float:
    """Closed form of ``sum_{m=0}^{m_max} (m+1)(m+2)/2 * x**m``."""
    if not 0.0 <= x < 1.0:
        raise DomainError(f"geometric argument must lie in [0, 1), got {x}")
    return 1.0 / (1.0 - x) ** 3 - weighted_geometric_tail(x, m_max)
