"""Log-domain representation of complex products.

A product of many factors whose moduli span hundreds of orders of magnitude
cannot be carried as a complex double. Instead each factor contributes the
log of its modulus and its phase; the product is then
``exp(log_modulus) * exp(i*phase)``, reconstructed only after subtracting a
caller-chosen rescale offset that keeps the exponent representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["LogComplex", "LogComplexAccumulator"]


def _wrap(phase: float) -> float:
    # wrap into (-pi, pi]; cheap and exact enough for |phase| << 1e12
    w = math.remainder(phase, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class LogComplex:
    """A complex value stored as (log modulus, phase in radians)."""

    log_modulus: float
    phase: float

    def wrapped_phase(self) -> float:
        return _wrap(self.phase)

    def to_complex(self, rescale_offset: float = 0.0) -> complex:
        """Value divided by exp(rescale_offset); overflows if the offset is
        too small for the stored magnitude."""
        amp = math.exp(self.log_modulus - rescale_offset)
        return complex(amp * math.cos(self.phase), amp * math.sin(self.phase))


class LogComplexAccumulator:
    """Accumulates a product of complex factors in log domain.

    add() may take either (log_modulus, phase) of a factor or a nonzero
    complex number. The running product never over/underflows because only
    logs and phases are summed.
    """

    __slots__ = ("log_modulus", "phase", "factors")

    def __init__(self) -> None:
        self.log_modulus = 0.0
        self.phase = 0.0
        self.factors = 0

    def add(self, log_modulus: float, phase: float) -> None:
        if math.isnan(log_modulus) or (math.isinf(log_modulus) and log_modulus > 0):
            raise OverflowError(
                f"factor {self.factors} has non-finite log modulus {log_modulus}"
            )
        self.log_modulus += log_modulus
        self.phase += phase
        self.factors += 1

    def add_complex(self, value: complex) -> None:
        r = abs(value)
        if r == 0.0:
            raise OverflowError(f"factor {self.factors} is exactly zero")
        self.add(math.log(r), math.atan2(value.imag, value.real))

    def add_power(self, base: complex, exponent: float) -> None:
        """Multiply by base**exponent for a nonzero complex base."""
        r = abs(base)
        if r == 0.0:
            raise OverflowError(f"factor {self.factors} is exactly zero")
        self.add(exponent * math.log(r), exponent * math.atan2(base.imag, base.real))

    def value(self) -> LogComplex:
        return LogComplex(self.log_modulus, self.phase)
