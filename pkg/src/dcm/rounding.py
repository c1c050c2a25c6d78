"""Half-even rounding of binary floats for display and settlement dockets.

Quantities are computed in double precision throughout the engine and only
quantized where a number is printed or settled.  Quantization goes through the
shortest round-tripping decimal form of the float, then rounds half-even.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

from .errors import DomainError


def quantize(value: float, places: int) -> Decimal:
    """Round ``value`` half-even to ``places`` decimal digits."""
    if places < 0:
        raise DomainError("places must be >= 0")
    exponent = Decimal(1).scaleb(-places)
    return Decimal(repr(float(value))).quantize(exponent, rounding=ROUND_HALF_EVEN)


def quantize_to_float(value: float, places: int) -> float:
    return float(quantize(value, places))


def fmt(value: float, places: int) -> str:
    """Fixed-point string with exactly ``places`` decimals (half-even)."""
    return str(quantize(value, places))


@dataclass(frozen=True)
class RoundingProfile:
    """Display precision for reports.

    ``weight_places`` doubles as the settlement-docket precision: cash legs
    settle on weights quantized to this many decimals.
    """

    weight_places: int = 4
    money_places: int = 4

    def __post_init__(self):
        if self.weight_places < 0 or self.money_places < 0:
            raise DomainError("rounding places must be >= 0")

    def weight(self, value: float) -> str:
        return fmt(value, self.weight_places)

    def money(self, value: float) -> str:
        return fmt(value, self.money_places)
