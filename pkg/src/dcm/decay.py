"""Logistics costing, storage accrual, and daily weight-decay arithmetic.

Pure functions over value types; no shared state.  All day counts use a fixed
365-day year, matching the costing conventions the engine settles under, and
every quantity is carried in double precision (15-16 significant digits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from enum import Enum

from .errors import DerivationError, DomainError, UnboundedCostError

DAYS_PER_YEAR = 365.0


@dataclass(frozen=True)
class LogisticsParams:
    """Procurement cost inputs for one commodity at one warehouse.

    ordering_cost        currency per order placed
    annual_demand        units consumed per year
    purchase_price       currency per unit
    unit_warehouse_cost  currency per unit per year of storage
    transport_cost       currency per unit moved
    transit_days         days in transit per order
    bank_rate            annual interest rate, fraction per year
    order_quantity       units per order; optional, may be solved for
    """

    ordering_cost: float
    annual_demand: float
    purchase_price: float
    unit_warehouse_cost: float
    transport_cost: float
    transit_days: float
    bank_rate: float
    order_quantity: float | None = None

    def __post_init__(self):
        for name in ("ordering_cost", "purchase_price", "unit_warehouse_cost", "transport_cost"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.annual_demand <= 0:
            raise DomainError("annual_demand must be > 0")
        if self.order_quantity is not None and self.order_quantity <= 0:
            raise DomainError("order_quantity must be > 0 when given")
        if not 0.0 <= self.bank_rate < 1.0:
            raise DomainError("bank_rate must lie in [0, 1)")
        if self.transit_days < 0:
            raise DomainError("transit_days must be >= 0")

    def carrying_rate(self) -> float:
        """Annual cost of holding one unit: warehouse charge plus interest on tied-up capital."""
        return self.unit_warehouse_cost + (self.purchase_price + self.transport_cost) * self.bank_rate


@dataclass(frozen=True)
class CifQuote:
    """Landed unit price of the anchor commodity at a warehouse."""

    price_per_unit: float
    material: str = ""
    location: str = ""
    as_of: date | None = None

    def __post_init__(self):
        if self.price_per_unit <= 0:
            raise DomainError("price_per_unit must be > 0")


@dataclass(frozen=True)
class StorageTariff:
    """Custodian charges for one unit of anchor held in one warehouse."""

    daily_warehouse_charge: float  # currency per unit per day
    outbound_transfer_charge: float = 0.0  # currency per unit, on outbound delivery
    bank_rate: float = 0.0  # annual interest rate, fraction per year

    def __post_init__(self):
        if self.daily_warehouse_charge < 0:
            raise DomainError("daily_warehouse_charge must be >= 0")
        if self.outbound_transfer_charge < 0:
            raise DomainError("outbound_transfer_charge must be >= 0")
        if self.bank_rate < 0:
            raise DomainError("bank_rate must be >= 0")


class ThetaMode(str, Enum):
    """How a daily retention factor was obtained.

    WAREHOUSE_ONLY     decay covers the warehouse charge only; interest and
                       outbound transfer are billed to the client directly.
    FULL_COST          decay covers warehouse, transfer and capital interest;
                       one day of decay pays exactly one day of carrying cost.
    INTEREST_CREDITED  like FULL_COST but the daily interest term is credited
                       back to the holder (raises theta).  Both sign
                       conventions circulate; this one does not balance daily
                       cost recovery and is kept for comparison.
    EXPLICIT           taken as given, no derivation inputs.
    """

    WAREHOUSE_ONLY = "warehouse-only"
    FULL_COST = "full-cost"
    INTEREST_CREDITED = "interest-credited"
    EXPLICIT = "explicit"


def _daily_decay_fraction(tariff: StorageTariff, cif: CifQuote, mode: ThetaMode) -> float:
    """Fraction of anchor value consumed per stored day under the given mode.

    Computed in small-magnitude space so that theta = 1 - fraction keeps the
    fraction's full precision through the single final subtraction.
    """
    charge_ratio = tariff.daily_warehouse_charge / cif.price_per_unit
    transfer_ratio = tariff.outbound_transfer_charge / cif.price_per_unit
    daily_interest = tariff.bank_rate / DAYS_PER_YEAR
    if mode is ThetaMode.WAREHOUSE_ONLY:
        return charge_ratio
    if mode is ThetaMode.FULL_COST:
        return charge_ratio + transfer_ratio + daily_interest
    if mode is ThetaMode.INTEREST_CREDITED:
        return charge_ratio + transfer_ratio - daily_interest
    raise DomainError("explicit mode carries no derivation inputs")


@dataclass(frozen=True)
class AttenuationSpec:
    """A daily retention factor theta in (0, 1) with its provenance.

    For derived modes the tariff and cif inputs are retained so the value can
    be audited against its own derivation.
    """

    theta_daily: float
    mode: ThetaMode = ThetaMode.EXPLICIT
    tariff: StorageTariff | None = None
    cif: CifQuote | None = None

    def __post_init__(self):
        if not 0.0 < self.theta_daily < 1.0:
            raise DerivationError(
                f"theta_daily {self.theta_daily:.6f} outside the open interval (0, 1)"
            )
        if self.mode is not ThetaMode.EXPLICIT:
            if self.tariff is None or self.cif is None:
                raise DomainError(f"mode {self.mode.value} requires tariff and cif inputs")
            rederived = 1.0 - _daily_decay_fraction(self.tariff, self.cif, self.mode)
            if not math.isclose(self.theta_daily, rederived, rel_tol=1e-12):
                raise DomainError(
                    f"theta_daily {self.theta_daily!r} disagrees with its derivation "
                    f"inputs (recomputed {rederived!r})"
                )


def total_logistics_cost(params: LogisticsParams, order_quantity: float) -> float:
    """Annual cost of ordering, buying, carrying and moving at lot size ``order_quantity``.

    Terms: order placement, purchase, average-inventory carrying, transport,
    and interest on capital in transit.
    """
    if order_quantity <= 0:
        raise DomainError("order_quantity must be > 0")
    p = params
    return (
        p.ordering_cost * p.annual_demand / order_quantity
        + p.purchase_price * p.annual_demand
        + order_quantity / 2.0 * p.carrying_rate()
        + p.transport_cost * p.annual_demand
        + p.bank_rate * p.purchase_price * p.annual_demand * p.transit_days / DAYS_PER_YEAR
    )


def optimal_order_quantity(params: LogisticsParams) -> float:
    """Lot size minimizing total_logistics_cost: sqrt(2AD / carrying rate).

    Only the order-placement and carrying terms depend on the lot size, so the
    minimizer balances those two.
    """
    if params.ordering_cost <= 0:
        raise DomainError("ordering_cost must be > 0 to trade off against carrying cost")
    carrying = params.carrying_rate()
    if carrying <= 0:
        raise UnboundedCostError(
            "carrying rate is zero: cost decreases in the lot size without bound"
        )
    return math.sqrt(2.0 * params.ordering_cost * params.annual_demand / carrying)


def cif_price(
    params: LogisticsParams,
    *,
    material: str = "",
    location: str = "",
    as_of: date | None = None,
) -> CifQuote:
    """Landed unit price: prorated ordering cost + purchase + transport + in-transit interest."""
    p = params
    if p.order_quantity is None:
        raise DomainError("order_quantity is required to prorate the ordering cost")
    price = (
        p.ordering_cost / p.order_quantity
        + p.purchase_price
        + p.transport_cost
        + p.transit_days * p.bank_rate * p.purchase_price / DAYS_PER_YEAR
    )
    return CifQuote(price_per_unit=price, material=material, location=location, as_of=as_of)


def accrued_storage_cost(tariff: StorageTariff, delta_t: float) -> float:
    """Warehouse charge accrued on one unit over ``delta_t`` days."""
    if delta_t < 0:
        raise DomainError("delta_t must be >= 0")
    return tariff.daily_warehouse_charge * delta_t


def accrued_capital_interest(cif: CifQuote, bank_rate: float, delta_t: float) -> float:
    """Interest on the capital one stored unit ties up over ``delta_t`` days."""
    if delta_t < 0:
        raise DomainError("delta_t must be >= 0")
    return delta_t / DAYS_PER_YEAR * cif.price_per_unit * bank_rate


def storage_increment(
    cif: CifQuote,
    tariff: StorageTariff,
    delta_t: float,
    include_transfer: bool = False,
) -> float:
    """Cost added on top of the landed price after ``delta_t`` stored days."""
    increment = accrued_storage_cost(tariff, delta_t) + accrued_capital_interest(
        cif, tariff.bank_rate, delta_t
    )
    if include_transfer:
        increment += tariff.outbound_transfer_charge
    return increment


def price_after_storage(
    cif: CifQuote,
    tariff: StorageTariff,
    delta_t: float,
    include_transfer: bool = False,
) -> float:
    """Unit price after storage: landed price plus the accrued increment."""
    return cif.price_per_unit + storage_increment(cif, tariff, delta_t, include_transfer)


def attenuation_coefficient(
    tariff: StorageTariff, cif: CifQuote, mode: ThetaMode
) -> AttenuationSpec:
    """Daily retention factor theta such that the weight shed per day pays the custodian.

    WAREHOUSE_ONLY:    theta = 1 - warehouse/price
    FULL_COST:         theta = 1 - rate/365 - (warehouse + transfer)/price
    INTEREST_CREDITED: theta = 1 + rate/365 - (warehouse + transfer)/price

    Raises DerivationError when the result leaves (0, 1) - tariffs too high
    relative to the anchor value, or a rate pathology (INTEREST_CREDITED with
    interest outweighing the charges pushes theta above 1).
    """
    if mode is ThetaMode.EXPLICIT:
        raise DomainError("explicit mode carries no derivation inputs")
    fraction = _daily_decay_fraction(tariff, cif, mode)
    theta = 1.0 - fraction
    if not 0.0 < theta < 1.0:
        raise DerivationError(
            f"derived theta {theta:.6f} outside (0, 1): tariffs too high relative "
            f"to anchor value, or rate pathology (mode {mode.value})"
        )
    return AttenuationSpec(theta_daily=theta, mode=mode, tariff=tariff, cif=cif)


def residual_weight(
    face_weight: float, theta: AttenuationSpec | float, delta_t: int
) -> float:
    """Weight a certificate commands ``delta_t`` days after issuance: face x theta^dt.

    Geometric daily decay, evaluated as exp(dt * ln theta) to hold 15-16
    significant digits across decade-scale horizons.
    """
    if face_weight <= 0:
        raise DomainError("face_weight must be > 0")
    if isinstance(delta_t, float) and not delta_t.is_integer():
        raise DomainError("delta_t must be a whole number of days")
    if delta_t < 0:
        raise DomainError("delta_t must be >= 0")
    if isinstance(theta, AttenuationSpec):
        daily = theta.theta_daily
    else:
        daily = float(theta)
        if not 0.0 < daily < 1.0:
            raise DomainError("theta must lie in the open interval (0, 1)")
    return face_weight * math.exp(delta_t * math.log(daily))
