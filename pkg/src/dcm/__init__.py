"""Decayed commodity money: issuance, pricing, settlement, and a replayable ledger."""

from .decay import (
    AttenuationSpec,
    CifQuote,
    LogisticsParams,
    StorageTariff,
    ThetaMode,
    accrued_capital_interest,
    accrued_storage_cost,
    attenuation_coefficient,
    cif_price,
    optimal_order_quantity,
    price_after_storage,
    residual_weight,
    storage_increment,
    total_logistics_cost,
)
from .errors import (
    ConfigError,
    DCMError,
    DerivationError,
    DomainError,
    ExpiryError,
    IssuanceError,
    LedgerIntegrityError,
    LotSizeError,
    NoQuoteError,
    ParseError,
    ScenarioStepError,
    SettlementError,
    StateError,
    UnboundedCostError,
    ValidationError,
)
from .ledger import EventKind, Ledger, LedgerEvent, load_ledger, read_events, verify_lines
from .market import PriceSeries, RateSchedule, load_rates, load_series, quote_at, rate_at, serialize
from .registry import (
    BuybackResult,
    CertStatus,
    Certificate,
    DeliveryResult,
    DeliveryRules,
    ExpiryResult,
    MarketQuote,
    QuoteResult,
    Registry,
    RegistrySnapshot,
    export_certificate,
    import_certificate,
    replay,
)
from .rounding import RoundingProfile, fmt, quantize, quantize_to_float
from .scenario import (
    ScenarioConfig,
    ScenarioReport,
    ScriptStep,
    WealthProjection,
    bundled_scenario_path,
    load_scenario,
    run_scenario,
    wealth_projection,
)

__version__ = "0.1.0"

__all__ = [
    "AttenuationSpec",
    "BuybackResult",
    "CertStatus",
    "Certificate",
    "CifQuote",
    "ConfigError",
    "DCMError",
    "DeliveryResult",
    "DeliveryRules",
    "DerivationError",
    "DomainError",
    "EventKind",
    "ExpiryError",
    "ExpiryResult",
    "IssuanceError",
    "Ledger",
    "LedgerEvent",
    "LedgerIntegrityError",
    "LogisticsParams",
    "LotSizeError",
    "MarketQuote",
    "NoQuoteError",
    "ParseError",
    "PriceSeries",
    "QuoteResult",
    "RateSchedule",
    "Registry",
    "RegistrySnapshot",
    "RoundingProfile",
    "ScenarioConfig",
    "ScenarioReport",
    "ScenarioStepError",
    "ScriptStep",
    "SettlementError",
    "StateError",
    "StorageTariff",
    "ThetaMode",
    "UnboundedCostError",
    "ValidationError",
    "WealthProjection",
    "accrued_capital_interest",
    "accrued_storage_cost",
    "attenuation_coefficient",
    "bundled_scenario_path",
    "cif_price",
    "export_certificate",
    "fmt",
    "import_certificate",
    "load_ledger",
    "load_rates",
    "load_scenario",
    "load_series",
    "optimal_order_quantity",
    "price_after_storage",
    "quantize",
    "quantize_to_float",
    "quote_at",
    "rate_at",
    "read_events",
    "replay",
    "residual_weight",
    "run_scenario",
    "serialize",
    "storage_increment",
    "total_logistics_cost",
    "verify_lines",
    "wealth_projection",
]
