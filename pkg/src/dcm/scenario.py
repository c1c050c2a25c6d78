"""Scripted end-to-end runs against a fresh registry, plus long-horizon projection.

A scenario file (YAML) declares the issuer's terms, optional price data, a
rounding profile, and an ordered script of (dt, action) steps.  The runner
executes the script, appending to a fresh ledger, and emits one report record
per step carrying every intermediate quantity both at full precision and in
display form.

Day counts are pinned explicitly in the script (``dt`` is days since
issuance); a step may also pin the calendar ``date`` used for the market
lookup and the ledger timestamp, because exchange-published day counts and
calendar dates do not always agree.  When ``date`` is omitted it derives as
issue_date + dt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .decay import AttenuationSpec, CifQuote, StorageTariff, ThetaMode, attenuation_coefficient, residual_weight
from .errors import ConfigError, DCMError, DomainError, ScenarioStepError
from .market import PriceSeries, RateSchedule, load_rates, load_series, quote_at
from .registry import DeliveryRules, MarketQuote, Registry
from .rounding import RoundingProfile, fmt

_ACTIONS = frozenset({"issue", "quote", "transfer", "deliver", "buyback", "expire"})


@dataclass(frozen=True)
class ScriptStep:
    dt: int
    action: str
    cert: str  # script-local alias
    date: date | None = None  # market/ledger date override
    args: dict[str, Any] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.dt < 0:
            raise ConfigError("step dt must be >= 0")
        if self.action not in _ACTIONS:
            raise ConfigError(f"unknown action {self.action!r}")
        if self.args is None:
            object.__setattr__(self, "args", {})


@dataclass(frozen=True)
class IssuerTerms:
    issuer_id: str
    material: str
    weight_unit: str
    purity: float
    denominations: tuple[float, ...]
    theta: AttenuationSpec
    rules: DeliveryRules


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    currency: str
    issue_date: date
    issuer: IssuerTerms
    script: tuple[ScriptStep, ...]
    prices: PriceSeries | None = None
    price_per_units: float = 1.0  # certificate weight units per quoted price unit
    rates: RateSchedule | None = None
    rounding: RoundingProfile = RoundingProfile()

    def __post_init__(self):
        previous = 0
        for step in self.script:
            if step.dt < previous:
                raise ConfigError("script dt values must be non-decreasing")
            previous = step.dt
        needs_prices = any(s.action in ("quote", "buyback") for s in self.script)
        if needs_prices and self.prices is None:
            raise ConfigError("script quotes or buys back but no price series is configured")


def _require(mapping: dict, key: str, context: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"{context}: missing key {key!r}")
    return mapping[key]


def _as_date(value: Any, context: str) -> date:
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"{context}: bad date {value!r}") from None


def _theta_from_config(issuer_cfg: dict) -> AttenuationSpec:
    explicit = issuer_cfg.get("theta")
    derivation = issuer_cfg.get("theta_derivation")
    if (explicit is None) == (derivation is None):
        raise ConfigError("issuer must set exactly one of 'theta' or 'theta_derivation'")
    if explicit is not None:
        return AttenuationSpec(theta_daily=float(explicit))
    mode = ThetaMode(_require(derivation, "mode", "theta_derivation"))
    tariff = StorageTariff(
        daily_warehouse_charge=float(_require(derivation, "daily_warehouse_charge", "theta_derivation")),
        outbound_transfer_charge=float(derivation.get("outbound_transfer_charge", 0.0)),
        bank_rate=float(derivation.get("bank_rate", 0.0)),
    )
    cif = CifQuote(price_per_unit=float(_require(derivation, "cif_price", "theta_derivation")))
    return attenuation_coefficient(tariff, cif, mode)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file; referenced data paths resolve relative to it."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse scenario {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"scenario {path} must be a mapping")

    issuer_cfg = _require(raw, "issuer", "scenario")
    rules_cfg = _require(issuer_cfg, "delivery_rules", "issuer")
    validity = rules_cfg.get("validity_days")
    issuer = IssuerTerms(
        issuer_id=str(_require(issuer_cfg, "id", "issuer")),
        material=str(_require(issuer_cfg, "material", "issuer")),
        weight_unit=str(issuer_cfg.get("weight_unit", "kg")),
        purity=float(issuer_cfg.get("purity", 1.0)),
        denominations=tuple(float(d) for d in _require(issuer_cfg, "denominations", "issuer")),
        theta=_theta_from_config(issuer_cfg),
        rules=DeliveryRules(
            delivery_charge_ratio=float(_require(rules_cfg, "delivery_charge_ratio", "delivery_rules")),
            withdrawal_charge_ratio=float(_require(rules_cfg, "withdrawal_charge_ratio", "delivery_rules")),
            min_delivery_weight=float(_require(rules_cfg, "min_delivery_weight", "delivery_rules")),
            delivery_location=str(rules_cfg.get("delivery_location", "")),
            validity_days=None if validity is None else int(validity),
        ),
    )

    prices = None
    per_units = 1.0
    if "prices" in raw:
        prices_cfg = raw["prices"]
        series_path = path.parent / str(_require(prices_cfg, "path", "prices"))
        if not series_path.exists():
            raise ConfigError(f"price series file not found: {series_path}")
        prices = load_series(
            series_path.read_text(encoding="utf-8"),
            material=issuer.material,
            currency=str(raw.get("currency", "")),
        )
        per_units = float(prices_cfg.get("per_units", 1.0))
        if per_units <= 0:
            raise ConfigError("prices.per_units must be > 0")

    rates = None
    if "rates" in raw:
        rates_path = path.parent / str(_require(raw["rates"], "path", "rates"))
        if not rates_path.exists():
            raise ConfigError(f"rate schedule file not found: {rates_path}")
        rates = load_rates(rates_path.read_text(encoding="utf-8"))

    rounding_cfg = raw.get("rounding", {})
    rounding = RoundingProfile(
        weight_places=int(rounding_cfg.get("weight_places", 4)),
        money_places=int(rounding_cfg.get("money_places", 4)),
    )

    steps = []
    for index, step_cfg in enumerate(raw.get("script", []) or [], start=1):
        if not isinstance(step_cfg, dict):
            raise ConfigError(f"script step {index} must be a mapping")
        known = {"dt", "action", "cert", "date"}
        args = {k: v for k, v in step_cfg.items() if k not in known}
        steps.append(
            ScriptStep(
                dt=int(_require(step_cfg, "dt", f"script step {index}")),
                action=str(_require(step_cfg, "action", f"script step {index}")),
                cert=str(_require(step_cfg, "cert", f"script step {index}")),
                date=_as_date(step_cfg["date"], f"script step {index}") if "date" in step_cfg else None,
                args=args,
            )
        )

    return ScenarioConfig(
        name=str(raw.get("name", path.stem)),
        currency=str(raw.get("currency", "")),
        issue_date=_as_date(_require(raw, "issue_date", "scenario"), "issue_date"),
        issuer=issuer,
        script=tuple(steps),
        prices=prices,
        price_per_units=per_units,
        rates=rates,
        rounding=rounding,
    )


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (``lme_copper``, ``shfe_steel``)."""
    root = resources.files("dcm") / "data"
    candidate = root / f"{name}.yaml"
    if not candidate.is_file():
        available = sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))
        raise ConfigError(f"no bundled scenario {name!r}; available: {', '.join(available)}")
    return Path(str(candidate))


@dataclass
class ScenarioReport:
    """Per-step records with exact and display-rounded fields.

    ``to_json_lines`` is the machine-readable form: one sorted-key JSON object
    per step, no wall-clock content, so identical runs are byte-identical.
    """

    scenario: str
    currency: str
    steps: list[dict]

    def to_json_lines(self) -> str:
        return "".join(
            json.dumps(step, sort_keys=True, separators=(",", ":")) + "\n" for step in self.steps
        )

    def to_text(self) -> str:
        lines = [f"scenario {self.scenario} ({self.currency or 'no currency'})"]
        for step in self.steps:
            fields = ", ".join(
                f"{key}={value}"
                for key, value in sorted(step.items())
                if key.endswith("_display") or key in ("action", "cert_id", "dt", "owner", "to_owner")
            )
            lines.append(f"  step {step['step']}: {fields}")
        lines.append(f"  ({len(self.steps)} steps)")
        return "\n".join(lines) + "\n"


def run_scenario(config: ScenarioConfig) -> tuple[ScenarioReport, Registry]:
    """Execute the script against a fresh registry.

    Returns the report and the registry (whose ledger holds the full event
    stream).  The first failing step aborts with ScenarioStepError carrying
    the 1-based step index.
    """
    registry = Registry(weight_places=config.rounding.weight_places)
    registry.register_issuer(config.issuer.issuer_id, config.issuer.denominations)
    aliases: dict[str, str] = {}
    records: list[dict] = []
    for index, step in enumerate(config.script, start=1):
        try:
            records.append(_run_step(config, registry, aliases, index, step))
        except DCMError as exc:
            if isinstance(exc, ScenarioStepError):
                raise
            raise ScenarioStepError(index, step.action, exc) from exc
    return ScenarioReport(scenario=config.name, currency=config.currency, steps=records), registry


def _market_quote(config: ScenarioConfig, when: date, premium: float) -> MarketQuote:
    unit_price = quote_at(config.prices, when) / config.price_per_units
    return MarketQuote(quotation=unit_price, premium=premium, as_of=when)


def _cert_id(aliases: dict[str, str], alias: str) -> str:
    try:
        return aliases[alias]
    except KeyError:
        raise DomainError(f"script alias {alias!r} does not name an issued certificate") from None


def _run_step(
    config: ScenarioConfig,
    registry: Registry,
    aliases: dict[str, str],
    index: int,
    step: ScriptStep,
) -> dict:
    profile = config.rounding
    when = step.date if step.date is not None else config.issue_date + timedelta(days=step.dt)
    record: dict[str, Any] = {
        "step": index,
        "dt": step.dt,
        "date": when.isoformat(),
        "action": step.action,
        "cert": step.cert,
    }

    if step.action == "issue":
        cert = registry.issue(
            issuer=config.issuer.issuer_id,
            material=config.issuer.material,
            face_weight=float(step.args.get("face_weight", 0.0)),
            purity=config.issuer.purity,
            issue_date=config.issue_date,
            theta=config.issuer.theta,
            rules=config.issuer.rules,
            owner=str(step.args.get("owner", "bearer")),
            weight_unit=config.issuer.weight_unit,
        )
        if step.cert in aliases:
            raise DomainError(f"script alias {step.cert!r} already used")
        aliases[step.cert] = cert.cert_id
        record.update(
            cert_id=cert.cert_id,
            face_weight=cert.face_weight,
            owner=cert.owner,
            theta=cert.theta.theta_daily,
            theta_display=fmt(cert.theta.theta_daily, 6),
        )
        return record

    cert_id = _cert_id(aliases, step.cert)
    record["cert_id"] = cert_id

    if step.action == "quote":
        quote = _market_quote(config, when, float(step.args.get("premium", 0.0)))
        result = registry.quote_transaction_price(cert_id, quote, step.dt, timestamp=when)
        record.update(
            quotation=result.quotation,
            premium=result.premium,
            residual_weight=result.residual_weight,
            residual_weight_display=profile.weight(result.residual_weight),
            settlement_weight=result.docket_weight,
            price=result.price,
            price_display=profile.money(result.price),
        )
    elif step.action == "transfer":
        new_owner = str(_require(step.args, "new_owner", f"script step {index}"))
        cert = registry.transfer(cert_id, new_owner, step.dt, timestamp=when)
        record.update(to_owner=cert.owner)
    elif step.action == "deliver":
        result = registry.physical_delivery(cert_id, step.dt, timestamp=when)
        residual_display = profile.weight(result.residual_weight)
        delivered_display = profile.weight(result.delivered_weight)
        record.update(
            residual_weight=result.residual_weight,
            residual_weight_display=residual_display,
            delivered_weight=result.delivered_weight,
            delivered_weight_display=delivered_display,
            charged_weight=result.charged_weight,
            # printed charge = printed residual - printed delivery, so the
            # displayed line balances to the last retained digit
            charged_weight_display=str(Decimal(residual_display) - Decimal(delivered_display)),
        )
    elif step.action == "buyback":
        quote = _market_quote(config, when, 0.0)
        result = registry.buyback(cert_id, step.dt, quote, timestamp=when)
        residual_display = profile.weight(result.residual_weight)
        weight_display = profile.weight(result.buyback_weight)
        record.update(
            quotation=result.quotation,
            residual_weight=result.residual_weight,
            residual_weight_display=residual_display,
            buyback_weight=result.buyback_weight,
            buyback_weight_display=weight_display,
            charged_weight=result.charged_weight,
            charged_weight_display=str(Decimal(residual_display) - Decimal(weight_display)),
            cash=result.cash,
            cash_display=profile.money(result.cash),
        )
    elif step.action == "expire":
        result = registry.expire(cert_id, step.dt, timestamp=when)
        record.update(
            issuer_accrued_weight=result.issuer_accrued_weight,
            issuer_accrued_weight_display=profile.weight(result.issuer_accrued_weight),
        )
    return record


@dataclass(frozen=True)
class WealthProjection:
    """Decade-scale split of an anchor stock between holders and custodian."""

    anchor_weight: float
    horizon_days: int
    residual_weight: float
    issuer_accrued_weight: float


def wealth_projection(
    anchor_weight: float, theta: AttenuationSpec | float, horizon_days: int
) -> WealthProjection:
    """Split ``anchor_weight`` after ``horizon_days`` of decay.

    residual = anchor x theta^horizon; the issuer share is the complement, so
    the pair sums back to the anchor weight.
    """
    if horizon_days < 0:
        raise DomainError("horizon_days must be >= 0")
    residual = residual_weight(anchor_weight, theta, horizon_days)
    return WealthProjection(
        anchor_weight=anchor_weight,
        horizon_days=horizon_days,
        residual_weight=residual,
        issuer_accrued_weight=anchor_weight - residual,
    )
