"""Certificate lifecycle over the event ledger.

Issue, transfer, quote, deliver, buy back, expire - every mutation appends one
ledger event, and ``replay`` rebuilds the registry from the verified stream.

The registry is a single-writer, multi-reader component: callers must
serialize mutating operations through one writer; reads see the state as of
the last append.

Settlement convention: weights decay in full double precision, but every cash
leg settles on the *docket* weight - the weight quantized half-even to the
registry's weight precision (4 decimals by default), i.e. the figure printed
on the settlement document.  Exchanges settle on stated quantities, and the
reference case-study figures are only reproducible under this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date, timedelta
from enum import Enum
from typing import Iterable

from .decay import AttenuationSpec, CifQuote, StorageTariff, ThetaMode, residual_weight
from .errors import (
    DomainError,
    ExpiryError,
    IssuanceError,
    LedgerIntegrityError,
    LotSizeError,
    ParseError,
    StateError,
)
from .ledger import EventKind, Ledger, LedgerEvent, validate_cert_id
from .rounding import fmt, quantize_to_float


class CertStatus(str, Enum):
    ACTIVE = "ACTIVE"
    DELIVERED = "DELIVERED"
    BOUGHT_BACK = "BOUGHT_BACK"
    EXPIRED = "EXPIRED"


TERMINAL_STATUSES = frozenset(
    {CertStatus.DELIVERED, CertStatus.BOUGHT_BACK, CertStatus.EXPIRED}
)


@dataclass(frozen=True)
class DeliveryRules:
    """Settlement terms printed on a certificate."""

    delivery_charge_ratio: float  # deducted from residual weight on physical delivery
    withdrawal_charge_ratio: float  # deducted from residual weight on cash buyback
    min_delivery_weight: float  # smallest face weight eligible for delivery
    delivery_location: str = ""
    validity_days: int | None = None  # None = open-ended

    def __post_init__(self):
        for name in ("delivery_charge_ratio", "withdrawal_charge_ratio", "min_delivery_weight"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("delivery_charge_ratio", "withdrawal_charge_ratio"):
            ratio = getattr(self, name)
            if not 0.0 <= ratio <= 0.1:
                raise DomainError(f"{name} must lie in [0, 0.1]")
        if self.min_delivery_weight <= 0:
            raise DomainError("min_delivery_weight must be > 0")
        if self.validity_days is not None and self.validity_days <= 0:
            raise DomainError("validity_days must be > 0 when set")


@dataclass(frozen=True)
class MarketQuote:
    """A market quotation per certificate weight unit, with optional premium."""

    quotation: float
    premium: float = 0.0  # issuer adjustment; may be negative or zero
    as_of: date | None = None

    def __post_init__(self):
        if self.quotation <= 0:
            raise DomainError("quotation must be > 0")


@dataclass
class Certificate:
    """An issued decayed-commodity-money instrument."""

    cert_id: str
    issuer: str
    material: str
    face_weight: float
    purity: float
    issue_date: date
    theta: AttenuationSpec
    rules: DeliveryRules
    owner: str
    weight_unit: str = "kg"
    status: CertStatus = CertStatus.ACTIVE

    def __post_init__(self):
        validate_cert_id(self.cert_id)
        self.face_weight = float(self.face_weight)
        self.purity = float(self.purity)
        if self.face_weight <= 0:
            raise DomainError("face_weight must be > 0")
        if not 0.0 < self.purity <= 1.0:
            raise DomainError("purity must lie in (0, 1]")

    def residual_at(self, delta_t: int) -> float:
        return residual_weight(self.face_weight, self.theta, delta_t)


@dataclass(frozen=True)
class QuoteResult:
    cert_id: str
    t: int
    residual_weight: float
    docket_weight: float
    quotation: float
    premium: float
    price: float  # (quotation + premium) x docket weight


@dataclass(frozen=True)
class DeliveryResult:
    cert_id: str
    t: int
    residual_weight: float
    delivered_weight: float
    charged_weight: float  # residual - delivered; the custodian's take


@dataclass(frozen=True)
class BuybackResult:
    cert_id: str
    t: int
    residual_weight: float
    buyback_weight: float
    charged_weight: float
    docket_weight: float
    quotation: float
    cash: float  # docket buyback weight x quotation


@dataclass(frozen=True)
class ExpiryResult:
    cert_id: str
    t: int
    issuer_accrued_weight: float  # residual at the validity boundary, forfeited to the issuer


@dataclass(frozen=True)
class RegistrySnapshot:
    """Value-compared registry state for replay checks."""

    certificates: dict[str, Certificate]
    last_seq: int
    head_hash: str


class Registry:
    """Single-writer certificate registry with an append-only ledger behind it."""

    def __init__(self, ledger: Ledger | None = None, *, weight_places: int = 4):
        self.ledger = ledger if ledger is not None else Ledger()
        self.weight_places = weight_places
        self._certs: dict[str, Certificate] = {}
        self._denominations: dict[str, frozenset[float]] = {}
        self._issue_counts: dict[tuple[str, str], int] = {}

    # -- configuration ----------------------------------------------------

    def register_issuer(self, issuer: str, denominations: Iterable[float]) -> None:
        """Declare the face weights an issuer offers.  Membership is exact."""
        denoms = frozenset(float(d) for d in denominations)
        if not denoms:
            raise DomainError("denomination set must not be empty")
        if any(d <= 0 for d in denoms):
            raise DomainError("denominations must be > 0")
        self._denominations[issuer] = denoms

    # -- reads ------------------------------------------------------------

    def certificate(self, cert_id: str) -> Certificate:
        try:
            return self._certs[cert_id]
        except KeyError:
            raise DomainError(f"unknown certificate {cert_id!r}") from None

    @property
    def certificates(self) -> dict[str, Certificate]:
        return dict(self._certs)

    def snapshot(self) -> RegistrySnapshot:
        return RegistrySnapshot(
            certificates={cid: replace(cert) for cid, cert in self._certs.items()},
            last_seq=self.ledger.last_seq,
            head_hash=self.ledger.head_hash,
        )

    # -- operations ---------------------------------------------------------

    def issue(
        self,
        issuer: str,
        material: str,
        face_weight: float,
        purity: float,
        issue_date: date,
        theta: AttenuationSpec,
        rules: DeliveryRules,
        owner: str,
        *,
        weight_unit: str = "kg",
        cert_id: str | None = None,
    ) -> Certificate:
        """Issue an ACTIVE certificate and append its ISSUE event.

        The face weight must be one of the issuer's registered denominations.
        Theta validity, purity and the delivery rules are enforced by the
        value types themselves.
        """
        denominations = self._denominations.get(issuer)
        if denominations is None:
            raise IssuanceError(f"issuer {issuer!r} has no registered denomination set")
        if float(face_weight) not in denominations:
            offered = ", ".join(str(d) for d in sorted(denominations))
            raise IssuanceError(
                f"face weight {face_weight} not offered by {issuer}; denominations: {offered}"
            )
        if cert_id is None:
            count = self._issue_counts.get((issuer, material), 0) + 1
            cert_id = f"{issuer}-{material}-{count:04d}"
        if cert_id in self._certs:
            raise IssuanceError(f"certificate {cert_id!r} already exists")
        cert = Certificate(
            cert_id=cert_id,
            issuer=issuer,
            material=material,
            face_weight=float(face_weight),
            purity=purity,
            issue_date=issue_date,
            theta=theta,
            rules=rules,
            owner=owner,
            weight_unit=weight_unit,
        )
        self.ledger.append(EventKind.ISSUE, cert_id, _issue_payload(cert), issue_date)
        self._certs[cert_id] = cert
        self._issue_counts[(issuer, material)] = self._issue_counts.get((issuer, material), 0) + 1
        return cert

    def _active(self, cert_id: str) -> Certificate:
        cert = self.certificate(cert_id)
        if cert.status in TERMINAL_STATUSES:
            raise StateError(f"certificate {cert_id} is {cert.status.value}; terminal states are absorbing")
        return cert

    def _check_window(self, cert: Certificate, t: int) -> None:
        if t < 0:
            raise DomainError("t must be >= 0")
        validity = cert.rules.validity_days
        if validity is not None and t > validity:
            raise ExpiryError(
                f"certificate {cert.cert_id} expired: day {t} exceeds validity of {validity} days"
            )

    def _event_date(self, cert: Certificate, t: int, timestamp: date | None) -> date:
        return timestamp if timestamp is not None else cert.issue_date + timedelta(days=t)

    def quote_transaction_price(
        self,
        cert_id: str,
        quote: MarketQuote,
        t1: int,
        *,
        timestamp: date | None = None,
    ) -> QuoteResult:
        """Cash price of the certificate ``t1`` days after issuance.

        (quotation + premium) x docket residual weight; appends a QUOTE event.
        """
        cert = self._active(cert_id)
        self._check_window(cert, t1)
        residual = cert.residual_at(t1)
        docket = quantize_to_float(residual, self.weight_places)
        price = (quote.quotation + quote.premium) * docket
        result = QuoteResult(
            cert_id=cert_id,
            t=t1,
            residual_weight=residual,
            docket_weight=docket,
            quotation=quote.quotation,
            premium=quote.premium,
            price=price,
        )
        payload = {
            "t": t1,
            "quotation": quote.quotation,
            "premium": quote.premium,
            "residual_weight": residual,
            "docket_weight": docket,
            "price": price,
        }
        self.ledger.append(EventKind.QUOTE, cert_id, payload, self._event_date(cert, t1, timestamp))
        return result

    def physical_delivery(
        self, cert_id: str, t2: int, *, timestamp: date | None = None
    ) -> DeliveryResult:
        """Deliver the decayed anchor weight net of the delivery charge.

        Eligibility is judged on the face weight (a certificate denominated at
        the minimum lot stays deliverable even though decay pulls the residual
        below it).  Terminal: the certificate becomes DELIVERED.
        """
        cert = self._active(cert_id)
        self._check_window(cert, t2)
        if cert.face_weight < cert.rules.min_delivery_weight:
            raise LotSizeError(
                f"face weight {cert.face_weight} below minimum delivery lot "
                f"{cert.rules.min_delivery_weight}"
            )
        residual = cert.residual_at(t2)
        delivered = residual * (1.0 - cert.rules.delivery_charge_ratio)
        charged = residual - delivered
        result = DeliveryResult(
            cert_id=cert_id,
            t=t2,
            residual_weight=residual,
            delivered_weight=delivered,
            charged_weight=charged,
        )
        payload = {
            "t": t2,
            "residual_weight": residual,
            "delivered_weight": delivered,
            "charged_weight": charged,
        }
        self.ledger.append(EventKind.DELIVER, cert_id, payload, self._event_date(cert, t2, timestamp))
        cert.status = CertStatus.DELIVERED
        return result

    def buyback(
        self,
        cert_id: str,
        t: int,
        quote: MarketQuote,
        *,
        timestamp: date | None = None,
    ) -> BuybackResult:
        """Cash out the certificate: residual net of the withdrawal charge, at the day's quotation.

        Buyback pays the raw quotation (no premium) on the docket weight.
        Terminal: the certificate becomes BOUGHT_BACK.
        """
        cert = self._active(cert_id)
        self._check_window(cert, t)
        residual = cert.residual_at(t)
        weight = residual * (1.0 - cert.rules.withdrawal_charge_ratio)
        charged = residual - weight
        docket = quantize_to_float(weight, self.weight_places)
        cash = docket * quote.quotation
        result = BuybackResult(
            cert_id=cert_id,
            t=t,
            residual_weight=residual,
            buyback_weight=weight,
            charged_weight=charged,
            docket_weight=docket,
            quotation=quote.quotation,
            cash=cash,
        )
        payload = {
            "t": t,
            "quotation": quote.quotation,
            "residual_weight": residual,
            "buyback_weight": weight,
            "charged_weight": charged,
            "docket_weight": docket,
            "cash": cash,
        }
        self.ledger.append(EventKind.BUYBACK, cert_id, payload, self._event_date(cert, t, timestamp))
        cert.status = CertStatus.BOUGHT_BACK
        return result

    def transfer(
        self, cert_id: str, new_owner: str, t: int, *, timestamp: date | None = None
    ) -> Certificate:
        """Change the registered owner.  Decay depends only on the issue date, never on ownership."""
        cert = self._active(cert_id)
        if t < 0:
            raise DomainError("t must be >= 0")
        payload = {"t": t, "from_owner": cert.owner, "to_owner": new_owner}
        self.ledger.append(EventKind.TRANSFER, cert_id, payload, self._event_date(cert, t, timestamp))
        cert.owner = new_owner
        return cert

    def expire(
        self, cert_id: str, t: int, *, timestamp: date | None = None
    ) -> ExpiryResult:
        """Sweep a lapsed certificate: residual at the validity boundary accrues to the issuer."""
        cert = self._active(cert_id)
        validity = cert.rules.validity_days
        if validity is None or t <= validity:
            raise StateError(f"certificate {cert_id} has not lapsed; cannot expire at day {t}")
        accrued = cert.residual_at(validity)
        result = ExpiryResult(cert_id=cert_id, t=t, issuer_accrued_weight=accrued)
        payload = {"t": t, "issuer_accrued_weight": accrued}
        self.ledger.append(EventKind.EXPIRE, cert_id, payload, self._event_date(cert, t, timestamp))
        cert.status = CertStatus.EXPIRED
        return result


# -- replay -----------------------------------------------------------------


def replay(events: Iterable[LedgerEvent], *, weight_places: int = 4) -> Registry:
    """Rebuild a registry from an event stream.

    The stream must already be hash-verified (see ledger.read_events); replay
    re-checks linkage and applies the recorded state transitions, refusing any
    event that is illegal for the certificate's replayed state.
    """
    registry = Registry(weight_places=weight_places)
    certs = registry._certs
    prev_hash = registry.ledger.head_hash
    expected_seq = 1
    for event in events:
        if event.seq != expected_seq:
            raise LedgerIntegrityError(
                f"expected seq {expected_seq}, found {event.seq}", seq=event.seq
            )
        if event.prev_hash != prev_hash:
            raise LedgerIntegrityError("chain break: prev_hash mismatch", seq=event.seq)
        _apply(certs, event)
        registry.ledger._events.append(event)
        prev_hash = event.hash
        expected_seq += 1
    return registry


def _apply(certs: dict[str, Certificate], event: LedgerEvent) -> None:
    kind = event.kind
    if kind is EventKind.ISSUE:
        if event.cert_id in certs:
            raise LedgerIntegrityError(f"duplicate issue of {event.cert_id}", seq=event.seq)
        try:
            certs[event.cert_id] = _cert_from_payload(event.cert_id, event.payload)
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            raise LedgerIntegrityError(f"bad issue payload: {exc}", seq=event.seq) from None
        return
    cert = certs.get(event.cert_id)
    if cert is None:
        raise LedgerIntegrityError(f"event for unknown certificate {event.cert_id}", seq=event.seq)
    if cert.status in TERMINAL_STATUSES:
        raise LedgerIntegrityError(
            f"event on {cert.status.value} certificate {event.cert_id}", seq=event.seq
        )
    if kind is EventKind.TRANSFER:
        try:
            cert.owner = event.payload["to_owner"]
        except KeyError:
            raise LedgerIntegrityError("transfer payload missing to_owner", seq=event.seq) from None
    elif kind is EventKind.DELIVER:
        cert.status = CertStatus.DELIVERED
    elif kind is EventKind.BUYBACK:
        cert.status = CertStatus.BOUGHT_BACK
    elif kind is EventKind.EXPIRE:
        cert.status = CertStatus.EXPIRED
    elif kind is EventKind.QUOTE:
        pass  # quotes advance the chain but do not change certificate state
    else:  # pragma: no cover - EventKind is closed
        raise LedgerIntegrityError(f"unhandled event kind {kind}", seq=event.seq)


# -- payload / metadata serialization ----------------------------------------


def _theta_to_payload(theta: AttenuationSpec) -> dict:
    payload: dict = {"theta_daily": theta.theta_daily, "mode": theta.mode.value}
    if theta.tariff is not None:
        payload["tariff"] = {
            "daily_warehouse_charge": theta.tariff.daily_warehouse_charge,
            "outbound_transfer_charge": theta.tariff.outbound_transfer_charge,
            "bank_rate": theta.tariff.bank_rate,
        }
    if theta.cif is not None:
        payload["cif"] = {
            "price_per_unit": theta.cif.price_per_unit,
            "material": theta.cif.material,
            "location": theta.cif.location,
            "as_of": theta.cif.as_of.isoformat() if theta.cif.as_of else None,
        }
    return payload


def _theta_from_payload(payload: dict) -> AttenuationSpec:
    tariff = None
    if "tariff" in payload:
        tariff = StorageTariff(
            daily_warehouse_charge=payload["tariff"]["daily_warehouse_charge"],
            outbound_transfer_charge=payload["tariff"]["outbound_transfer_charge"],
            bank_rate=payload["tariff"]["bank_rate"],
        )
    cif = None
    if "cif" in payload:
        raw = payload["cif"]
        cif = CifQuote(
            price_per_unit=raw["price_per_unit"],
            material=raw["material"],
            location=raw["location"],
            as_of=date.fromisoformat(raw["as_of"]) if raw["as_of"] else None,
        )
    return AttenuationSpec(
        theta_daily=payload["theta_daily"],
        mode=ThetaMode(payload["mode"]),
        tariff=tariff,
        cif=cif,
    )


def _issue_payload(cert: Certificate) -> dict:
    return {
        "issuer": cert.issuer,
        "material": cert.material,
        "face_weight": cert.face_weight,
        "purity": cert.purity,
        "issue_date": cert.issue_date.isoformat(),
        "weight_unit": cert.weight_unit,
        "owner": cert.owner,
        "theta": _theta_to_payload(cert.theta),
        "rules": {
            "delivery_charge_ratio": cert.rules.delivery_charge_ratio,
            "withdrawal_charge_ratio": cert.rules.withdrawal_charge_ratio,
            "min_delivery_weight": cert.rules.min_delivery_weight,
            "delivery_location": cert.rules.delivery_location,
            "validity_days": cert.rules.validity_days,
        },
    }


def _cert_from_payload(cert_id: str, payload: dict) -> Certificate:
    rules = payload["rules"]
    return Certificate(
        cert_id=cert_id,
        issuer=payload["issuer"],
        material=payload["material"],
        face_weight=payload["face_weight"],
        purity=payload["purity"],
        issue_date=date.fromisoformat(payload["issue_date"]),
        theta=_theta_from_payload(payload["theta"]),
        rules=DeliveryRules(
            delivery_charge_ratio=rules["delivery_charge_ratio"],
            withdrawal_charge_ratio=rules["withdrawal_charge_ratio"],
            min_delivery_weight=rules["min_delivery_weight"],
            delivery_location=rules["delivery_location"],
            validity_days=rules["validity_days"],
        ),
        owner=payload["owner"],
        weight_unit=payload["weight_unit"],
    )


# -- certificate paper format -------------------------------------------------

_EXPORT_FIELDS = (
    "code",
    "issuer",
    "material",
    "face_weight",
    "weight_unit",
    "purity",
    "issue_date",
    "theta",
    "delivery_charge_ratio",
    "withdrawal_charge_ratio",
    "min_delivery_weight",
    "delivery_location",
    "validity_days",
)


def export_certificate(cert: Certificate) -> str:
    """Printable certificate text: the metadata a holder sees, one field per line.

    Theta is printed to 6 decimal places, the precision certificates carry.
    """
    values = {
        "code": cert.cert_id,
        "issuer": cert.issuer,
        "material": cert.material,
        "face_weight": repr(cert.face_weight),
        "weight_unit": cert.weight_unit,
        "purity": repr(cert.purity),
        "issue_date": cert.issue_date.isoformat(),
        "theta": fmt(cert.theta.theta_daily, 6),
        "delivery_charge_ratio": repr(cert.rules.delivery_charge_ratio),
        "withdrawal_charge_ratio": repr(cert.rules.withdrawal_charge_ratio),
        "min_delivery_weight": repr(cert.rules.min_delivery_weight),
        "delivery_location": cert.rules.delivery_location,
        "validity_days": "none" if cert.rules.validity_days is None else str(cert.rules.validity_days),
    }
    return "\n".join(f"{name}: {values[name]}" for name in _EXPORT_FIELDS) + "\n"


def import_certificate(text: str) -> Certificate:
    """Parse an exported certificate back into an instrument.

    The paper format carries no ownership, so the result is an ACTIVE
    bearer certificate.  Theta is read at the printed 6-decimal precision.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if ": " not in line:
            raise ParseError(f"expected 'field: value', got {line!r}", lineno=lineno)
        name, value = line.split(": ", 1)
        if name not in _EXPORT_FIELDS:
            raise ParseError(f"unknown field {name!r}", lineno=lineno)
        if name in values:
            raise ParseError(f"duplicate field {name!r}", lineno=lineno)
        values[name] = value
    missing = [name for name in _EXPORT_FIELDS if name not in values]
    if missing:
        raise ParseError(f"missing fields: {', '.join(missing)}")
    try:
        validity = None if values["validity_days"] == "none" else int(values["validity_days"])
        return Certificate(
            cert_id=values["code"],
            issuer=values["issuer"],
            material=values["material"],
            face_weight=float(values["face_weight"]),
            purity=float(values["purity"]),
            issue_date=date.fromisoformat(values["issue_date"]),
            theta=AttenuationSpec(theta_daily=float(values["theta"])),
            rules=DeliveryRules(
                delivery_charge_ratio=float(values["delivery_charge_ratio"]),
                withdrawal_charge_ratio=float(values["withdrawal_charge_ratio"]),
                min_delivery_weight=float(values["min_delivery_weight"]),
                delivery_location=values["delivery_location"],
                validity_days=validity,
            ),
            owner="bearer",
        )
    except ValueError as exc:
        raise ParseError(f"bad field value: {exc}") from None
