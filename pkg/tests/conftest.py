"""Shared fixtures and golden-comparison helpers."""

from __future__ import annotations

from datetime import date
from decimal import Decimal

import pytest

from dcm import AttenuationSpec, DeliveryRules, Registry
from dcm.rounding import quantize

LME_ISSUE_DATE = date(2020, 1, 1)


def assert_display_close(value: float, places: int, pinned: str, tol: str = "0.0001"):
    """Compare a displayed (half-even quantized) value against a pinned figure.

    Tolerances are exact decimal arithmetic so boundary cases cannot flake on
    binary representation.
    """
    shown = quantize(value, places)
    assert abs(shown - Decimal(pinned)) <= Decimal(tol), f"displayed {shown}, pinned {pinned}"


@pytest.fixture
def lme_registry() -> Registry:
    registry = Registry()
    registry.register_issuer("LME", [1, 10, 100, 1000])
    return registry


@pytest.fixture
def lme_rules() -> DeliveryRules:
    return DeliveryRules(
        delivery_charge_ratio=0.003,
        withdrawal_charge_ratio=0.002,
        min_delivery_weight=1000,
        delivery_location="LME designated warehouse",
    )


@pytest.fixture
def lme_cert(lme_registry, lme_rules):
    return lme_registry.issue(
        issuer="LME",
        material="copper",
        face_weight=1000,
        purity=0.9999,
        issue_date=LME_ISSUE_DATE,
        theta=AttenuationSpec(theta_daily=0.99996),
        rules=lme_rules,
        owner="client-1",
    )
