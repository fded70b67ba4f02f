# Shared fixtures for the workbench test suite
# Unit tests run at reduced N; acceptance-scale runs live behind reproduce-paper

import random
from fractions import Fraction
from typing import Optional

import pytest

from workbench.config import get_settings_dev
from workbench.schemas.diagnostics import ErgodicityReport, Thresholds, Verdict
from workbench.services.base_systems import BaseSystem
from workbench.services.o2_algebra import O2Element
from workbench.utils.torus import SYMBOLIC_CONSTANTS

ETA = SYMBOLIC_CONSTANTS["sqrt2-1"]
ALPHA = SYMBOLIC_CONSTANTS["sqrt3-1"]

# Scan sizes that keep every decisive verdict below stable at this N
SCAN_N = 20_000
SCAN_STARTS = 8


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size scans at the default N (deselect with -m \"not slow\")")


@pytest.fixture
def eta() -> float:
    return ETA


@pytest.fixture
def alpha() -> float:
    return ALPHA


@pytest.fixture
def rotation() -> BaseSystem:
    return BaseSystem.rotation(ETA)


@pytest.fixture
def shift() -> BaseSystem:
    return BaseSystem.bernoulli()


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


def random_element(rng: random.Random, exact: bool = False) -> O2Element:
    if exact:
        angle = Fraction(rng.randrange(0, 360), 360)
    else:
        angle = rng.random()
    if rng.random() < 0.5:
        return O2Element.rotation(angle)
    return O2Element.reflection(angle)


def make_report(
    fibre: str,
    verdict: Verdict,
    cocycle: Optional[dict] = None,
    base: Optional[dict] = None,
) -> ErgodicityReport:
    """A scan report with no observables, for verdict-logic tests."""
    return ErgodicityReport(
        system={
            "fibre": fibre,
            "base": base or {"kind": "rotation", "eta": repr(ETA)},
            "cocycle": cocycle or {"kind": "example1"},
        },
        fibre=fibre,
        n=SCAN_N,
        starts=SCAN_STARTS,
        seed=0,
        residual_steps=0,
        thresholds=Thresholds(),
        observables=[],
        verdict=verdict,
    )


@pytest.fixture
def settings(monkeypatch):
    for key in ("WORKBENCH_LOG_LEVEL", "WORKBENCH_RETURN_CAP", "WORKBENCH_PRODUCT_CAP", "WORKBENCH_IOTA_ANNULUS"):
        monkeypatch.delenv(key, raising=False)
    return get_settings_dev()
