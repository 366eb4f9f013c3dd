import random

import pytest

from hecond import fv
from hecond.encoder import EncodingParams
from hecond.presets import Q435, get_preset
from hecond.ring import RingParams

# One line per acceptance criterion, printed after the run.
_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture(scope="session")
def toy():
    """The shipped toy preset with a fixed keyset (fast, insecure, shallow:
    the modulus only supports accurate results to depth ~2)."""
    p = get_preset("insecure-test")
    keys = fv.keygen(p.scheme, random.Random("test:toy:keys"))
    return p, keys


@pytest.fixture(scope="session")
def deep():
    """Small-degree ring with the large production modulus: fast AND deep
    enough for full comparison circuits.  Test-only parameters (the small
    degree gives no security at this modulus size)."""
    scheme = fv.SchemeParams(
        RingParams(2048, Q435), 65536, security_note="test-only"
    )
    encoding = EncodingParams(7, 8, 8, 2048, 65536)
    keys = fv.keygen(scheme, random.Random("test:deep:keys"))
    return scheme, encoding, keys


@pytest.fixture(scope="session")
def paper():
    """The production preset with a fixed keyset (expensive: session-scoped)."""
    p = get_preset("paper-r3")
    keys = fv.keygen(p.scheme, random.Random("test:paper:keys"))
    return p, keys
