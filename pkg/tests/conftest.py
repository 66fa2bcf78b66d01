import pytest

from reslevy.levy_models import make_model

ACCEPTANCE_SEED = 20261016

# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = (title, bool(passed), detail)


@pytest.fixture
def cp_symmetric():
    return make_model("compound-poisson-drift", b=0.0, lam_up=1.0, mu_up=1.0, lam_down=1.0, mu_down=1.0)


@pytest.fixture
def stable_sub():
    return make_model("stable-subordinator-neg", alpha=0.5)


@pytest.fixture
def gamma_sub():
    return make_model("gamma-subordinator-neg", a=1.0, b=1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        title, passed, detail = ACCEPTANCE_LINES[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
