import numpy as np
import pytest

from metric_forge import DistanceMatrix

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and rep.when == "call":
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        if hasattr(item, "callspec"):
            doc += f" [{item.callspec.id}]"
        _ACCEPTANCE[item.name] = ("PASS" if rep.passed else "FAIL", doc)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status, doc = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{status}  {doc}")


@pytest.fixture
def squared_line():
    x = np.array([0.0, 1.0, 2.0])
    return DistanceMatrix((x[:, None] - x[None, :]) ** 2)


@pytest.fixture
def unit_triangle():
    return DistanceMatrix(np.ones((3, 3)) - np.eye(3))
