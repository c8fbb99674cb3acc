import numpy as np
import pytest

from cylspec.grid import GridField, GridSpec, grid_mesh
from cylspec.manufactured import CartesianPolynomial


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def smooth_field(spec: GridSpec, rng, degree: int = 4, wall: str = "") -> GridField:
    """Values of a random polynomial in x, y, z: physically consistent by construction."""
    return CartesianPolynomial.random(degree, rng, wall).field(spec)


def field_of(spec: GridSpec, f) -> GridField:
    R, Z, T = grid_mesh(spec)
    return GridField(spec, f(R, Z, T) * np.ones(spec.shape))


# --------------------------------------------------------------------------
# acceptance summary: one pass/fail line per criterion

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(order, label): acceptance criterion this test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.outcome != "passed"):
        return
    order, label = mark.args
    entry = _ACCEPTANCE.setdefault(order, {"label": label, "ok": True, "details": []})
    entry["ok"] = entry["ok"] and rep.outcome == "passed"
    entry["details"].extend(str(v) for k, v in item.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for order in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[order]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(dict.fromkeys(entry["details"]))
        terminalreporter.write_line(f"{status}  {entry['label']}: {detail}")
