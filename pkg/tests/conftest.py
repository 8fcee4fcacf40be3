from __future__ import annotations

import pytest

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class _Recorder:
    def __init__(self, number: int):
        self.number = number

    def check(self, ok: bool, detail: str):
        ok = bool(ok)
        _ACCEPTANCE[self.number] = (ok, detail)
        print(f"ACCEPTANCE {self.number:2d}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail


@pytest.fixture
def acceptance(request):
    """Records one PASS/FAIL line per acceptance criterion (marker ``criterion(n)``)."""
    marker = request.node.get_closest_marker("criterion")
    return _Recorder(marker.args[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
