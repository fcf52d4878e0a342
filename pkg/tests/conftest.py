import pytest

_ACCEPTANCE = []


def pytest_addoption(parser):
    parser.addoption("--large-scale", action="store_true", default=False,
                     help="also run sweeps at M = 1000 and 10000")


def pytest_configure(config):
    config.addinivalue_line("markers", "large_scale: needs --large-scale")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--large-scale"):
        return
    skip = pytest.mark.skip(reason="large-scale run; pass --large-scale")
    for item in items:
        if "large_scale" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, passed, detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
