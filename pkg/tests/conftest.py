import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance gate")
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


_VERDICTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if not rep.passed:
        detail = (detail + "; " if detail else "") + rep.longrepr.reprcrash.message.splitlines()[0] \
            if hasattr(rep.longrepr, "reprcrash") else detail
    _VERDICTS[n] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        title, verdict, detail = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {verdict}  {title}: {detail}")
