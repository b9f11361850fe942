import pytest

from highwaysim.highway import Highway, HighwayConfig


@pytest.fixture
def quiet_highway():
    def build(**kw):
        kw.setdefault("auto_injection", False)
        return Highway(HighwayConfig(**kw))
    return build


@pytest.fixture
def verdict(request):
    """Record and assert one acceptance criterion; the line is echoed in the terminal summary."""
    def check(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
        request.node.user_properties.append(("acceptance", line))
        print(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) == "call":
                lines += [value for key, value in rep.user_properties if key == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
