"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import OrderedDict

_CRITERIA = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA.setdefault(number, {"title": title, "outcomes": [], "details": []})
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    number = props.get("criterion")
    if number is None or number not in _CRITERIA:
        return
    _CRITERIA[number]["outcomes"].append(report.outcome)
    if "detail" in props:
        _CRITERIA[number]["details"].append(props["detail"])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, info in sorted(_CRITERIA.items()):
        outcomes = info["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        detail = "; ".join(info["details"])
        terminalreporter.write_line(f"criterion {number:>2}: {status:<7} {info['title']}" + (f" [{detail}]" if detail else ""))
