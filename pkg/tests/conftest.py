"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n, title = mark.args
        detail = dict(item.user_properties).get("detail", "")
        entry = _RESULTS.setdefault(n, {"title": title, "ok": True, "parts": []})
        ok = rep.passed
        entry["ok"] &= ok
        entry["parts"].append((item.name, "PASS" if ok else ("SKIP" if rep.skipped else "FAIL"), detail))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        e = _RESULTS[n]
        tr.write_line(f"criterion {n:>2} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}")
        for name, status, detail in e["parts"]:
            tr.write_line(f"      {status}  {name}" + (f"  ({detail})" if detail else ""))
