import contextlib

import pytest

ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def criterion():
    """``with criterion("name"):`` records PASS/FAIL and prints one line."""

    @contextlib.contextmanager
    def record(name: str):
        try:
            yield
        except BaseException as exc:
            line = ("FAIL", name, f"{type(exc).__name__}: {exc}".splitlines()[0])
            ACCEPTANCE.append(line)
            print(f"\nFAIL  {name}  ({line[2]})")
            raise
        ACCEPTANCE.append(("PASS", name, ""))
        print(f"\nPASS  {name}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}" + (f"  ({detail})" if detail else ""))
    passed = sum(1 for s, _, _ in ACCEPTANCE if s == "PASS")
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE)} criteria passed")
