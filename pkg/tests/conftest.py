import contextlib
import time

import pytest

ACCEPTANCE_LINES = pytest.StashKey[list]()


class Outcome:
    """What an acceptance check measured, for its summary line."""

    def __init__(self):
        self.note = ""

    def residual(self, value, tolerance):
        self.note = f"residual {value:.3g} vs {tolerance:.3g}"

    def describe(self, text):
        self.note = text


@pytest.fixture
def acceptance(request):
    """Context manager that times a check and records one PASS/FAIL line.

    The runtime limit is enforced after the body's own assertions.
    """
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    @contextlib.contextmanager
    def check(number, title, limit):
        outcome = Outcome()
        start = time.perf_counter()
        ok = False
        try:
            yield outcome
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            status = "PASS" if ok and elapsed < limit else "FAIL"
            line = f"{status} {number:>2} {title}: {outcome.note}; {elapsed:.2f} s (limit {limit} s)"
            lines.append(line)
            print(line)
        assert elapsed < limit, f"took {elapsed:.1f} s, limit {limit} s"

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda text: int(text.split()[1])):
            terminalreporter.write_line(line)
