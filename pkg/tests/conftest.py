import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# simulation-backed properties have uneven run times
settings.register_profile("frogtree", deadline=None, max_examples=50)
settings.load_profile("frogtree")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
