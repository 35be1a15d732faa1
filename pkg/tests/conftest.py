import os
from datetime import timedelta

from hypothesis import Verbosity, settings

import acceptance_log

settings.register_profile("ci", deadline=timedelta(milliseconds=2000))
settings.register_profile("dev", max_examples=10)
settings.register_profile("debug", max_examples=10, verbosity=Verbosity.verbose)
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(acceptance_log.LINES, key=acceptance_log.sort_key):
        terminalreporter.write_line(line)
