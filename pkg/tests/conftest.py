import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def verdict(request):
    """Print one PASS/FAIL line past output capture, then assert."""
    tr = request.config.pluginmanager.getplugin("terminalreporter")

    def report(k, ok, detail=""):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)
        assert ok, line
    return report
