import os
from pathlib import Path

import pytest

from dctkeca.image_io import load_manifest, scan_orl_directory
from synthetic import make_dataset

ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when == "teardown":
        return
    if report.when == "setup" and report.passed:
        return
    status = "PASS" if report.passed else "FAIL"
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    if report.failed:
        reason = str(call.excinfo.value).strip().splitlines()[0] if call.excinfo else ""
        detail = f"{detail}; {reason}" if detail else reason
    ACCEPTANCE_LINES.append(f"[{status}] {marker.args[0]}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def synthetic_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    return load_manifest(make_dataset(root, n_subjects=10, n_images=10, seed=3))


@pytest.fixture(scope="session")
def synthetic_manifest_path(synthetic_manifest):
    return synthetic_manifest.entries[0].path.parent.parent / "manifest.csv"


def _orl_manifest():
    if os.environ.get("ORL_MANIFEST"):
        return load_manifest(os.environ["ORL_MANIFEST"])
    if os.environ.get("ORL_DIR"):
        return scan_orl_directory(Path(os.environ["ORL_DIR"]))
    return None


@pytest.fixture(scope="session")
def orl_manifest():
    """The AT&T/ORL database (40 x 10 PGMs), located via ORL_DIR or ORL_MANIFEST.

    Missing data is a failure, not a skip: the criteria that need ORL cannot
    be claimed without it.
    """
    manifest = _orl_manifest()
    if manifest is None:
        pytest.fail("ORL dataset not available: set ORL_DIR to the directory holding "
                    "s1..s40/*.pgm (or ORL_MANIFEST to a path,subject_id,index CSV)")
    return manifest
