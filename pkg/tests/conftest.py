import numpy as np
import pytest

from depthrr import (ApproximationSpec, block_mean_thumbnail, make_hemisphere,
                     subtract, upsample_bicubic)


@pytest.fixture(scope="session")
def hemisphere():
    return make_hemisphere(512, 256.0)


@pytest.fixture(scope="session")
def hemi_thumbnail(hemisphere):
    return block_mean_thumbnail(hemisphere, 32, 32)


@pytest.fixture(scope="session")
def hemi_spec(hemi_thumbnail):
    return ApproximationSpec(kind="thumbnail", thumbnail=hemi_thumbnail)


@pytest.fixture(scope="session")
def hemi_residual(hemisphere, hemi_thumbnail):
    return subtract(hemisphere, upsample_bicubic(hemi_thumbnail))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


_acceptance_lines = {}


@pytest.fixture(scope="session")
def acceptance_record():
    """Collect one PASS/FAIL line per acceptance criterion.

    Lines are printed in a dedicated section after the test run so they
    survive pytest's output capture.
    """
    def record(criterion: int, name: str, ok: bool) -> bool:
        verdict = "PASS" if ok else "FAIL"
        _acceptance_lines[criterion] = f"criterion {criterion} ({name}): {verdict}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_acceptance_lines):
            terminalreporter.write_line(_acceptance_lines[key])
