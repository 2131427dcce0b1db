import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "kstab", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile("kstab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def biot_savart(a: np.ndarray, b: np.ndarray) -> float:
    """Midpoint-rule Gauss double integral; an oracle independent of the exact solid-angle sum."""
    da = np.roll(a, -1, axis=0) - a
    db = np.roll(b, -1, axis=0) - b
    ma = a + da / 2
    mb = b + db / 2
    r = ma[:, None, :] - mb[None, :, :]
    num = np.einsum("ijk,ijk->ij", r, np.cross(da[:, None, :], db[None, :, :]))
    return float(np.sum(num / np.linalg.norm(r, axis=-1) ** 3) / (4 * np.pi))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import REPORT
    lines = config.stash.get(REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
