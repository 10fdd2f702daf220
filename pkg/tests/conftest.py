import numpy as np
import pytest

from specfp.synth import PlantedMode, RoiSpec


def dft_power(x, k):
    """Direct DFT summation at bin k with the package's power convention."""
    L = len(x)
    t = np.arange(L)
    re = sum(x[n] * np.cos(2 * np.pi * k * n / L) for n in range(L))
    im = -sum(x[n] * np.sin(2 * np.pi * k * n / L) for n in range(L))
    return 2.0 * (re * re + im * im) / (L * L)


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def three_roi_specs():
    return [
        RoiSpec("a", (PlantedMode(((10.0, 1.0),), 0.7), PlantedMode(((21.0, 1.0),), 0.3))),
        RoiSpec("b", (PlantedMode(((6.0, 1.0),), 0.6), PlantedMode(((14.0, 1.0),), 0.4))),
        RoiSpec("c", (PlantedMode(((4.0, 1.0),), 0.5), PlantedMode(((27.0, 1.0),), 0.5))),
    ]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
