import numpy as np
import pytest

from mifi.data import SplitSpec, SynthConfig, generate_synthetic, split_by_driver


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_dataset():
    """Four classes, ten drivers, small clips; cleanly separable."""
    cfg = SynthConfig(n_classes=4, n_drivers=10, clips_per_driver_per_class=2, dims=(6, 2, 3, 3), noise_std=0.5, seed=3)
    return split_by_driver(generate_synthetic(cfg), SplitSpec(6, 2, 2, seed=3))


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
