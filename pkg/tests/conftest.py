import numpy as np
import pytest

from partshap import PartAnnotation, PartSet, RasterImage


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {outcome}", flush=True)


@pytest.fixture
def gray_image():
    """16x16 grayscale gradient-ish image with known content."""
    arr = (np.arange(256, dtype=np.uint8).reshape(16, 16) % 251).astype(np.uint8)
    return RasterImage(arr)


@pytest.fixture
def rgb_image():
    rng = np.random.default_rng(7)
    return RasterImage(rng.integers(0, 256, size=(24, 32, 3), dtype=np.uint8))


def make_parts(*specs) -> PartSet:
    return PartSet(tuple(PartAnnotation(name, box) for name, box in specs))
