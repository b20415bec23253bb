import os

import hypothesis
import numpy as np
import pytest

from mdscat import config, datasets, pipeline

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=8, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def data_file(name):
    try:
        return pipeline._locate(datasets.data_root(), name)
    except Exception:
        return None


def have(*names):
    return all(data_file(n) is not None for n in names)


needs_usps = pytest.mark.skipif(not have("zip.train", "zip.test"),
                                reason="USPS files (zip.train, zip.test) not found under the data root")
needs_isolet = pytest.mark.skipif(not have("isolet1+2+3+4.data", "isolet5.data"),
                                  reason="Isolet files not found under the data root")
needs_glass = pytest.mark.skipif(not have("glass.data"), reason="glass.data not found")
needs_yeast = pytest.mark.skipif(not have("yeast.data"), reason="yeast.data not found")


@pytest.fixture(scope="session")
def digit_images():
    """50 handwritten digits at 16 x 16 in [0, 1]: USPS when present, else
    scikit-learn's 8 x 8 digits upsampled (a stand-in with similar content)."""
    if have("zip.train", "zip.test"):
        train = pipeline.load_data(config.reference_config("usps"))["train"]
        return train.samples[:50], "usps"
    sk = pytest.importorskip("sklearn.datasets")
    from mdscat.pyramid import resample
    imgs = resample(sk.load_digits().images[:50] / 16.0, (16, 16))
    return np.clip(imgs, 0.0, 1.0), "sklearn-digits"


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record the one-line verdict of an acceptance criterion for the summary."""
    def record(text):
        ACCEPTANCE_LINES.append(text)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
