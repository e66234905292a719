"""Shared fixtures/helpers and the acceptance-summary terminal hook."""

import numpy as np
import pytest

from frailclust.data import SurvivalDataset
from frailclust.hazards import make_baseline, make_frailty
from frailclust.likelihood import ModelParams

# registry filled by tests/test_acceptance.py; printed after the run so the
# one-line-per-criterion report survives pytest's output capture
ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    ACCEPTANCE_LINES[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        passed, detail = ACCEPTANCE_LINES[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status} — {detail}")


# ===== tiny deterministic datasets for unit tests =====


def tiny_dataset():
    """3 groups, 8 units, mixed events/censorings, one covariate."""
    time = np.array([2.0, 5.0, 1.0, 3.0, 4.0, 2.5, 6.0, 0.5])
    status = np.array([1, 0, 1, 1, 0, 1, 1, 1])
    x = np.array([0.3, -1.2, 0.8, 0.1, -0.5, 1.5, -0.9, 0.4])
    groups = np.array([1, 1, 1, 2, 2, 2, 3, 3])
    return SurvivalDataset.from_arrays(time=time, status=status, covariates=x, groups=groups)


def random_dataset(rng, n_groups=3, max_group_size=5, n_covariates=1):
    """Random micro-dataset; group sizes in 1..max_group_size."""
    sizes = rng.integers(1, max_group_size + 1, size=n_groups)
    n = int(sizes.sum())
    time = rng.uniform(0.2, 8.0, size=n)
    status = rng.integers(0, 2, size=n)
    if status.sum() == 0:
        status[0] = 1
    x = rng.normal(size=(n, n_covariates))
    groups = np.repeat(np.arange(n_groups) + 1, sizes)
    return SurvivalDataset.from_arrays(time=time, status=status, covariates=x, groups=groups)


def random_params(rng, n_covariates=1, baseline="weibull", frailty="gamma"):
    beta = rng.uniform(-1.0, 1.0, size=n_covariates)
    if baseline == "weibull":
        base = make_baseline("weibull", {"shape": rng.uniform(0.8, 2.5),
                                         "rate": rng.uniform(0.01, 0.5)})
    else:
        base = make_baseline("exponential", {"rate": rng.uniform(0.01, 0.5)})
    theta = rng.uniform(0.2, 1.2)
    return ModelParams(beta=beta, baseline=base, frailty=make_frailty(frailty, theta))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
