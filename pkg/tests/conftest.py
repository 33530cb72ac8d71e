import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", max_examples=15, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def matrix_band():
    from passive_bounds import FrequencyBand

    return FrequencyBand(0.5, 1.5)


@pytest.fixture(scope="session")
def matrix_models():
    from passive_bounds import GeneralizedLorentzLossless, LossyDrude, LossyLorentz, constant

    return {
        "drude_g0": LossyDrude(1.0, 1.0, 0.0),
        "drude_g0.1": LossyDrude(1.0, 1.0, 0.1),
        "drude_g1": LossyDrude(1.0, 1.0, 1.0),
        "lorentz": LossyLorentz(1.0, ((1.0, 4.0, 0.2),)),
        "lorentz_lossless": GeneralizedLorentzLossless(1.0, ((1.0, 4.0),)),
        "constant": constant(1.0),
    }


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_log.LINES):
        for line in acceptance_log.LINES[k]:
            terminalreporter.write_line(line)
