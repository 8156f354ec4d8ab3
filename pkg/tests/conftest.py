import pytest

from flighttutor.autopilot import ExpertGains, TaskSpec, generate_demos
from flighttutor.simulator import SimParams


@pytest.fixture(scope="session")
def params():
    return SimParams()


@pytest.fixture(scope="session")
def gains():
    return ExpertGains()


@pytest.fixture(scope="session")
def small_dataset(params, gains):
    # 3 trials x 5 s: enough structure for round-trip and training-path tests
    return generate_demos(3, 5.0, gains, params, seed=11)


@pytest.fixture()
def capture_task():
    return TaskSpec(
        target_heading=25.0,
        target_altitude=1000.0,
        target_airspeed=60.0,
        duration=30.0,
        seed=0,
        initial_heading=0.0,
    )
