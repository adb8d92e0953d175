import pytest

from causalcps.distributions import Degenerate, Normal
from causalcps.model import Effect, Rule, Sensor, Subsystem, SubsystemKind, build_model
from causalcps.scenario import chain_fixture, knife_fixture, thermostat_fixture


@pytest.fixture(scope="session")
def knife_doc():
    return knife_fixture()


@pytest.fixture(scope="session")
def knife_model(knife_doc):
    return knife_doc.build()


@pytest.fixture(scope="session")
def knife_reference(knife_doc):
    return knife_doc.run(include_faults=False)


@pytest.fixture(scope="session")
def knife_lid_fault_trace(knife_doc):
    return knife_doc.run(include_faults=True)


@pytest.fixture(scope="session")
def chain_doc():
    return chain_fixture()


@pytest.fixture(scope="session")
def thermostat_doc():
    return thermostat_fixture()


def make_two_sensor_oven():
    """Minimal burner/oven pair: burner On heats the oven two ticks later."""
    sensors = (
        Sensor("burner", (("Off", Degenerate(0.0)), ("On", Degenerate(1.0))), "Off"),
        Sensor("oven_temp", (("Ambient", Normal(20, 2)), ("Hot", Normal(800, 10))), "Ambient"),
        Sensor("spare", (("Idle", Degenerate(9.0)),), "Idle"),
    )
    oven = Subsystem(
        "oven",
        SubsystemKind.COMPONENT,
        ("burner", "oven_temp"),
        (Rule(guard={"burner": "On"}, effects=(Effect("oven_temp", "Hot", 2),)),),
    )
    return build_model(sensors, (oven,))


@pytest.fixture
def oven_model():
    return make_two_sensor_oven()
