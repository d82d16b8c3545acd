import numpy as np
import pytest

from smathermal.actuator import (
    air,
    build_network,
    paper_bare_spec,
    paper_drive,
    paper_encapsulated_spec,
    water,
)
from smathermal.simulator import SimTrace


@pytest.fixture
def enc_water():
    return build_network(paper_encapsulated_spec(), water())


@pytest.fixture
def enc_air():
    return build_network(paper_encapsulated_spec(), air())


@pytest.fixture
def bare_water():
    return build_network(paper_bare_spec(), water())


@pytest.fixture
def bare_air():
    return build_network(paper_bare_spec(), air())


@pytest.fixture
def drive():
    return paper_drive()


def make_trace(t, temps, period=1.0, on_time=0.07):
    """Bare SimTrace around arbitrary samples, for testing post-processing."""
    t = np.asarray(t, dtype=float)
    temps = np.asarray(temps, dtype=float).reshape(t.size, -1)
    return SimTrace(
        time=t,
        temperatures=temps,
        pwm=np.zeros(t.size, bool),
        heat_input=np.zeros(t.size),
        node_labels=["sma"],
        period=period,
        on_time=on_time,
        ambient_temperature=293.15,
        heat_capacities=np.ones(temps.shape[1]),
        energy_in=0.0,
        energy_out=0.0,
        method="synthetic",
    )
