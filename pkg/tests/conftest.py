import pytest

import optstate as o


@pytest.fixture(scope="session")
def doubling_basic():
    return o.build_scenario("doubling-basic")


@pytest.fixture(scope="session")
def doubling_prop43():
    return o.build_scenario("doubling-prop43")


@pytest.fixture(scope="session")
def rotation_scn():
    return o.build_scenario("rotation-unique-ergodic")


@pytest.fixture(scope="session")
def cocycle_scn():
    return o.build_scenario("cocycle-stability")


@pytest.fixture(scope="session")
def heteroclinic():
    return o.build_scenario("heteroclinic-bowen")
