import pytest

from oocran.model import (
    Flavor,
    NetworkDef,
    NetworkRole,
    NSDescriptor,
    RadioRequirements,
    VNFDescriptor,
    VnfRole,
)
from oocran.scenario import build_orchestrator, default_scenario


def relaxed_scenario(**overrides):
    """Scenario with enough compute and spectrum for the largest workloads."""
    scn = default_scenario()
    scn["hosts"] = [
        {"id": "host-1", "vcpus": 128, "ram_mb": 262144},
        {"id": "host-2", "vcpus": 128, "ram_mb": 262144},
    ]
    scn["spectrum"] = {
        "f_start_hz": 2.6e9,
        "f_end_hz": 2.8e9,
        "reuse_distance_m": 60.0,
    }
    scn["rrhs"] = []
    scn.update(overrides)
    return scn


def small_descriptor(
    name="svc",
    n_enodebs=1,
    with_source=True,
    boot_time_s=0.0,
    bindings=(),
    mgmt_cidr="192.168.0.0/24",
    data_cidr="192.168.1.0/24",
):
    """Minimal downlink-style service: optional data source plus n cells."""
    vnfs = []
    if with_source:
        vnfs.append(
            VNFDescriptor(
                name="source",
                image="traffic-source",
                flavor=Flavor(vcpus=1, ram_mb=512),
                role=VnfRole.DATA_SOURCE,
                networks=(NetworkRole.MANAGEMENT, NetworkRole.DATAFLOW),
                boot_time_s=boot_time_s,
            )
        )
    for k in range(1, n_enodebs + 1):
        vnfs.append(
            VNFDescriptor(
                name=f"enb-{k}",
                image="enodeb",
                flavor=Flavor(vcpus=2, ram_mb=2048),
                role=VnfRole.ENODEB_TX,
                networks=(NetworkRole.MANAGEMENT, NetworkRole.DATAFLOW),
                radio_requirements=RadioRequirements(
                    bandwidth_hz=1.4e6, tx_power_dbm=20.0
                ),
                boot_time_s=boot_time_s,
            )
        )
    return NSDescriptor(
        name=name,
        vnfs=tuple(vnfs),
        networks=(
            NetworkDef(NetworkRole.MANAGEMENT, mgmt_cidr),
            NetworkDef(NetworkRole.DATAFLOW, data_cidr),
        ),
        actuator_bindings=tuple(bindings),
    )


@pytest.fixture
def engine():
    return build_orchestrator(relaxed_scenario())
