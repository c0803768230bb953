import pytest

from oocran.errors import IllegalTransition, InvariantViolation
from oocran.model import (
    ActuatorBinding,
    Flavor,
    NetworkDef,
    NetworkRole,
    NetworkService,
    NSDescriptor,
    NsState,
    RadioRequirements,
    VNFDescriptor,
    VNFInstance,
    VnfRole,
    VnfState,
    transition,
    transition_vnf,
    validate_descriptor,
)

from conftest import small_descriptor


def make_ns(state=NsState.PENDING, **kw):
    return NetworkService(id="ns-000001", descriptor=small_descriptor(), state=state, **kw)


def test_descriptor_round_trip():
    d = small_descriptor(bindings=(ActuatorBinding("overload", "scale-up"),))
    again = NSDescriptor.from_dict(d.to_dict())
    assert again == d


def test_vnf_descriptor_optional_fields_round_trip():
    v = VNFDescriptor(
        name="enb",
        image="enodeb",
        flavor=Flavor(2, 2048),
        role=VnfRole.ENODEB_TX,
        networks=(NetworkRole.MANAGEMENT,),
        radio_requirements=RadioRequirements(1.4e6, 20.0),
        boot_time_s=30.12,
        location=(52.0, 0.0),
    )
    doc = v.to_dict()
    assert doc["boot_time_s"] == 30.12
    assert doc["location"] == [52.0, 0.0]
    assert VNFDescriptor.from_dict(doc) == v


def test_validate_accepts_well_formed_descriptor():
    assert validate_descriptor(small_descriptor()) == []


def test_validate_requires_management_network():
    d = small_descriptor()
    bad = NSDescriptor(
        name=d.name,
        vnfs=d.vnfs,
        networks=tuple(n for n in d.networks if n.role is not NetworkRole.MANAGEMENT),
    )
    report = validate_descriptor(bad)
    assert any("MANAGEMENT" in line for line in report)


def test_validate_rejects_second_dataflow_network():
    d = small_descriptor()
    bad = NSDescriptor(
        name=d.name,
        vnfs=d.vnfs,
        networks=d.networks + (NetworkDef(NetworkRole.DATAFLOW, "192.168.9.0/24"),),
    )
    assert any("DATAFLOW" in line for line in validate_descriptor(bad))


@pytest.mark.parametrize("cidr", ["not-a-cidr", "10.0.0.0/31", "10.0.0.1/24", "::1/128"])
def test_validate_rejects_bad_cidrs(cidr):
    bad = small_descriptor(mgmt_cidr=cidr)
    assert any(".cidr" in line for line in validate_descriptor(bad))


def test_validate_rejects_empty_vnf_list():
    bad = NSDescriptor(
        name="empty",
        vnfs=(),
        networks=(NetworkDef(NetworkRole.MANAGEMENT, "192.168.0.0/24"),),
    )
    assert any("at least one VNF" in line for line in validate_descriptor(bad))


def test_validate_rejects_duplicate_vnf_names():
    d = small_descriptor(n_enodebs=1)
    bad = NSDescriptor(name=d.name, vnfs=d.vnfs + (d.vnfs[-1],), networks=d.networks)
    assert any("duplicate" in line for line in validate_descriptor(bad))


def test_validate_requires_radio_requirements_for_radio_roles():
    v = VNFDescriptor(
        name="ue",
        image="ue",
        flavor=Flavor(1, 512),
        role=VnfRole.UE,
        networks=(NetworkRole.MANAGEMENT,),
    )
    bad = NSDescriptor(
        name="x",
        vnfs=(v,),
        networks=(NetworkDef(NetworkRole.MANAGEMENT, "192.168.0.0/24"),),
    )
    assert any("radio_requirements" in line for line in validate_descriptor(bad))


def test_validate_rejects_undeclared_network_reference():
    v = VNFDescriptor(
        name="src",
        image="src",
        flavor=Flavor(1, 512),
        role=VnfRole.DATA_SOURCE,
        networks=(NetworkRole.MANAGEMENT, NetworkRole.DATAFLOW),
    )
    bad = NSDescriptor(
        name="x",
        vnfs=(v,),
        networks=(NetworkDef(NetworkRole.MANAGEMENT, "192.168.0.0/24"),),
    )
    assert any("undeclared" in line for line in validate_descriptor(bad))


def test_validate_rejects_duplicate_alarm_bindings():
    d = small_descriptor(
        bindings=(
            ActuatorBinding("overload", "scale-up"),
            ActuatorBinding("overload", "scale-down"),
        )
    )
    assert any("unique" in line for line in validate_descriptor(d))


def test_ns_happy_path_transitions():
    ns = make_ns()
    for target in (NsState.DEPLOYING, NsState.ACTIVE, NsState.RECONFIGURING,
                   NsState.ACTIVE, NsState.TERMINATING, NsState.TERMINATED):
        ns = transition(ns, target, at=1.0)
    assert ns.state is NsState.TERMINATED
    assert [h.target for h in ns.history] == [
        "DEPLOYING", "ACTIVE", "RECONFIGURING", "ACTIVE", "TERMINATING", "TERMINATED",
    ]


@pytest.mark.parametrize(
    "source,target",
    [
        (NsState.PENDING, NsState.ACTIVE),
        (NsState.DEPLOYING, NsState.TERMINATING),
        (NsState.ACTIVE, NsState.DEPLOYING),
        (NsState.TERMINATED, NsState.DEPLOYING),
        (NsState.FAILED, NsState.ACTIVE),
        (NsState.TERMINATING, NsState.ACTIVE),
    ],
)
def test_ns_rejects_non_edges(source, target):
    with pytest.raises(IllegalTransition):
        transition(make_ns(state=source), target, at=0.0)


def test_failed_ns_can_only_terminate():
    ns = transition(make_ns(state=NsState.FAILED), NsState.TERMINATING, at=2.0)
    assert ns.state is NsState.TERMINATING


def test_terminated_requires_released_resources():
    ns = make_ns(state=NsState.TERMINATING, vnf_instances=("vnf-000001",))
    with pytest.raises(InvariantViolation):
        transition(ns, NsState.TERMINATED, at=3.0)


def test_transition_records_timestamp():
    ns = transition(make_ns(), NsState.DEPLOYING, at=12.5)
    assert ns.state_changed_at == 12.5
    assert ns.history[-1].at == 12.5


def make_vnf(state=VnfState.BOOTING):
    return VNFInstance(
        id="vnf-000001",
        descriptor=small_descriptor().vnfs[0],
        vm_id="vm-000001",
        state=state,
    )


def test_vnf_happy_path():
    v = make_vnf()
    for target in (VnfState.RUNNING, VnfState.RECONFIGURING, VnfState.RUNNING,
                   VnfState.STOPPED):
        v = transition_vnf(v, target)
    assert v.state is VnfState.STOPPED


@pytest.mark.parametrize(
    "source,target",
    [
        (VnfState.BOOTING, VnfState.RECONFIGURING),
        (VnfState.STOPPED, VnfState.RUNNING),
        (VnfState.ERROR, VnfState.RUNNING),
        (VnfState.RECONFIGURING, VnfState.STOPPED),
    ],
)
def test_vnf_rejects_non_edges(source, target):
    with pytest.raises(IllegalTransition):
        transition_vnf(make_vnf(state=source), target)


def test_vnf_error_recovery_is_stop_only():
    v = transition_vnf(make_vnf(state=VnfState.ERROR), VnfState.STOPPED)
    assert v.state is VnfState.STOPPED
