import json

import pytest

from oocran.errors import UnknownNS, UnknownTask
from oocran.tasks import TaskKind, TaskQueue, TaskState


def ok_driver(task):
    return {"ok": True}


OK_DRIVERS = {kind: ok_driver for kind in TaskKind}


def test_tasks_for_one_service_run_in_submission_order():
    q = TaskQueue()
    ran = []
    drivers = {kind: (lambda t: ran.append(t.task_id) or {}) for kind in TaskKind}
    first = q.enqueue("ns-1", TaskKind.ALLOCATE_SLICE)
    second = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    third = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    q.drain(drivers)
    assert ran == [first.task_id, second.task_id, third.task_id]


def test_services_interleave_but_keep_internal_order():
    q = TaskQueue()
    ran = []
    drivers = {kind: (lambda t: ran.append((t.ns_id, t.task_id)) or {}) for kind in TaskKind}
    a1 = q.enqueue("ns-a", TaskKind.DEPLOY_VNF)
    b1 = q.enqueue("ns-b", TaskKind.DEPLOY_VNF)
    a2 = q.enqueue("ns-a", TaskKind.DEPLOY_VNF)
    q.drain(drivers)
    per_a = [tid for ns, tid in ran if ns == "ns-a"]
    assert per_a == [a1.task_id, a2.task_id]
    assert (b1.ns_id, b1.task_id) in ran


def test_failed_attempt_retries_in_place_and_succeeds():
    q = TaskQueue(max_retries=3)
    calls = {"n": 0}

    def flaky(task):
        calls["n"] += 1
        if calls["n"] < 3:
            raise RuntimeError("transient")
        return {"ok": True}

    blocked = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    follower = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    ran = []
    drivers = dict(OK_DRIVERS)
    drivers[TaskKind.DEPLOY_VNF] = lambda t: (
        ran.append(t.task_id), flaky(t) if t.task_id == blocked.task_id else {"ok": True}
    )[1]
    q.drain(drivers, now=9.0)
    assert blocked.state is TaskState.DONE
    assert blocked.attempts == 3
    assert blocked.error is None
    assert blocked.finished_at == 9.0
    # retry happened in place: the follower never overtook the flaky head
    assert ran == [blocked.task_id] * 3 + [follower.task_id]


def test_retries_exhaust_into_failed_with_callback():
    failed = []
    q = TaskQueue(max_retries=3, on_failed=failed.append)

    def always(task):
        raise RuntimeError("permanent")

    task = q.enqueue("ns-1", TaskKind.ALLOCATE_SLICE)
    q.drain({TaskKind.ALLOCATE_SLICE: always}, now=4.0)
    assert task.state is TaskState.FAILED
    assert task.attempts == 4  # initial attempt plus three retries
    assert "permanent" in task.error
    assert task.finished_at == 4.0
    assert failed == [task]


def test_attempts_never_exceed_retry_budget():
    q = TaskQueue(max_retries=0)
    task = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    q.drain({TaskKind.DEPLOY_VNF: (lambda t: (_ for _ in ()).throw(RuntimeError("x")))})
    assert task.attempts == 1 == q.max_retries + 1


def test_failed_head_unblocks_followers():
    q = TaskQueue(max_retries=0)
    head = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    tail = q.enqueue("ns-1", TaskKind.DELETE_VNF)

    def head_fails(task):
        raise RuntimeError("boom")

    q.drain({TaskKind.DEPLOY_VNF: head_fails, TaskKind.DELETE_VNF: ok_driver})
    assert head.state is TaskState.FAILED
    assert tail.state is TaskState.DONE


def test_liveness_guard_rejects_unknown_service():
    q = TaskQueue(liveness=lambda ns_id: ns_id == "ns-alive")
    q.enqueue("ns-alive", TaskKind.DEPLOY_VNF)
    with pytest.raises(UnknownNS):
        q.enqueue("ns-dead", TaskKind.DEPLOY_VNF)


def test_get_and_unknown_task():
    q = TaskQueue()
    t = q.enqueue("ns-1", TaskKind.RUN_ACTUATOR, {"alarm": "overload"}, now=2.0)
    assert q.get(t.task_id) is t
    assert t.submitted_at == 2.0
    with pytest.raises(UnknownTask):
        q.get("task-999999")


def test_missing_driver_counts_as_failed_attempt():
    q = TaskQueue(max_retries=0)
    task = q.enqueue("ns-1", TaskKind.RUN_ACTUATOR)
    q.drain({})
    assert task.state is TaskState.FAILED
    assert "no driver" in task.error


def test_cancel_pending_skips_running_and_done():
    q = TaskQueue()
    done = q.enqueue("ns-1", TaskKind.ALLOCATE_SLICE)
    q.run_worker_step(OK_DRIVERS)
    queued = q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    other = q.enqueue("ns-2", TaskKind.DEPLOY_VNF)
    cancelled = q.cancel_pending("ns-1", "service failed", now=7.0)
    assert cancelled == [queued]
    assert queued.state is TaskState.FAILED
    assert queued.error == "cancelled: service failed"
    assert queued.finished_at == 7.0
    assert done.state is TaskState.DONE
    assert other.state is TaskState.QUEUED


def test_cancel_pending_does_not_invoke_on_failed():
    failed = []
    q = TaskQueue(on_failed=failed.append)
    q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    q.cancel_pending("ns-1", "rollback")
    assert failed == []


def test_drain_is_idempotent_once_idle():
    q = TaskQueue()
    q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    assert q.drain(OK_DRIVERS) == 1
    assert q.drain(OK_DRIVERS) == 0
    assert q.pending_count() == 0


def test_pending_count_tracks_unfinished_work():
    q = TaskQueue()
    q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    q.enqueue("ns-2", TaskKind.DEPLOY_VNF)
    assert q.pending_count() == 2
    q.run_worker_step(OK_DRIVERS)
    assert q.pending_count() == 1


def test_export_log_is_one_json_object_per_task():
    q = TaskQueue()
    q.enqueue("ns-1", TaskKind.ALLOCATE_SLICE, {"bandwidth_hz": 1.4e6})
    q.enqueue("ns-1", TaskKind.DEPLOY_VNF)
    q.drain(OK_DRIVERS)
    lines = [json.loads(line) for line in q.export_log().splitlines()]
    assert [l["kind"] for l in lines] == ["ALLOCATE_SLICE", "DEPLOY_VNF"]
    assert all(l["state"] == "DONE" for l in lines)
    assert lines[0]["payload"] == {"bandwidth_hz": 1.4e6}


def test_task_ids_are_sequential_and_unique():
    q = TaskQueue()
    ids = [q.enqueue("ns-1", TaskKind.DEPLOY_VNF).task_id for _ in range(3)]
    assert ids == ["task-000001", "task-000002", "task-000003"]
