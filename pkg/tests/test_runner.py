import ctypes
import time

from hilfer_impulse.exceptions import ParameterError, SolveTimeout
from hilfer_impulse.runner import LoopingTimer, SolveRunner, Task, WorkerThread


def slow_square(value, delay):
    def run():
        time.sleep(delay)
        return value * value

    return run


def spin_forever():
    # A pure Python loop, so the injected timeout gets delivered
    while True:
        sum(range(1000))


def fail():
    raise ParameterError("mu must be in (0, 1)")


def test_runner_basic():
    """
    Tests that results come back in task order, not completion order
    """
    tasks = [Task(f"square {i}", slow_square(i, 0.3 - 0.1 * i)) for i in range(3)]
    results = SolveRunner(concurrency=3).run(tasks)
    assert [result.name for result in results] == ["square 0", "square 1", "square 2"]
    assert [result.value for result in results] == [0, 1, 4]
    assert all(result.ok for result in results)


def test_runner_errors():
    """
    Tests that a failing task is reported without stopping the others
    """
    results = SolveRunner(concurrency=2).run(
        [Task("fails", fail), Task("works", slow_square(3, 0))]
    )
    assert not results[0].ok
    assert isinstance(results[0].error, ParameterError)
    assert results[1].value == 9


def test_runner_deadline():
    """
    Tests that timing out tasks works, and does not render their worker
    threads useless
    """
    runner = SolveRunner(concurrency=1, task_deadline=1)
    started = time.monotonic()
    results = runner.run([Task("stuck", spin_forever), Task("quick", slow_square(2, 0))])
    assert time.monotonic() - started < 10
    assert isinstance(results[0].error, SolveTimeout)
    assert results[1].value == 4


def killed_midway():
    raise SolveTimeout()


def test_runner_kill_without_result():
    """
    Tests that a task ended by a stray kill still gets a result, so the
    run finishes
    """
    results = SolveRunner(concurrency=1, task_deadline=30).run(
        [Task("killed", killed_midway), Task("after", slow_square(3, 0))]
    )
    assert isinstance(results[0].error, SolveTimeout)
    assert results[1].value == 9


def test_worker_survives_idle_kill():
    runner = SolveRunner(concurrency=1, task_deadline=30)
    worker = WorkerThread(runner)
    worker.start()
    try:
        ctypes.pythonapi.PyThreadState_SetAsyncExc(
            ctypes.c_ulong(worker.ident), ctypes.py_object(SolveTimeout)
        )
        time.sleep(0.1)
        assert worker.is_alive()
        runner.assign(worker, 0, Task("after", slow_square(5, 0)))
        deadline = time.monotonic() + 5
        while 0 not in runner.results and time.monotonic() < deadline:
            time.sleep(0.01)
        assert runner.results[0].value == 25
    finally:
        worker.shutdown = True
        worker.join(5)


def test_looping_timer():
    timer = LoopingTimer(0.2)
    assert timer.check()
    assert not timer.check()
    time.sleep(0.25)
    assert timer.check()
    delayed = LoopingTimer(0.2, trigger_at_start=False)
    assert not delayed.check()
