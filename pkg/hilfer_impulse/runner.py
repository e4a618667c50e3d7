import ctypes
import logging
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from hilfer_impulse.conf import setting
from hilfer_impulse.exceptions import HilferError, SolveTimeout

logger = logging.getLogger(__name__)


class LoopingTimer:
    """
    check() comes back true at most once per `interval` seconds.
    """

    def __init__(self, interval: float, trigger_at_start: bool = True):
        self.interval = interval
        self.due: float | None = None if trigger_at_start else time.monotonic() + interval

    def check(self) -> bool:
        now = time.monotonic()
        if self.due is not None and now < self.due:
            return False
        self.due = now + self.interval
        return True


@dataclass
class Task:
    name: str
    function: Callable[[], Any]


@dataclass
class TaskResult:
    name: str
    value: Any = None
    error: BaseException | None = None
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class Assignment:
    index: int
    task: Task
    deadline: float


class SolveRunner:
    """
    Runs independent tasks (usually solves) on a pool of worker threads,
    killing any that run past their deadline. Results come back in task
    order so callers can write their outputs deterministically.
    """

    loop_delay = 0.05

    def __init__(
        self,
        concurrency: int | None = None,
        task_deadline: float | None = None,
        progress_interval: float | None = None,
    ):
        self.concurrency = concurrency or setting("CONCURRENCY")
        self.task_deadline = task_deadline or setting("TASK_DEADLINE")
        self.progress_interval = progress_interval or setting("PROGRESS_INTERVAL")
        self.results: dict[int, TaskResult] = {}
        self.lock = threading.Lock()
        self.workers: list["WorkerThread"] = []

    def run(self, tasks: list[Task]) -> list[TaskResult]:
        started = time.monotonic()
        self.results = {}
        queue = list(enumerate(tasks))
        progress = LoopingTimer(self.progress_interval, trigger_at_start=False)
        self.workers = [WorkerThread(self) for _ in range(min(self.concurrency, max(1, len(tasks))))]
        for worker in self.workers:
            worker.start()
        logger.info(f"Running {len(tasks)} tasks on {len(self.workers)} threads")
        try:
            while len(self.results) < len(tasks):
                self.check_worker_deadlines()
                for worker in self.idle_workers():
                    if not queue:
                        break
                    self.assign(worker, *queue.pop(0))
                if progress.check():
                    logger.info(
                        f"{len(self.results)}/{len(tasks)} tasks complete ({time.monotonic() - started:.2f}s)"
                    )
                time.sleep(self.loop_delay)
        finally:
            for worker in self.workers:
                worker.shutdown = True
            for worker in self.workers:
                worker.join()
        logger.info(f"Complete ({time.monotonic() - started:.2f}s)")
        return [self.results[index] for index in range(len(tasks))]

    def idle_workers(self) -> list["WorkerThread"]:
        return [worker for worker in self.workers if worker.is_alive() and worker.assignment is None]

    def assign(self, worker: "WorkerThread", index: int, task: Task):
        worker.assignment = Assignment(index, task, time.monotonic() + self.task_deadline)

    def check_worker_deadlines(self):
        """
        Records a timeout for every overdue task and raises SolveTimeout
        inside the thread running it.
        """
        now = time.monotonic()
        for worker in self.workers:
            assignment = worker.assignment
            if assignment is None or assignment.deadline > now or worker.killed:
                continue
            if assignment.index in self.results:
                # Finished, just not cleared yet
                continue
            name = assignment.task.name
            logger.warning(f"{name}: over its {self.task_deadline}s deadline, killing")
            self.record(
                assignment.index,
                TaskResult(
                    name,
                    error=SolveTimeout(f"{name} exceeded {self.task_deadline}s"),
                    duration=now - (assignment.deadline - self.task_deadline),
                ),
            )
            worker.killed = True
            # CPython only delivers this between bytecodes, so a solve stuck
            # inside one long C call is killed when it returns
            assert worker.ident is not None
            ctypes.pythonapi.PyThreadState_SetAsyncExc(
                ctypes.c_ulong(worker.ident), ctypes.py_object(SolveTimeout)
            )

    def record(self, index: int, result: TaskResult):
        """
        Stores a result unless the task already has one (from a timeout).
        """
        with self.lock:
            self.results.setdefault(index, result)


class WorkerThread(threading.Thread):
    def __init__(self, runner: SolveRunner):
        super().__init__(daemon=True)
        self.runner = runner
        self.assignment: Assignment | None = None
        self.killed = False
        self.shutdown = False

    def run(self):
        while not self.shutdown or self.assignment is not None:
            try:
                if self.assignment is None:
                    time.sleep(0.01)
                    continue
                try:
                    self.runner.record(self.assignment.index, self.perform(self.assignment.task))
                finally:
                    self.release()
            except SolveTimeout:
                # A kill can land after the task finished, or in a later one
                self.release()

    def release(self):
        """
        Clears the current assignment, recording a timeout for it if it
        ended without a result.
        """
        assignment = self.assignment
        if assignment is not None:
            self.runner.record(
                assignment.index,
                TaskResult(assignment.task.name, error=SolveTimeout(f"{assignment.task.name} was killed")),
            )
        self.assignment = None
        self.killed = False

    def perform(self, task: Task) -> TaskResult:
        started = time.monotonic()
        try:
            result = TaskResult(task.name, value=task.function())
        except HilferError as error:
            logger.info(f"{task.name}: failed: {error}")
            result = TaskResult(task.name, error=error)
        except Exception as error:
            logger.exception(f"{task.name}: unexpected error")
            result = TaskResult(task.name, error=error)
        result.duration = time.monotonic() - started
        logger.info(f"{task.name}: done ({result.duration:.2f}s)")
        return result
