"""Fixed-interval scheduling with jitter and overlap suppression.

Each activation reruns every ``frequency × (1 ± 0.1)`` seconds (uniform
jitter keeps many activations from stampeding in lockstep). One activation
never runs concurrently with itself: if a run is still in flight when the next
slot arrives, the slot is recorded as skipped and the interval restarts.
"""

from __future__ import annotations

import logging
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

log = logging.getLogger("annohub.wrapper.scheduler")

JITTER_FRACTION = 0.1


def next_delay(frequency_seconds: float, rng: random.Random) -> float:
    """Seconds until the next run: the interval with up to ±10% jitter."""
    return frequency_seconds * rng.uniform(1.0 - JITTER_FRACTION, 1.0 + JITTER_FRACTION)


@dataclass
class ScheduledJob:
    name: str
    frequency_seconds: float
    runner: Callable[[], object]
    next_due: float
    running: threading.Lock = field(default_factory=threading.Lock)
    history: list[dict] = field(default_factory=list)


class Scheduler:
    """In-process scheduler. ``poll`` is separated from the wall-clock loop so
    tests can drive it with a fake clock."""

    def __init__(self, clock: Callable[[], float] = time.monotonic, rng: random.Random | None = None):
        self._clock = clock
        self._rng = rng if rng is not None else random.Random()
        self._jobs: dict[str, ScheduledJob] = {}
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def add(self, name: str, frequency_seconds: float, runner: Callable[[], object]) -> ScheduledJob:
        job = ScheduledJob(
            name=name,
            frequency_seconds=frequency_seconds,
            runner=runner,
            next_due=self._clock() + next_delay(frequency_seconds, self._rng),
        )
        self._jobs[name] = job
        return job

    def trigger(self, name: str, wait: bool = False) -> bool:
        """Fire a job now. Returns False (and records the skip) if the
        previous run of the same job is still in flight."""
        job = self._jobs[name]
        if not job.running.acquire(blocking=False):
            job.history.append({"at": self._clock(), "status": "skippedOverlap"})
            log.info("skipping %s: previous run still in flight", name)
            return False

        def run():
            try:
                result = job.runner()
                entry = {"at": self._clock(), "status": "ran"}
                to_json = getattr(result, "to_json", None)
                if callable(to_json):
                    entry["report"] = to_json()
                job.history.append(entry)
            except Exception as exc:
                job.history.append({"at": self._clock(), "status": "error", "reason": str(exc)})
                log.exception("run of %s failed", name)
            finally:
                job.running.release()

        if wait:
            run()
            return True
        threading.Thread(target=run, name=f"annohub-job-{name}", daemon=True).start()
        return True

    def poll(self) -> list[str]:
        """Fire every due job (non-blocking); returns the names fired or
        skipped. Sets each fired job's next slot regardless of outcome."""
        now = self._clock()
        touched = []
        for job in list(self._jobs.values()):
            if now >= job.next_due:
                job.next_due = now + next_delay(job.frequency_seconds, self._rng)
                self.trigger(job.name)
                touched.append(job.name)
        return touched

    def start(self, tick_seconds: float = 1.0) -> None:
        if self._thread is not None:
            return
        self._stop.clear()

        def loop():
            while not self._stop.wait(tick_seconds):
                self.poll()

        self._thread = threading.Thread(target=loop, name="annohub-scheduler", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
