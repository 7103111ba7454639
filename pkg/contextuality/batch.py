"""
Concurrent execution of independent document pipelines
"""
from concurrent.futures import ThreadPoolExecutor, as_completed
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence
import logging
import time

from .config import MAX_WORKERS

logger = logging.getLogger(__name__)


class TaskStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class BatchTask:
    """One pipeline run over one input; failures are recorded, never raised"""

    def __init__(self, name: str, func: Callable, *args, **kwargs):
        self.name = name
        self.func = func
        self.args = args
        self.kwargs = kwargs
        self.status = TaskStatus.PENDING
        self.error: Optional[BaseException] = None

    def run(self) -> Dict:
        self.status = TaskStatus.RUNNING
        start_time = time.perf_counter()
        try:
            logger.debug(f"Running task: {self.name}")
            result = self.func(*self.args, **self.kwargs)
            self.status = TaskStatus.COMPLETED
            duration = time.perf_counter() - start_time
            logger.info(f"Task {self.name} completed in {duration:.2f}s")
            return {
                'name': self.name,
                'status': self.status.value,
                'duration_seconds': duration,
                'result': result,
            }
        except Exception as e:
            self.status = TaskStatus.FAILED
            self.error = e
            duration = time.perf_counter() - start_time
            logger.error(f"Task {self.name} failed after {duration:.2f}s: {e}")
            return {
                'name': self.name,
                'status': self.status.value,
                'duration_seconds': duration,
                'error': str(e),
                'error_type': type(e).__name__,
            }


class BatchRunner:
    def __init__(self, max_workers: int = MAX_WORKERS):
        if max_workers < 1:
            raise ValueError(f"max_workers must be positive, got {max_workers}")
        self.max_workers = max_workers

    def run_all(self, tasks: Sequence[BatchTask]) -> List[Dict]:
        """Run tasks on a thread pool; results come back in submission order"""
        results: List[Optional[Dict]] = [None] * len(tasks)
        logger.info(f"Running {len(tasks)} tasks with {self.max_workers} workers")
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(task.run): i for i, task in enumerate(tasks)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
        failed = sum(1 for r in results if r['status'] == TaskStatus.FAILED.value)
        if failed:
            logger.warning(f"{failed} of {len(tasks)} tasks failed")
        return results
