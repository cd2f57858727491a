# Copyright (c) 2026 The causalicm developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies or
# substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

from collections import namedtuple
import logging
import queue
import threading

TaskFailure = namedtuple("TaskFailure", "key error")


class Executor(object):
    """Runs a fixed set of tasks on worker threads and hands back results ordered by key."""

    def __init__(self, jobs=1):
        self.jobs = max(1, int(jobs))
        self.logger = logging.getLogger("CausalICM")

    def run(self, tasks):
        """Execute (key, callable, args) tasks. A task that raises yields a TaskFailure."""
        tasks = list(tasks)
        results = {}
        if self.jobs == 1 or len(tasks) <= 1:
            for key, func, args in tasks:
                results[key] = self.execute(key, func, args)
        else:
            task_q = queue.Queue()
            for task in tasks:
                task_q.put(task)
            lock = threading.Lock()
            workers = [threading.Thread(name="Worker-{0}".format(i), target=self.loop,
                                        args=(task_q, results, lock))
                       for i in range(min(self.jobs, len(tasks)))]
            for worker in workers:
                worker.start()
            for worker in workers:
                worker.join()
        return [results[key] for key in sorted(results)]

    def loop(self, task_q, results, lock):
        """Worker loop"""
        self.logger.debug("Thread created.")
        while True:
            try:
                key, func, args = task_q.get_nowait()
            except queue.Empty:
                # Queue drained, worker exits
                break
            outcome = self.execute(key, func, args)
            with lock:
                results[key] = outcome
            task_q.task_done()

    def execute(self, key, func, args):
        try:
            return func(*args) if args else func()
        except Exception as e:
            self.logger.warning("Task {0} failed: {1}".format(key, e))
            return TaskFailure(key, e)
