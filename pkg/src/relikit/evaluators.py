"""Limit-state evaluator interfaces.

An evaluator maps a real vector of length ``n_r`` to a scalar performance
value; values <= 0 denote failure. In-process evaluators wrap a vectorized
function; external models attach through a line-oriented subprocess
protocol (one whitespace-separated input vector per line on stdin, one
scalar per line on stdout).
"""
from __future__ import annotations

import subprocess

import numpy as np


class EvaluatorError(RuntimeError):
    """Evaluator produced no value or a non-finite one."""


class LimitState:
    """Pure performance function with batch evaluation.

    Pointwise calls delegate to the batch path, so batch and pointwise
    results agree bit for bit.
    """

    def __init__(self, batch_fn, n_r: int, name: str = ""):
        self._batch_fn = batch_fn
        self.n_r = n_r
        self.name = name

    def batch(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_r:
            raise ValueError(f"{self.name or 'limit state'} expects dimension {self.n_r}, got {x.shape[1]}")
        return np.asarray(self._batch_fn(x), dtype=float)

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])


def evaluate_batch(g, x: np.ndarray) -> np.ndarray:
    """Evaluate ``g`` on the rows of ``x``, using its batch path if any."""
    if hasattr(g, "batch"):
        return np.asarray(g.batch(x), dtype=float)
    return np.array([float(g(row)) for row in x], dtype=float)


class SubprocessEvaluator:
    """Adapter for an external model speaking the line protocol.

    The command is spawned once and fed one vector per line; each line of
    output must parse as a single float. Use as a context manager or call
    ``close()`` when done.
    """

    def __init__(self, command, n_r: int, name: str = "subprocess"):
        self.command = list(command)
        self.n_r = n_r
        self.name = name
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._proc

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x, dtype=float)[None, :])[0])

    def batch(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_r:
            raise ValueError(f"{self.name} expects dimension {self.n_r}, got {x.shape[1]}")
        proc = self._ensure()
        out = np.empty(x.shape[0])
        try:
            for i, row in enumerate(x):
                proc.stdin.write(" ".join(repr(float(v)) for v in row) + "\n")
                proc.stdin.flush()
                line = proc.stdout.readline()
                if not line:
                    raise EvaluatorError(f"{self.name}: evaluator exited before answering row {i}")
                out[i] = float(line)
        except (BrokenPipeError, ValueError) as exc:
            raise EvaluatorError(f"{self.name}: protocol failure: {exc}") from exc
        return out

    def close(self):
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=10)
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
