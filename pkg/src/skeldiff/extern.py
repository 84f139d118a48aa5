"""Client for an external statevector backend speaking line-delimited JSON.

The adapter is any subprocess that reads one request object per line
({id, task: "statevector", circuit: {n, ops}}) and answers with
{id, statevector: [[re, im], ...]} (little-endian) or {id, error: {kind,
message}}.  Calls are serialized with a lock, so one client can be shared by
the campaign worker pool.
"""
from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

import numpy as np

from .errors import AdapterError
from .lang import Circuit
from .portable import circuit_to_dict
from .simulator import Statevector


class AdapterClient:
    def __init__(self, command: str, timeout: float = 10.0):
        self.command = command
        self.timeout = timeout
        self._lock = threading.Lock()
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise AdapterError(f"could not launch adapter {command!r}: {exc}")
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def statevector(self, c: Circuit) -> Statevector:
        with self._lock:
            self._next_id += 1
            req_id = self._next_id
            request = {"id": req_id, "task": "statevector",
                       "circuit": circuit_to_dict(c)}
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(json.dumps(request) + "\n")
                self._proc.stdin.flush()
            except (OSError, ValueError) as exc:
                raise AdapterError(f"adapter write failed: {exc}")
            while True:
                try:
                    line = self._lines.get(timeout=self.timeout)
                except queue.Empty:
                    raise AdapterError(
                        f"adapter response timed out after {self.timeout}s")
                if line is None:
                    raise AdapterError("adapter closed its output stream")
                line = line.strip()
                if not line:
                    continue
                try:
                    resp = json.loads(line)
                except json.JSONDecodeError:
                    raise AdapterError(f"adapter emitted non-JSON: {line[:80]!r}")
                if resp.get("id") != req_id:
                    continue  # stale response from an earlier timeout
                if "error" in resp:
                    err = resp["error"]
                    raise AdapterError(
                        f"adapter error {err.get('kind')}: {err.get('message')}")
                amps = resp.get("statevector")
                if not isinstance(amps, list) or len(amps) != 2 ** c.qubit_count:
                    raise AdapterError("adapter statevector has wrong length")
                vec = np.array([complex(re, im) for re, im in amps])
                norm = float(np.linalg.norm(vec))
                if abs(norm - 1.0) > 1e-8:
                    raise AdapterError(f"adapter statevector norm {norm} != 1")
                return Statevector(vec, c.qubit_count)

    def close(self):
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
