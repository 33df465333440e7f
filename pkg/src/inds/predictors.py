"""Noise predictors: built-in synthetic ones plus a remote protocol client.

A predictor is any object with ``predict(x, step_index) -> array`` that is
deterministic for a fixed (x, step_index) and preserves shape.
"""

from __future__ import annotations

import socket
import struct
from typing import Protocol

import numpy as np

from .tensors import LtnsFormatError

MSG_EPS_REQUEST = 1
MSG_EPS_RESPONSE = 2
MSG_ERROR = 3


class PredictorError(RuntimeError):
    pass


class NoisePredictor(Protocol):
    def predict(self, x: np.ndarray, step_index: int) -> np.ndarray: ...


class ZeroPredictor:
    """eps = 0; inversion degenerates to the pure alpha-scaling chain."""

    def predict(self, x, step_index):
        return np.zeros_like(x)


class LinearPredictor:
    """eps(x, i) = c_i * x with a fixed per-step coefficient table."""

    def __init__(self, coeff: float = 0.1, per_step: dict[int, float] | None = None):
        self.coeff = coeff
        self.per_step = per_step or {}

    def predict(self, x, step_index):
        return self.per_step.get(step_index, self.coeff) * x


class FrozenRandomPredictor:
    """Seeded random field per step index, independent of x."""

    def __init__(self, seed: int = 0, scale: float = 1.0):
        self.seed = seed
        self.scale = scale
        self._cache: dict[tuple, np.ndarray] = {}

    def predict(self, x, step_index):
        key = (int(step_index), x.shape)
        if key not in self._cache:
            rng = np.random.default_rng([self.seed, int(step_index)])
            self._cache[key] = self.scale * rng.standard_normal(x.shape)
        return self._cache[key]


def _encode_ltns_bytes(arr: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(arr, dtype="<f4")
    head = b"LTNS" + struct.pack("<III", 1, 1, arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + arr.tobytes(order="C")


def _decode_ltns_bytes(blob: bytes) -> np.ndarray:
    if blob[:4] != b"LTNS":
        raise LtnsFormatError(f"bad magic {blob[:4]!r}", 0)
    version, dtype, ndim = struct.unpack_from("<III", blob, 4)
    if version != 1 or dtype != 1:
        raise LtnsFormatError("unsupported version/dtype", 4)
    dims = struct.unpack_from(f"<{ndim}Q", blob, 16)
    count = int(np.prod(dims)) if ndim else 1
    off = 16 + 8 * ndim
    if len(blob) - off < 4 * count:
        raise LtnsFormatError("truncated payload", off)
    return np.frombuffer(blob, dtype="<f4", count=count, offset=off).reshape(dims).astype(np.float64)


class RemotePredictor:
    """Client for the eps service over one duplex TCP stream.

    Frame layout, little endian: u32 msg_type, u32 step_index,
    u32 payload length, then the LTNS-encoded tensor payload.
    """

    def __init__(self, address: str, timeout: float = 30.0):
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise PredictorError(f"bad endpoint address {address!r}, want host:port")
        self.address = (host, int(port))
        self.timeout = timeout
        self._sock: socket.socket | None = None

    def _connect(self):
        if self._sock is None:
            try:
                self._sock = socket.create_connection(self.address, timeout=self.timeout)
            except OSError as exc:
                raise PredictorError(f"cannot reach predictor at {self.address}: {exc}") from exc

    def _recv_exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self._sock.recv(n - len(buf))
            if not chunk:
                raise PredictorError("predictor connection closed mid-frame")
            buf += chunk
        return buf

    def predict(self, x, step_index):
        self._connect()
        payload = _encode_ltns_bytes(x)
        frame = struct.pack("<III", MSG_EPS_REQUEST, int(step_index), len(payload)) + payload
        try:
            self._sock.sendall(frame)
            msg_type, echo_step, length = struct.unpack("<III", self._recv_exact(12))
            body = self._recv_exact(length)
        except OSError as exc:
            self.close()
            raise PredictorError(f"predictor I/O failed: {exc}") from exc
        if msg_type == MSG_ERROR:
            raise PredictorError(f"predictor error: {body.decode('utf-8', 'replace')}")
        if msg_type != MSG_EPS_RESPONSE:
            raise PredictorError(f"unexpected msg_type {msg_type}")
        if echo_step != int(step_index):
            raise PredictorError(f"step_index mismatch: sent {step_index}, got {echo_step}")
        out = _decode_ltns_bytes(body)
        if out.shape != x.shape:
            raise PredictorError(f"shape mismatch: sent {x.shape}, got {out.shape}")
        return out

    def close(self):
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None


def resolve_predictor(spec: str) -> NoisePredictor:
    """Map a predictor spec string to an instance.

    ``builtin:zero``, ``builtin:linear[:coeff]``, ``builtin:frozen[:seed]``,
    or a ``host:port`` remote endpoint.
    """
    if spec.startswith("builtin:"):
        parts = spec.split(":")
        name = parts[1]
        if name == "zero":
            return ZeroPredictor()
        if name == "linear":
            return LinearPredictor(coeff=float(parts[2]) if len(parts) > 2 else 0.1)
        if name == "frozen":
            return FrozenRandomPredictor(seed=int(parts[2]) if len(parts) > 2 else 0)
        raise PredictorError(f"unknown builtin predictor {name!r}")
    return RemotePredictor(spec)
