"""Storage-cluster simulator: shard slots, failures, repairs, persistence.

A ``Cluster`` holds one shard slot per node (a symbol array or an erased
marker) plus a per-link traffic ledger.  ``fail_nodes`` injects erasures,
``run_repair`` drives the cooperative repair engine against the cluster
and writes the recovered shards back, reporting bandwidth against the
cooperative lower bound.

Shard wire format (one file per node)::

    "ZZMR" | version byte | header length (4 bytes LE) | header | body

The header is a JSON object with exactly the keys n, k, d, h, q, gamma,
instances, node_id, symbol_width; the body packs instances * base symbols
row-major by (instance, symbol index), each in the smallest of 1/2/4
little-endian bytes that holds q-1.

Traffic is counted in field symbols (byte figures are derived, secondary).
Reads of erased slots raise, which is what proves a passing repair never
touched anything but the helper set and the failed nodes' own progress.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ErasedSlotError, ParameterError, ShardFormatError
from .repair import RepairScenario, TrafficLog
from .repair import repair as _run_protocol
from .zigzag import CodeParams

__all__ = [
    "TrafficLedger",
    "Cluster",
    "RepairReport",
    "fail_nodes",
    "run_repair",
    "symbol_width",
    "shard_bytes",
    "parse_shard",
    "save_cluster",
    "load_cluster",
    "generate_data",
    "GENERATOR_VERSION",
    "SHARD_MAGIC",
    "SHARD_VERSION",
]

TrafficLedger = TrafficLog

SHARD_MAGIC = b"ZZMR"
SHARD_VERSION = 1

_HEADER_KEYS = ("n", "k", "d", "h", "q", "gamma", "instances", "node_id",
                "symbol_width")
# Fields that must agree across every shard of one cluster.
_SHARED_KEYS = ("n", "k", "d", "h", "q", "gamma", "instances", "symbol_width")


def symbol_width(q: int) -> int:
    """Smallest of 1, 2, or 4 little-endian bytes that holds q - 1."""
    for width in (1, 2, 4):
        if q - 1 < 256**width:
            return width
    raise ParameterError(f"modulus {q} too large for 4-byte symbols")


class Cluster:
    """n shard slots plus a traffic ledger."""

    def __init__(self, params: CodeParams):
        self.params = params
        self._slots: List[Optional[np.ndarray]] = [None] * params.n
        self.ledger = TrafficLedger(params.n)

    @classmethod
    def from_codeword(cls, params: CodeParams, cw) -> "Cluster":
        cw = np.asarray(cw)
        want = (params.instances, params.n, params.base)
        if cw.shape != want:
            raise ParameterError(f"expected codeword shape {want}, got {cw.shape}")
        cluster = cls(params)
        for i in range(params.n):
            cluster.write(i, cw[:, i, :])
        return cluster

    def _check_node(self, node: int) -> int:
        node = int(node)
        if not 0 <= node < self.params.n:
            raise ParameterError(f"node {node} outside [0, {self.params.n})")
        return node

    def read(self, node: int) -> np.ndarray:
        node = self._check_node(node)
        slot = self._slots[node]
        if slot is None:
            raise ErasedSlotError(f"node {node} is erased")
        return slot.copy()

    def write(self, node: int, data) -> None:
        node = self._check_node(node)
        arr = np.asarray(data)
        want = (self.params.instances, self.params.base)
        if arr.shape != want:
            raise ParameterError(
                f"node {node} data must have shape {want}, got {arr.shape}"
            )
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.params.q):
            raise ParameterError(f"symbols outside [0, {self.params.q})")
        self._slots[node] = arr

    def erase(self, node: int) -> None:
        node = self._check_node(node)
        if self._slots[node] is None:
            raise ParameterError(f"node {node} is already erased")
        erased_after = len(self.erased) + 1
        if erased_after > self.params.parities:
            raise ParameterError(
                f"erasing node {node} would leave {erased_after} erased slots; "
                f"more than n-k = {self.params.parities} means data loss"
            )
        self._slots[node] = None

    @property
    def erased(self) -> Tuple[int, ...]:
        return tuple(i for i, s in enumerate(self._slots) if s is None)

    @property
    def intact(self) -> Tuple[int, ...]:
        return tuple(i for i, s in enumerate(self._slots) if s is not None)

    def codeword(self) -> np.ndarray:
        """All slots as one (instances, n, base) array; erased slots zero."""
        cw = np.zeros((self.params.instances, self.params.n, self.params.base),
                      dtype=np.int64)
        for i, slot in enumerate(self._slots):
            if slot is not None:
                cw[:, i, :] = slot
        return cw


def fail_nodes(cluster: Cluster, failed: Sequence[int]) -> Cluster:
    """Erase exactly h slots and reset the ledger for the coming repair."""
    failed = [int(i) for i in failed]
    if len(set(failed)) != len(failed):
        raise ParameterError(f"failed set {failed} contains duplicates")
    if len(failed) != cluster.params.h:
        raise ParameterError(
            f"this code repairs exactly h={cluster.params.h} failures, "
            f"got {len(failed)}"
        )
    for node in failed:
        cluster.erase(node)
    cluster.ledger.reset()
    return cluster


@dataclass(frozen=True)
class RepairReport:
    params: CodeParams
    failed: Tuple[int, ...]
    helpers: Tuple[int, ...]
    gamma1: int
    gamma2: int
    gamma: int
    bound: int
    optimal: bool
    per_link: np.ndarray
    wall_time_s: float
    naive: bool

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {"n": p.n, "k": p.k, "d": p.d, "h": p.h,
                       "q": p.q, "gamma": p.gamma},
            "I": list(self.failed),
            "J": list(self.helpers),
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "gamma": self.gamma,
            "bound": self.bound,
            "optimal": self.optimal,
            "per_link": [[int(v) for v in row] for row in self.per_link],
            "wall_time_s": self.wall_time_s,
            "naive": self.naive,
            "gamma_bytes": self.gamma * symbol_width(p.q),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_repair(cluster: Cluster,
               helpers: Optional[Sequence[int]] = None) -> RepairReport:
    """Repair whatever is currently erased, write the shards back, and
    report the traffic."""
    params = cluster.params
    failed = cluster.erased
    scen = RepairScenario.plan(params, failed, helpers)
    before = cluster.ledger.matrix.copy()
    start = time.perf_counter()
    outcome = _run_protocol(params, scen, cluster.read, ledger=cluster.ledger)
    wall = time.perf_counter() - start
    for node, data in outcome.repaired.items():
        cluster.write(node, data)
    return RepairReport(
        params=params,
        failed=scen.failed,
        helpers=scen.helpers,
        gamma1=outcome.downloaded,
        gamma2=outcome.exchanged,
        gamma=outcome.total,
        bound=outcome.bound,
        optimal=outcome.optimal,
        per_link=cluster.ledger.matrix - before,
        wall_time_s=wall,
        naive=outcome.naive,
    )


# -- shard serialization -----------------------------------------------------


def shard_bytes(params: CodeParams, node_id: int, data) -> bytes:
    """Serialize one node's symbol array into the shard wire format."""
    if not 0 <= int(node_id) < params.n:
        raise ParameterError(f"node id {node_id} outside [0, {params.n})")
    arr = np.asarray(data)
    want = (params.instances, params.base)
    if arr.shape != want:
        raise ParameterError(f"shard data must have shape {want}, got {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= params.q):
        raise ParameterError(f"symbols outside [0, {params.q})")
    width = symbol_width(params.q)
    header = {
        "n": params.n, "k": params.k, "d": params.d, "h": params.h,
        "q": params.q, "gamma": params.gamma,
        "instances": params.instances,
        "node_id": int(node_id),
        "symbol_width": width,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    body = arr.astype(f"<u{width}").tobytes()
    return SHARD_MAGIC + bytes([SHARD_VERSION]) + struct.pack("<I", len(blob)) + blob + body


def parse_shard(raw: bytes) -> Tuple[dict, np.ndarray]:
    """Parse a shard blob into (header dict, (instances, base) array)."""
    if len(raw) < 9 or raw[:4] != SHARD_MAGIC:
        raise ShardFormatError("bad magic: not a shard file")
    if raw[4] != SHARD_VERSION:
        raise ShardFormatError(f"unsupported shard version {raw[4]}")
    (hlen,) = struct.unpack("<I", raw[5:9])
    if len(raw) < 9 + hlen:
        raise ShardFormatError("truncated header")
    try:
        header = json.loads(raw[9 : 9 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ShardFormatError(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict) or set(header) != set(_HEADER_KEYS):
        raise ShardFormatError(
            f"header must contain exactly the keys {sorted(_HEADER_KEYS)}"
        )
    if any(not isinstance(header[key], int) for key in _HEADER_KEYS):
        raise ShardFormatError("header fields must all be integers")
    try:
        params = CodeParams(header["n"], header["k"], header["d"],
                            header["h"], header["q"], header["gamma"])
    except ParameterError as exc:
        raise ShardFormatError(f"invalid code parameters in header: {exc}") from exc
    if header["instances"] != params.instances:
        raise ShardFormatError(
            f"header claims {header['instances']} instances, parameters give "
            f"{params.instances}"
        )
    width = symbol_width(params.q)
    if header["symbol_width"] != width:
        raise ShardFormatError(
            f"header claims {header['symbol_width']}-byte symbols, q={params.q} "
            f"requires {width}"
        )
    if not 0 <= header["node_id"] < params.n:
        raise ShardFormatError(f"node id {header['node_id']} outside [0, {params.n})")
    body = raw[9 + hlen :]
    expect = params.instances * params.base * width
    if len(body) != expect:
        raise ShardFormatError(
            f"body holds {len(body)} bytes, expected {expect}"
        )
    data = (
        np.frombuffer(body, dtype=f"<u{width}")
        .astype(np.int64)
        .reshape(params.instances, params.base)
    )
    if data.size and data.max() >= params.q:
        raise ShardFormatError(f"body contains symbols >= q={params.q}")
    return header, data


def _shard_name(node_id: int) -> str:
    return f"node_{node_id:04d}.zzmr"


def save_cluster(cluster: Cluster, directory) -> List[Path]:
    """Write one shard file per intact node; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for node in cluster.intact:
        path = directory / _shard_name(node)
        path.write_bytes(shard_bytes(cluster.params, node, cluster.read(node)))
        paths.append(path)
    return paths


def load_cluster(source: Union[str, Path, Iterable]) -> Cluster:
    """Rebuild a cluster from shard files (a directory or explicit paths);
    nodes without a shard come back erased."""
    if isinstance(source, (str, Path)):
        paths = sorted(Path(source).glob("*.zzmr"))
        if not paths:
            raise ShardFormatError(f"no .zzmr shards found in {source}")
    else:
        paths = [Path(p) for p in source]
        if not paths:
            raise ShardFormatError("no shard paths given")
    parsed = []
    for path in paths:
        try:
            header, data = parse_shard(path.read_bytes())
        except ShardFormatError as exc:
            raise ShardFormatError(f"{path}: {exc}") from exc
        parsed.append((path, header, data))
    first_path, first, _ = parsed[0]
    for path, header, _ in parsed[1:]:
        for key in _SHARED_KEYS:
            if header[key] != first[key]:
                raise ShardFormatError(
                    f"{path}: field {key!r} = {header[key]} disagrees with "
                    f"{first_path} ({first[key]})"
                )
    params = CodeParams(first["n"], first["k"], first["d"], first["h"],
                        first["q"], first["gamma"])
    seen: Dict[int, Path] = {}
    cluster = Cluster(params)
    for path, header, data in parsed:
        node = header["node_id"]
        if node in seen:
            raise ShardFormatError(
                f"{path}: duplicate shard for node {node} (also {seen[node]})"
            )
        seen[node] = path
        cluster.write(node, data)
    missing = params.n - len(seen)
    if missing > params.parities:
        raise ParameterError(
            f"only {len(seen)} of {params.n} shards present; more than "
            f"n-k = {params.parities} missing means data loss"
        )
    return cluster


# -- deterministic data generation --------------------------------------------

GENERATOR_VERSION = 1

_MASK64 = (1 << 64) - 1


def _mix64(state: int) -> Tuple[int, int]:
    """One step of the splitmix64 sequence: (new state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def generate_data(params: CodeParams, seed: int,
                  version: int = GENERATOR_VERSION) -> np.ndarray:
    """Seeded data block of shape (instances, k, base).

    Version 1 draws from a splitmix64 stream seeded with ``seed`` and
    rejection-samples uniform symbols in [0, q); the stream is pinned by
    this implementation, not by any library, so golden files never drift.
    """
    if version != GENERATOR_VERSION:
        raise ParameterError(f"unknown generator version {version}")
    need = params.instances * params.k * params.base
    limit = (1 << 64) - ((1 << 64) % params.q)
    out = np.empty(need, dtype=np.int64)
    state = int(seed) & _MASK64
    filled = 0
    while filled < need:
        state, draw = _mix64(state)
        if draw < limit:
            out[filled] = draw % params.q
            filled += 1
    return out.reshape(params.instances, params.k, params.base)


def symbols_from_bytes(params: CodeParams, blob: bytes) -> np.ndarray:
    """Interpret packed little-endian bytes as a full data block (the same
    symbol packing as shard bodies, nodes concatenated in order)."""
    width = symbol_width(params.q)
    need = params.instances * params.k * params.base * width
    if len(blob) != need:
        raise ParameterError(
            f"data file holds {len(blob)} bytes; (n={params.n}, k={params.k}, "
            f"d={params.d}, h={params.h}, q={params.q}) needs exactly {need}"
        )
    flat = np.frombuffer(blob, dtype=f"<u{width}").astype(np.int64)
    if flat.size and flat.max() >= params.q:
        raise ParameterError(f"data file contains symbols >= q={params.q}")
    return flat.reshape(params.k, params.instances, params.base).transpose(1, 0, 2)
