"""Zigzag-structured MDS storage codes with cooperative multi-node repair.

The package encodes ``k`` nodes of data into ``n`` storage nodes over a
prime field so that any ``h`` simultaneously failed nodes can be rebuilt
from any ``d`` helpers at the information-theoretic lower bound on repair
traffic, ``h * (d + h - 1) / (d - k + h)`` symbols per failed node's worth
of data.  See :class:`zzmr.CodeParams` for the parameter regime and
:func:`zzmr.repair.repair` for the two-phase protocol.
"""

from .errors import (
    ConstructionError,
    ErasedSlotError,
    InconsistentDataError,
    MdsViolationError,
    ParameterError,
    ProtocolOrderError,
    RepairFailureError,
    ShardFormatError,
    SingularMatrixError,
)
from .field import PrimeField, find_primitive, is_prime, smallest_prime_geq
from .index import DigitSpace
from .linalg import GpMatrix, backend_name
from .repair import (
    DownloadState,
    RecoverSystem,
    RepairOutcome,
    RepairScenario,
    TrafficLog,
    build_recover_system,
    cooperative_phase,
    download_phase,
    repair,
    verify_recover_matrices,
)
from .sim import (
    Cluster,
    RepairReport,
    fail_nodes,
    generate_data,
    load_cluster,
    parse_shard,
    run_repair,
    save_cluster,
    shard_bytes,
)
from .zigzag import (
    CodeParams,
    ParityReport,
    check_parity,
    encode,
    erasure_decode,
    node_multiplier,
    parity_coefficient,
    parity_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "CodeParams",
    "Cluster",
    "ConstructionError",
    "DigitSpace",
    "DownloadState",
    "ErasedSlotError",
    "GpMatrix",
    "InconsistentDataError",
    "MdsViolationError",
    "ParameterError",
    "ParityReport",
    "PrimeField",
    "ProtocolOrderError",
    "RecoverSystem",
    "RepairFailureError",
    "RepairOutcome",
    "RepairReport",
    "RepairScenario",
    "ShardFormatError",
    "SingularMatrixError",
    "TrafficLog",
    "backend_name",
    "build_recover_system",
    "check_parity",
    "cooperative_phase",
    "download_phase",
    "encode",
    "erasure_decode",
    "fail_nodes",
    "find_primitive",
    "generate_data",
    "is_prime",
    "load_cluster",
    "node_multiplier",
    "parity_coefficient",
    "parity_matrix",
    "parse_shard",
    "repair",
    "run_repair",
    "save_cluster",
    "shard_bytes",
    "smallest_prime_geq",
    "verify_recover_matrices",
    "__version__",
]
