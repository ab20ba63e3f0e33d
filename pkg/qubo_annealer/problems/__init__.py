"""
Problem formulators and decoders: number partitioning and modularity graph partitioning.
"""

from qubo_annealer.problems.graph_partition import (
    BoundaryStats,
    GraphPartitionModel,
    InfeasibleDecode,
    ModularityMatrix,
    PartitionAssignment,
    PartitionProblem,
    boundary_weight_stats,
    build_graph_partition,
    decode_partition,
    empty_groups,
    group_sizes,
    modularity,
    modularity_matrix,
    one_hot_penalty_default,
)
from qubo_annealer.problems.number_partition import (
    NumberPartitionResult,
    NumberSet,
    build_number_partition,
    decode_number_partition,
    generate_number_set,
    karmarkar_karp,
    number_partition_matrix,
    read_number_set,
)

__all__ = [
    "BoundaryStats",
    "GraphPartitionModel",
    "InfeasibleDecode",
    "ModularityMatrix",
    "NumberPartitionResult",
    "NumberSet",
    "PartitionAssignment",
    "PartitionProblem",
    "boundary_weight_stats",
    "build_graph_partition",
    "build_number_partition",
    "decode_number_partition",
    "decode_partition",
    "empty_groups",
    "generate_number_set",
    "group_sizes",
    "karmarkar_karp",
    "modularity",
    "modularity_matrix",
    "number_partition_matrix",
    "one_hot_penalty_default",
    "read_number_set",
]
