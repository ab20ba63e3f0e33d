"""
qubo_annealer: parallel-trial simulated annealing for QUBO models, with number
partitioning and modularity graph partitioning formulations.
"""

__version__ = "0.1.0"
