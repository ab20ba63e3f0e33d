"""Benchmark the step engines on large number partitioning instances.

Usage:
    cd qubo-annealer
    uv run python benchmarks/numpart_benchmark.py
    uv run python benchmarks/numpart_benchmark.py --sizes 4000 5000 --steps 20000

Outputs a markdown table of time to solution and final difference D for the
parallel-trial and sequential engines. The number partitioning matrix is
dense, so a 6500-value instance needs close to 1 GB for its coupling matrix.
"""

import argparse
import time
from dataclasses import dataclass

from qubo_annealer.annealer import anneal
from qubo_annealer.models.params import AnnealParams, ScheduleRequest
from qubo_annealer.problems.number_partition import (
    build_number_partition,
    decode_number_partition,
    generate_number_set,
    karmarkar_karp,
)

ENGINES = ["parallel-trial", "sequential-sa"]


@dataclass
class BenchmarkResult:
    engine: str
    n: int
    seconds: float
    d: int
    kk_d: int
    time_limit_reached: bool


def benchmark_size(n: int, engine: str, steps: int, restarts: int, seed: int, time_limit: float) -> BenchmarkResult:
    """Solve one generated instance with one engine."""
    numbers = generate_number_set(n, 10000, seed=seed)
    model = build_number_partition(numbers)
    params = AnnealParams(restarts=restarts, seed=seed, engine=engine, time_limit_sec=time_limit)

    start = time.perf_counter()
    result = anneal(model, None, ScheduleRequest(steps=steps), params)
    elapsed = time.perf_counter() - start

    return BenchmarkResult(
        engine=engine,
        n=n,
        seconds=elapsed,
        d=decode_number_partition(numbers, result.best_bits).d,
        kk_d=karmarkar_karp(numbers),
        time_limit_reached=result.time_limit_reached,
    )


def run_benchmarks(sizes: list[int], steps: int, restarts: int, seed: int, time_limit: float):
    results: list[BenchmarkResult] = []

    for n in sizes:
        for engine in ENGINES:
            print(f"  {engine:>15}  n={n:<6}", end="", flush=True)
            result = benchmark_size(n, engine, steps, restarts, seed, time_limit)
            results.append(result)
            print(f"  {result.seconds:>7.1f}s  D={result.d}")

    print("\n" + "=" * 80)
    print(f"SUMMARY: {restarts} restarts x {steps} steps, seed {seed}")
    print("=" * 80)

    print(f"\n| {'Engine':<15} | {'n':>6} | {'Seconds':>8} | {'D':>8} | {'KK D':>8} | {'Capped':>6} |")
    print(f"|{'-'*17}|{'-'*8}|{'-'*10}|{'-'*10}|{'-'*10}|{'-'*8}|")
    for r in results:
        capped = "yes" if r.time_limit_reached else "no"
        print(f"| {r.engine:<15} | {r.n:>6} | {r.seconds:>8.1f} | {r.d:>8} | {r.kk_d:>8} | {capped:>6} |")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=list(range(4000, 6501, 500)))
    parser.add_argument("--steps", type=int, default=50_000)
    parser.add_argument("--restarts", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--time-limit", type=float, default=300.0)
    args = parser.parse_args()
    run_benchmarks(args.sizes, args.steps, args.restarts, args.seed, args.time_limit)


if __name__ == "__main__":
    main()
