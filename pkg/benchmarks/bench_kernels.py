#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times one force evaluation and one log-likelihood evaluation per
(family, size) on synthetic two-cluster instances, for every available
backend, and prints a speedup table plus the worst cross-backend
disagreement of the force vector (parity is asserted properly in the
test suite; the column here is informational).

Usage::

    python benchmarks/bench_kernels.py [--sizes 100,300,600] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from latentforce._kernels import available_backends, get_backend, set_backend
from latentforce.forces import forces
from latentforce.model import ModelConfig, PriorConfig, loglik
from latentforce.synth import GaussianClusterSpec, generate_dataset

FAMILIES = ("unweighted", "cumulative", "weighted")


def build_instance(family: str, n: int, seed: int):
    model = ModelConfig(
        family=family, levels=3, prior=PriorConfig(enabled=False)
    ).validate()
    spec = GaussianClusterSpec(n_nodes=n, seed=seed)
    network, gen_state, _ = generate_dataset(spec, model, seed=seed)
    return network, gen_state, model


def best_of(fn, repeats: int) -> float:
    fn()  # warmup (also triggers any lazy caches)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,300,600",
                        help="comma-separated node counts (default 100,300,600)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions; the minimum is reported (default 5)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    backends = available_backends()
    original = get_backend()
    print(f"available backends: {', '.join(backends)} (active: {original})")
    if "compiled" not in backends:
        print("compiled extension not built; timing the NumPy fallback only")

    header = (f"{'family':>10} {'n':>5} {'op':>7}"
              + "".join(f" {b + ' (ms)':>14}" for b in backends))
    if len(backends) > 1:
        header += f" {'speedup':>8} {'max |diff|':>11}"
    print(header)

    try:
        for family in FAMILIES:
            for n in sizes:
                network, state, model = build_instance(family, n, args.seed)
                rows = {
                    "forces": lambda: forces(network, state, model),
                    "loglik": lambda: loglik(network, state, model),
                }
                for op, fn in rows.items():
                    times = {}
                    results = {}
                    for backend in backends:
                        set_backend(backend)
                        times[backend] = best_of(fn, args.repeats)
                        if op == "forces":
                            results[backend] = forces(network, state, model).to_vector()
                    line = (f"{family:>10} {n:>5} {op:>7}"
                            + "".join(f" {1e3 * times[b]:>14.3f}" for b in backends))
                    if len(backends) > 1:
                        speedup = times["numpy"] / times["compiled"]
                        line += f" {speedup:>7.1f}x"
                        if op == "forces":
                            diff = float(np.abs(
                                results["compiled"] - results["numpy"]
                            ).max())
                            line += f" {diff:>11.2e}"
                        else:
                            line += f" {'':>11}"
                    print(line, flush=True)
    finally:
        set_backend(original)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
