#!/usr/bin/env python
"""
Example usage script for the hard TSP generator.

This script walks through the library on small instances: exact tours,
the subtour relaxation, sampling a fractional vertex and hardening it.
"""

import numpy as np

from src.hard_tsp import HardTspClient, Settings, SolveLimits, TspInstance, export_dot, solve_exact, solve_sep
from src.hard_tsp.core import random_metric_instance
from src.hard_tsp.errors import HardTspError


def main():
    """Main example function."""

    print("=" * 60)
    print("Hard TSP - Example Usage")
    print("=" * 60)
    print()

    # Initialize the client with small budgets
    print("Initializing client...")
    client = HardTspClient(settings=Settings(seed=7, reps=3, delta=100, time_limit=30.0))
    print("✓ Client initialized\n")

    # Example 1: Exact tour of a random metric instance
    print("Example 1: Exact Tour")
    print("-" * 60)
    inst = random_metric_instance(9, np.random.default_rng(1), integer=True, scale=100, name="random9")
    result = solve_exact(inst, limits=SolveLimits(time_limit=30.0))
    print(f"✓ Solver: {result.solver}")
    print(f"✓ Tour: {list(result.tour.order)}")
    print(f"✓ Value: {result.value}")
    print()

    # Example 2: The subtour relaxation
    print("Example 2: Subtour Relaxation")
    print("-" * 60)
    sep = solve_sep(inst)
    print(f"✓ SUBT: {sep.value:.4f}")
    print(f"✓ Subtour rows added: {sep.n_cuts_added}")
    print(f"✓ Fractional vertex: {sep.fractional}")
    print()

    # Example 3: Sample a fractional vertex
    print("Example 3: Sample a Fractional SEP Vertex")
    print("-" * 60)
    sampled = client.sample(8, 1)
    vertex = sampled['vertices'][0]
    print(f"✓ Vertex key: {vertex['key'][:16]}")
    print(f"✓ Draws needed: {vertex['draws']}")
    print()

    # Example 4: Harden the sampled instance
    print("Example 4: Harden")
    print("-" * 60)
    source = TspInstance(8, np.asarray(vertex['costs']), name="sampled8")
    try:
        hardened = client.harden(source)
        print(f"✓ Gap before: {hardened['before']['gap']:.4f}")
        print(f"✓ Gap after H-OPT: {hardened['hopt_gap']:.4f}")
        print(f"✓ Gap after IH-OPT: {hardened['after']['gap']:.4f}")
        print(f"✓ IH-OPT status: {hardened['ihopt']['status']}")
    except HardTspError as e:
        print(f"✗ Hardening failed: {e}")
    print()

    # Example 5: DOT export of the SEP support graph
    print("Example 5: DOT Export")
    print("-" * 60)
    dot = export_dot(source, solve_sep(source).x)
    print(dot)

    # Example 6: Configuration status
    print("Example 6: Configuration Status")
    print("-" * 60)
    status = client.get_config_status()
    for key, value in status['settings'].items():
        print(f"  {key}: {value}")
    print()

    print("=" * 60)
    print("Examples completed!")
    print("=" * 60)


if __name__ == "__main__":
    main()
