"""Centrality basics: from an adjacency matrix to pair, node and system
level contagion scores.

Run with:  python3 demos/01_centrality_basics.py
"""

import numpy as np

from kbnet import (
    DEFAULT_A,
    debt_rank,
    degree_centrality,
    degree_threshold_p95,
    leontief_kernel,
    node_level_kb,
    propagate_shock,
    system_level_kb,
)

np.set_printoptions(precision=4, suppress=True)

# The documented 3-node reference network.  Entry (i, j) is how strongly
# a shock at node i hits node j in one step.
a = np.asarray(DEFAULT_A)
print("adjacency matrix A:")
print(a)

# The kernel inverts (I - A) once; pair_kb sums the direct link plus
# every indirect path: A + A^2 + A^3 + ...
kernel = leontief_kernel(a)
print("\npair-level centrality (I - A)^-1 - I:")
print(kernel.pair_kb)

# Node-level centrality weights the row by node sizes; with unit weights
# it is simply the row sum: the total system damage from shocking node i.
w = np.ones(3)
node = node_level_kb(kernel, w)
print("\nnode-level centrality:", node)
print("system-level centrality:", round(system_level_kb(node), 4))

# The same number emerges from explicitly propagating a unit shock at
# node 0 and accumulating the effects step by step.
eps = np.array([1.0, 0.0, 0.0])
states, cumulative = propagate_shock(a, eps, t_max=50)
print("\nshock at node 0, first three waves:")
print(states[1:4])
print("cumulative effect:", cumulative, "(matches pair_kb row 0)")

# Comparison measures used alongside the contagion score.
node_deg, sys_deg = degree_centrality(a, degree_threshold_p95(a))
print("\nthresholded degree centrality:", node_deg, "system:", round(sys_deg, 4))
print("DebtRank of a shock at each node:",
      [round(debt_rank(a, i), 4) for i in range(3)])
