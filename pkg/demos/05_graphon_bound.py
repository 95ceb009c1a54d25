"""Explicit Kolmogorov bound for a kernel with a nonzero first projection.

The symmetric graphon [[0.8, 0.2], [0.2, 0.8]] averages to 1/2 along every
row, so the edge count has no first-order part and the explicit bound does
not apply; the harness refuses to predict a normal rate there. Making the
blocks unequal, [[0.8, 0.2], [0.2, 0.5]], restores a first projection and
the bound applies. With sigma_1 this small it holds by a wide margin but
says little at these sizes.
"""

from __future__ import annotations

import numpy as np

from ustatlab.errors import InapplicableConstructionError
from ustatlab.graphon import StepGraphon
from ustatlab.graphs import single_edge
from ustatlab.kernels import hoeffding_decompose, subgraph_kernel, summarize
from ustatlab.montecarlo import ExperimentSpec, ks_statistic, predicted_rate, simulate
from ustatlab.stein import berry_esseen_bound

if __name__ == "__main__":
    for values in ([[0.8, 0.2], [0.2, 0.8]], [[0.8, 0.2], [0.2, 0.5]]):
        kappa = StepGraphon(np.array(values))
        s = summarize(hoeffding_decompose(subgraph_kernel(single_edge(), kappa)))
        print(f"graphon {values}: sigma_1={s.sigma1:.4g}, d={s.d}, regime={predicted_rate(s)}")
        spec = ExperimentSpec((25, 100), 20_000, seed=0, motif=single_edge(), graphon=kappa)
        sim = simulate(spec)
        for n in spec.n_grid:
            ks = ks_statistic(sim.samples[n])
            try:
                bound = f"{berry_esseen_bound(s, 2, n):.4f}"
            except InapplicableConstructionError:
                bound = "n/a"
            print(f"   n={n:4d}  KS={ks:.4f}  bound={bound}")
