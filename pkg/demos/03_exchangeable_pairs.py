"""The two exchangeable-pair constructions and their linearity identities.

Resampling one latent variable gives E{D | X} = W / n whenever the first
projection is nonzero. When it vanishes (constant graphon) the edge-swap
pair is used instead, and E{D | X, Y} = 2 W / (n (n - 1)) holds with W the
standardized principal-level part. Both identities are checked over every
configuration of a small graph.
"""

from __future__ import annotations

import numpy as np

from ustatlab.graphon import StepGraphon
from ustatlab.graphs import single_edge, triangle
from ustatlab.kernels import subgraph_kernel
from ustatlab.stein import check_linearity_edge_swap, check_linearity_x_swap, stein_solution

if __name__ == "__main__":
    kappa = StepGraphon(np.array([[0.8, 0.2], [0.2, 0.5]]))
    print("latent-variable swap, edge count, two-block graphon, n=6")
    print(check_linearity_x_swap(subgraph_kernel(single_edge(), kappa), 6).to_text())
    print("edge swap, triangle count, p=1/2, n=5")
    print(check_linearity_edge_swap(subgraph_kernel(triangle(), 0.5), 5).to_text())

    grid = np.linspace(-8, 8, 321)
    Z, W = np.meshgrid(grid, grid)
    f = stein_solution(Z, W)
    print(f"Stein solution on [-8,8]^2: sup|f|={np.abs(f).max():.4f}, sup|w f|={np.abs(W * f).max():.4f}")
