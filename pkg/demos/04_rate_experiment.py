"""Kolmogorov distance of a standardized triangle count as n grows.

With a constant graphon every principal support graph is a single edge,
which is strongly connected, and the predicted rate is n^-1. This is a
reduced version of the full experiment (half the replicates, three grid
points) that runs in under a minute. Points whose distance is within three
noise floors of 1.3581/sqrt(m) are left out of the fit, so with too few
replicates the larger n stop contributing.

    python demos/04_rate_experiment.py [replicates]
"""

from __future__ import annotations

import sys

from ustatlab.graphon import StepGraphon
from ustatlab.graphs import triangle
from ustatlab.montecarlo import ExperimentSpec, verify_rate

if __name__ == "__main__":
    m = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
    spec = ExperimentSpec((16, 32, 64), m, seed=0, motif=triangle(), graphon=StepGraphon.constant(0.5))
    rep = verify_rate(spec)
    print(rep.to_csv(), end="")
    print(f"slope {rep.slope:.3f}  r^2 {rep.r_squared:.4f}  predicted {rep.predicted_rate}  verdict {rep.verdict}")
    for note in rep.notes:
        print("note:", note)
