"""Closed-form variance against brute-force enumeration.

The closed form adds one term per orbit of (A, B) pairs. Reading the sum as
running over every labeled pair instead overcounts: for the triangle at n = 3
the statistic is the kernel itself, yet the labeled reading triples the
single-edge level. Both readings are printed side by side.
"""

from __future__ import annotations

from ustatlab.graphs import single_edge, triangle, two_star
from ustatlab.kernels import hoeffding_decompose, subgraph_kernel
from ustatlab.ustat import variance_closed_form, variance_oracle

if __name__ == "__main__":
    print(f"{'kernel':26} {'n':>2} {'oracle':>12} {'orbit':>12} {'labeled':>12}")
    for name, F in (("edge", single_edge()), ("two-star", two_star()), ("triangle", triangle())):
        for mode in ("inj", "ind"):
            f = subgraph_kernel(F, 0.3, mode)
            dec = hoeffding_decompose(f)
            for n in (3, 5):
                if n < f.k:
                    continue
                truth = variance_oracle(f, n)
                orbit = variance_closed_form(dec, n).sigma_n_sq
                labeled = variance_closed_form(dec, n, convention="subset").sigma_n_sq
                print(f"{name + ' ' + mode + ' p=0.3':26} {n:>2} {truth:12.6f} {orbit:12.6f} {labeled:12.6f}")
    print()
    print(variance_closed_form(hoeffding_decompose(subgraph_kernel(triangle(), 0.5)), 6).to_text())
