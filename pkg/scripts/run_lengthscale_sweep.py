#!/usr/bin/env python3
"""Toy-problem relative error as a function of the kernel length-scale.

Compares the centred estimator against the exactness-constrained one with
linear, cubic, and quintic spaces at n = 12 symmetric-grid nodes.
"""

import sys

from bayescub.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "lengthscale_sweep.csv"

sys.exit(
    main(
        [
            "lengthscale-sweep",
            "--integrand", "toy",
            "--n", "12",
            "--points", "grid",
            "--measure", "std-gaussian",
            "--ell-lo", "0.05",
            "--ell-hi", "20.0",
            "--ell-count", "60",
            "--m-list", "1,3,5",
            "--out", OUT,
        ]
    )
)
