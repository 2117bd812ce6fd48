#!/usr/bin/env python3
"""Posterior band profile: four nodes, Gaussian kernel (ell = 0.8), cubic space.

Writes posterior.csv with columns (x, mean, stddev); the band collapses to
zero width at the data nodes.
"""

import sys

from bayescub.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "posterior.csv"

sys.exit(
    main(
        [
            "posterior",
            "--kernel", "gaussian",
            "--ell", "0.8",
            "--m", "3",
            "--n", "4",
            "--points", "grid",
            "--lo", "-2.0",
            "--hi", "2.0",
            "--integrand", "toy",
            "--grid-lo", "-3.0",
            "--grid-hi", "3.0",
            "--grid-n", "301",
            "--out", OUT,
        ]
    )
)
