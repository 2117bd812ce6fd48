#!/usr/bin/env python3
"""Bond-price benchmark: error against node count at a misspecified length-scale.

Ten-dimensional integral, product Matern 5/2 kernel with ell = 0.2, random
uniform nodes over five seeds, with a Monte Carlo baseline.  Set
BAYESCUB_THREADS to parallelize rows.
"""

import sys

from bayescub.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "zcb.csv"

sys.exit(
    main(
        [
            "zcb",
            "--zcb-d", "10",
            "--kernel", "matern",
            "--rho", "2.5",
            "--ell", "0.2",
            "--m", "1",
            "--n", "128,256,512",
            "--seeds", "0,1,2,3,4",
            "--out", OUT,
        ]
    )
)
