#!/usr/bin/env python3
"""Toy-problem error against node count with empirical-Bayes length-scales."""

import sys

from bayescub.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "toy.csv"

sys.exit(
    main(
        [
            "toy",
            "--n", "10,15,20,25,30",
            "--eb",
            "--m", "3",
            "--out", OUT,
        ]
    )
)
