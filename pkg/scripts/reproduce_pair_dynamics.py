#!/usr/bin/env python3
"""Fractional decay of a collocated emitter pair inside the doublon gap.

Full evolution at N = 401 up to t = 1e3/J with the bound-state profiles,
the pair-correlation function, and the field snapshots (traces CSV, field
CSV, JSON diagnostics, SVG plot).
"""

import sys

from doublon.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "out/dynamics"

sys.exit(
    main(
        ["dynamics", "--plot", "--set", f"outdir={OUT}", "--set", "N=401",
         "--set", "t_end=1000", "--set", "dt_store=1"]
    )
)
