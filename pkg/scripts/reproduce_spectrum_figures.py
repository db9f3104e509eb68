#!/usr/bin/env python3
"""Doublon band structure and the two-excitation spectrum sweep.

Writes bands.csv / spectrum.csv (and SVG plots) for the closed-form bands at
U_c = 4J, U_m = 0.05 U_c and the exact spectrum as a function of U_c.
"""

import sys

from doublon.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "out/spectrum"

sys.exit(
    main(
        ["bands", "--plot", "--set", f"outdir={OUT}", "--set", "N=100",
         "--set", "boundary=periodic"]
    )
    or main(
        ["spectrum", "--plot", "--set", f"outdir={OUT}", "--set", "spectrum_N=60",
         "--set", "uc_count=17"]
    )
)
