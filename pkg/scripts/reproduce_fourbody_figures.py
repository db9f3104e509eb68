#!/usr/bin/env python3
"""Four-body exchange figures: rate and amplitudes versus pair separation,
and the robustness of the oscillation along the anti-correlated detuning
line.

The distance sweep takes a few minutes per point (full double-excitation
dynamics over several Rabi periods); the detuning map multiplies that by the
grid size, so start with a coarse grid.
"""

import sys

from doublon.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "out/fourbody"

rc = main(
    ["fourbody", "--set", f"outdir={OUT}", "--set", "N=201",
     "--set", "D_q=8", "--set", "t_end=6000", "--set", "dt_store=4"]
)
rc = rc or main(
    ["sweep-dq", "--plot", "--set", f"outdir={OUT}", "--set", "N=201",
     "--set", "sweep_start=4", "--set", "sweep_stop=14", "--set", "sweep_count=6",
     "--set", "dt_store=4", "--set", "t_end=100000"]
)
rc = rc or main(
    ["sweep-detuning", "--plot", "--set", f"outdir={OUT}", "--set", "N=201",
     "--set", "D_q=8", "--set", "detuning_span=1.5", "--set", "detuning_count=5",
     "--set", "dt_store=4", "--set", "t_end=8000"]
)
sys.exit(rc)
