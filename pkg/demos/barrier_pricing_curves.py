"""Reproduce the reference price-vs-spot figures.

Writes the six curve families (single and double barrier, swept over the
mean-reversion speed a, the long-term mean theta and the correlation rho) as
CSV plus SVG line charts into ./out, using the same one-line invocations
documented in the README, then prints a small excerpt.
"""

import math
import pathlib

from vasicek_barrier.cli import main

OUT = pathlib.Path("out")
OUT.mkdir(exist_ok=True)

DOUBLE = ["--barrier-low", repr(math.log(100.0)), "--barrier-high", repr(math.log(130.0))]

jobs = {
    "single_a": ["--sweep", "a=0.5,1,2"],
    "single_theta": ["--sweep", "theta=0.02,0.04,0.08"],
    "single_rho": ["--sweep", "rho=-0.5,0,0.5"],
    "double_a": ["--sweep", "a=0.5,1,2", *DOUBLE],
    "double_theta": ["--sweep", "theta=0.02,0.04,0.08", *DOUBLE],
    "double_rho": ["--sweep", "rho=-0.5,0,0.5", *DOUBLE],
}

for name, args in jobs.items():
    for fmt in ("csv", "svg"):
        path = OUT / f"{name}.{fmt}"
        code = main(["curve", *args, "--format", fmt, "--out", str(path)])
        assert code == 0, name
    print(f"wrote out/{name}.csv and out/{name}.svg")

print("\nexcerpt of the single-barrier mean-reversion sweep:")
lines = (OUT / "single_a.csv").read_text().splitlines()
for line in lines[:2] + lines[11:14] + lines[-2:]:
    print(" ", line)
print("\n(the up-and-out value peaks below the knockout level 130*P and "
      "collapses to zero beyond it)")
