"""Regenerate null_kernel.json: the CIR of a flat CFR over the 52 occupied bins.

Computed by a direct sum of complex exponentials (no FFT), so it checks the
package's transform independently.
"""

import cmath
import json
from pathlib import Path

occupied = [k % 64 for k in list(range(-26, 0)) + list(range(1, 27))]
cir = []
for n in range(64):
    s = sum(cmath.exp(2j * cmath.pi * k * n / 64) for k in occupied) / 64
    cir.append([s.real, s.imag])
Path(__file__).with_name("null_kernel.json").write_text(json.dumps(cir, indent=1) + "\n")
