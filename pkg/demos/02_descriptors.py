"""
Six local descriptors on one neighborhood
=========================================

Each descriptor turns every 3x3 neighborhood of the power matrix into a
code and histograms the codes.  LPH compares the eight neighbors with the
center (clockwise from the top-left, bit n worth 2**n); the others differ
in how they encode the same neighborhood.
"""

import numpy as np

from powerprint import descriptors as desc
from powerprint import benchmark_config, generate_synthetic

patch = np.array([[0.1, 0.2, 0.3],
                  [0.4, 0.5, 0.6],
                  [0.7, 0.8, 0.9]])
print("patch:\n", patch)

for kind in desc.KINDS:
    code = desc.code_matrix(patch, kind)
    if kind == "LTEP":
        print(f"{kind:<5} upper {int(code[0, 0, 0]):>3}  lower {int(code[1, 0, 0]):>3}")
    else:
        print(f"{kind:<5} code {int(code[0, 0]):>3}  = {int(code[0, 0]):08b}")

# LPH and LBP only disagree where a neighbor equals the center.
flat = np.full((3, 3), 0.5)
print("\nflat patch: LPH", desc.lph_codes(flat)[0, 0], " LBP", desc.lbp_codes(flat)[0, 0])

# Histogram lengths differ: LDP keeps only the 56 codes with three bits set,
# LTEP concatenates an upper and a lower 256-bin pattern.
ds = generate_synthetic(benchmark_config(per_class=2))
sig = ds.signals[0]
for kind in desc.KINDS:
    h = desc.extract(kind, sig)
    print(f"{kind:<5} {len(h):>3} bins, {np.count_nonzero(h.bins):>3} occupied, sum {h.bins.sum():.12f}")

# Same class, same fingerprint: compare two fridges and a fridge with a kettle.
fridges = [s for s in ds.signals if s.label == "fridge"]
kettle = next(s for s in ds.signals if s.label == "kettle")
a, b, c = (desc.extract("LPH", s).bins for s in (fridges[0], fridges[1], kettle))
cos = lambda x, y: x @ y / np.linalg.norm(x) / np.linalg.norm(y)
print(f"\nLPH cosine  fridge/fridge {cos(a, b):.3f}   fridge/kettle {cos(a, c):.3f}")
