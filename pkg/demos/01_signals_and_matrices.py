"""
From a power signature to a matrix
===================================

Every descriptor in the package works on images, so a 1D power signature
is first min-max normalized and folded row by row into a near-square
matrix.  This script builds a small synthetic dataset and walks one
signature through that transform.
"""

import numpy as np

from powerprint import benchmark_config, generate_synthetic
from powerprint.transform2d import matrix_shape, normalize, to_matrix

np.set_printoptions(precision=3, suppress=True, linewidth=100)

# The shipped benchmark: eight appliance archetypes, 40 signatures each.
ds = generate_synthetic(benchmark_config())
print(f"{len(ds)} signatures, classes: {', '.join(ds.class_names)}")

kettle = next(s for s in ds.signals if s.label == "kettle")
print(f"\n{kettle.source_id}: {len(kettle)} samples, peak {kettle.samples.max():.0f} W")
print("first 12 samples (W):", kettle.samples[:12])

# Normalizing removes the absolute power level; only the shape is kept.
z = normalize(kettle.samples)
print("normalized:           ", z[:12])

# 400 samples fold into a 20 x 20 matrix with no padding.  Lengths that do
# not fill the last row are padded with the final sample.
for n in (9, 10, 400, 401):
    print(f"length {n:>3} -> matrix {matrix_shape(n)}")

m = to_matrix(kettle)
print(f"\nmatrix {m.shape}, {m.pad_count} padded cells; top-left corner:")
print(m.values[:5, :8])

# The transform is a plain reshape: flattening gives the normalized signal back.
assert np.array_equal(m.flatten()[:len(kettle)], z)
