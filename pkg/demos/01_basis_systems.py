# Build the two basis systems and look at their values on a grid.

import numpy as np

from basisselect.bases import evaluate_basis, make_bspline_basis, make_fourier_basis

grid = np.linspace(0.0, 10.0, 7)

# Cubic B-splines: every row of the value matrix sums to one.
spline = make_bspline_basis((0.0, 10.0), num_bases=8, order=4)
mat = evaluate_basis(spline, grid)
print("B-spline values, K=8, order 4")
print(np.round(mat.values, 4))
print("row sums:", np.round(mat.values.sum(axis=1), 12))

# Fourier system: constant column, then sine/cosine pairs of rising frequency.
fourier = make_fourier_basis((0.0, 10.0), num_bases=5)
mat = evaluate_basis(fourier, grid)
print()
print("Fourier values, K=5 (period = domain width)")
print(np.round(mat.values, 4))

# The normalization makes the columns orthonormal over one period,
# so the Gram matrix on a dense grid is close to identity / spacing.
dense = np.linspace(0.0, 10.0, 20001)
vals = evaluate_basis(fourier, dense).values
gram = vals.T @ vals * (dense[1] - dense[0])
print("dense-grid Gram (should be near identity):")
print(np.round(gram, 3))
