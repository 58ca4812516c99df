"""
How well defined are the classes?
=================================

Two whole-dataset measures of cluster quality:

* the mean imposture factor (MIF), the average share of a class's members
  that lie farther from their own centroid than a given non-member;
* the variance ratio, mean within-class scatter over the scatter of class
  centroids.

Both are zero for perfectly tight, well separated classes. Below, a
family of synthetic sets with shrinking separation shows how they move
together, and a label shuffle gives the reference value for "no structure".
"""

import numpy as np

from oslo import (
    Dataset, SyntheticSpec, generate_synthetic_dataset, mean_imposture_factor, variance_ratio,
)

print(f"{'separation':>10}{'MIF':>8}{'rho':>8}")
for sep in (4.0, 2.0, 1.0, 0.5, 0.25):
    ds = generate_synthetic_dataset(SyntheticSpec(20, 16, sep, 100, rng_seed=3))
    print(f"{sep:>10}{mean_imposture_factor(ds):>8.3f}{variance_ratio(ds):>8.2f}")

# With labels shuffled, a non-member is as likely to be closer as farther,
# apart from a small pull of every member toward a centroid it helped form.
# That pull grows with dimension because distances concentrate.
rng = np.random.default_rng(0)
for dim in (2, 16, 64):
    ds = generate_synthetic_dataset(SyntheticSpec(20, dim, 1.0, 100, rng_seed=3))
    shuffled = Dataset.from_arrays(ds.features, rng.permutation(ds.labels))
    print(f"shuffled labels, dim {dim:>2}: MIF {mean_imposture_factor(shuffled):.3f}")
