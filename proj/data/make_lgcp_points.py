"""Generates the bundled synthetic LGCP point pattern (126 points on [0,1)^2).

A latent field is drawn once on a 32x32 grid from the LGCP prior
(sigma^2 = 1.91, beta = 1/33, exponential covariance), then 126 points are
placed in cells with probability proportional to exp(field) and uniformly
within each cell. Run once; the output is committed as data and mirrored in
include/smc/models/lgcp_synthetic_points.hpp.
"""
import numpy as np

SIDE = 32
SIGMA2 = 1.91
BETA = 1.0 / 33.0
TOTAL = 126
SEED = 20190417

rng = np.random.default_rng(SEED)
jj, kk = np.meshgrid(np.arange(SIDE), np.arange(SIDE), indexing="ij")
coords = np.stack([jj.ravel(), kk.ravel()], axis=1).astype(float)
dist = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
cov = SIGMA2 * np.exp(-dist / (SIDE * BETA))
mu = np.log(TOTAL) - SIGMA2 / 2
field = mu + np.linalg.cholesky(cov + 1e-10 * np.eye(SIDE * SIDE)) @ rng.standard_normal(SIDE * SIDE)
prob = np.exp(field - field.max())
prob /= prob.sum()
cells = rng.choice(SIDE * SIDE, size=TOTAL, p=prob)
pts = []
for c in cells:
    j, k = divmod(c, SIDE)
    pts.append(((j + rng.random()) / SIDE, (k + rng.random()) / SIDE))

with open("lgcp_synthetic_points.csv", "w") as f:
    f.write("# synthetic stand-in for a 126-point pattern; generated by make_lgcp_points.py, seed %d\n" % SEED)
    f.write("x,y\n")
    for x, y in pts:
        f.write("%.6f,%.6f\n" % (x, y))

with open("../include/smc/models/lgcp_synthetic_points.hpp", "w") as f:
    f.write("#pragma once\n\n// Generated by data/make_lgcp_points.py (seed %d). Do not edit.\n\n" % SEED)
    f.write("#include <array>\n#include <utility>\n\nnamespace smc {\n\n")
    f.write("inline constexpr std::array<std::pair<double, double>, %d> kSyntheticLgcpPoints{{\n" % TOTAL)
    for x, y in pts:
        f.write("    {%.6f, %.6f},\n" % (x, y))
    f.write("}};\n\n}  // namespace smc\n")
