"""Generates a small synthetic binary-regression table (200 rows, 5 covariates)."""
import numpy as np

rng = np.random.default_rng(7)
n, p = 200, 5
X = rng.normal(size=(n, p))
beta = np.array([1.0, -0.5, 0.25, 0.0, 0.75])
y = rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-(0.3 + X @ beta)))
with open("synthetic_binary.csv", "w") as f:
    f.write(",".join(f"x{i + 1}" for i in range(p)) + ",label\n")
    for row, label in zip(X, y):
        f.write(",".join(f"{v:.6f}" for v in row) + f",{'yes' if label else 'no'}\n")
