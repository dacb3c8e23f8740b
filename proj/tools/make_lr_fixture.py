#!/usr/bin/env python3
"""Regenerates data/breast_cancer.csv and data/lr_model.txt.

Features are z-score standardized and rounded to 4 decimals; the model is a
plain L2-regularized logistic regression fitted on the standardized rows with
weights rounded to the 8-fractional-bit fixed-point grid.
"""
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer
from sklearn.linear_model import LogisticRegression

FRAC_BITS = 8


def main(out_dir: Path) -> None:
    ds = load_breast_cancer()
    x = ds.data
    x = (x - x.mean(axis=0)) / x.std(axis=0)
    x = np.round(x, 4)
    y = ds.target

    with open(out_dir / "breast_cancer.csv", "w") as f:
        f.write(",".join(f"f{i}" for i in range(x.shape[1])) + ",label\n")
        for row, label in zip(x, y):
            f.write(",".join(f"{v:.4f}" for v in row) + f",{label}\n")

    clf = LogisticRegression(C=1.0, max_iter=5000).fit(x, y)
    scale = 1 << FRAC_BITS
    w = np.round(clf.coef_[0] * scale) / scale
    b = np.round(clf.intercept_[0] * scale) / scale
    with open(out_dir / "lr_model.txt", "w") as f:
        f.write(f"16 {FRAC_BITS}\n")
        f.write(f"{b:.8f}\n")
        for v in w:
            f.write(f"{v:.8f}\n")
    print("train accuracy", clf.score(x, y), "max|x|", np.abs(x).max(), "max|w|", np.abs(w).max())


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
