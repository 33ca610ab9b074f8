#!/usr/bin/env python3
"""Writes data/synthetic_proteins.csv: 20 proteins, 12 control and 10 case
subjects, log-normal abundances with a mean shift in the case group for the
first five proteins. Deterministic for a fixed seed."""

import argparse

import numpy as np


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20090601)
    ap.add_argument("--out", default="data/synthetic_proteins.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n_control, n_case, n_features = 12, 10, 20
    subjects = [f"h{i + 1:02d}:control" for i in range(n_control)]
    subjects += [f"c{i + 1:02d}:case" for i in range(n_case)]
    base = rng.uniform(3.0, 6.0, size=n_features)
    shift = np.zeros(n_features)
    shift[:5] = [1.2, 0.9, 0.7, 0.5, 0.35]
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("feature," + ",".join(subjects) + "\n")
        for i in range(n_features):
            mu = np.r_[np.full(n_control, base[i]), np.full(n_case, base[i] + shift[i])]
            values = np.exp(rng.normal(mu, 0.6)) - 5.0
            f.write(f"P{i + 1:02d}," + ",".join(f"{v:.4f}" for v in values) + "\n")


if __name__ == "__main__":
    main()
