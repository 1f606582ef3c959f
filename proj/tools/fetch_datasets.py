#!/usr/bin/env python3
"""Write canonical CSV snapshots of the cancer, wines and digits datasets.

The datasets ship with scikit-learn, so no network access is needed. Output
schema: one header row of column names, numeric cells with '.' decimals, and a
final integer column named ``label``. Underscores in scikit-learn column names
are replaced by spaces.

    python3 tools/fetch_datasets.py [--out data]
"""
import argparse
import csv
import pathlib

from sklearn import datasets


def write(path, names, rows, labels):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow([n.replace("_", " ") for n in names] + ["label"])
        for row, label in zip(rows, labels):
            out.writerow([repr(float(v)) for v in row] + [int(label)])
    print(f"wrote {path} ({len(rows)} rows)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cancer = datasets.load_breast_cancer()
    write(out / "cancer.csv", list(cancer.feature_names), cancer.data, cancer.target)

    wines = datasets.load_wine()
    write(out / "wines.csv", list(wines.feature_names), wines.data, wines.target)

    digits = datasets.load_digits()
    names = [f"p{r}{c}" for r in range(8) for c in range(8)]
    write(out / "digits.csv", names, digits.data, digits.target)


if __name__ == "__main__":
    main()
