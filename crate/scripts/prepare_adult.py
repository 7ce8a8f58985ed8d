#!/usr/bin/env python3
"""Convert the UCI Adult files (adult.data, adult.test) into a single CSV.

Rows containing a missing value ("?") are dropped, surrounding whitespace is
stripped, and the trailing "." on labels in adult.test is removed.

usage: prepare_adult.py <dir containing adult.data and adult.test> <out.csv>
"""
import csv
import os
import sys

HEADER = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]


def rows(path):
    with open(path, newline="") as f:
        for raw in csv.reader(f):
            cells = [c.strip() for c in raw]
            if len(cells) != len(HEADER):
                continue
            if any(c == "?" or c == "" for c in cells):
                continue
            cells[-1] = cells[-1].rstrip(".")
            yield cells


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    src, out = sys.argv[1], sys.argv[2]
    kept = 0
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER)
        for name in ("adult.data", "adult.test"):
            for r in rows(os.path.join(src, name)):
                w.writerow(r)
                kept += 1
    print(f"wrote {kept} rows to {out}")


if __name__ == "__main__":
    main()
