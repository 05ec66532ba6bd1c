#!/usr/bin/env python3
# Copyright 2026 The VRU Unlearning Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Exports scikit-learn's Digits dataset to the CSV layout read by vru_bench.

Features are divided by 16 so they lie in [0, 1]. Prints the class histogram
so the loader's checksum test can be cross-checked.
"""
import argparse
import csv
import sys

from sklearn.datasets import load_digits


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("out", help="destination CSV path")
    args = parser.parse_args()

    digits = load_digits()
    features = digits.data / 16.0
    labels = digits.target
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f_{j}" for j in range(features.shape[1])] + ["label"])
        for row, label in zip(features, labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])

    counts = [int((labels == c).sum()) for c in range(10)]
    print("rows", len(labels), "histogram", " ".join(map(str, counts)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
