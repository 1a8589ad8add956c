#!/usr/bin/env python3
# Copyright 2026 The SuperCone Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the a9a and madelon LIBSVM files used by the acceptance suite.

a9a is rebuilt from the UCI Adult census table with the usual 123-feature
binarization (quintiles for continuous columns, one-hot categories, zero vs
non-zero capital gain/loss). Input is either the UCI adult.data/adult.test
pair or a single parquet table that holds the test rows first.

madelon is generated with scikit-learn's make_classification using the
published madelon recipe (5 informative features on a hypercube with 16
clusters per class, 15 linear combinations, 480 probes), then shifted and
rounded to integers.
"""

import argparse
import os

import numpy as np
import pandas as pd

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country", "income",
]

CATEGORIES = {
    "workclass": [
        "Private", "Self-emp-not-inc", "Self-emp-inc", "Federal-gov",
        "Local-gov", "State-gov", "Without-pay", "Never-worked"],
    "education": [
        "Bachelors", "Some-college", "11th", "HS-grad", "Prof-school",
        "Assoc-acdm", "Assoc-voc", "9th", "7th-8th", "12th", "Masters",
        "1st-4th", "10th", "Doctorate", "5th-6th", "Preschool"],
    "marital-status": [
        "Married-civ-spouse", "Divorced", "Never-married", "Separated",
        "Widowed", "Married-spouse-absent", "Married-AF-spouse"],
    "occupation": [
        "Tech-support", "Craft-repair", "Other-service", "Sales",
        "Exec-managerial", "Prof-specialty", "Handlers-cleaners",
        "Machine-op-inspct", "Adm-clerical", "Farming-fishing",
        "Transport-moving", "Priv-house-serv", "Protective-serv",
        "Armed-Forces"],
    "relationship": [
        "Wife", "Own-child", "Husband", "Not-in-family", "Other-relative",
        "Unmarried"],
    "race": ["White", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other", "Black"],
    "sex": ["Female", "Male"],
    "native-country": [
        "United-States", "Cambodia", "England", "Puerto-Rico", "Canada",
        "Germany", "Outlying-US(Guam-USVI-etc)", "India", "Japan", "Greece",
        "South", "China", "Cuba", "Iran", "Honduras", "Philippines", "Italy",
        "Poland", "Jamaica", "Vietnam", "Mexico", "Portugal", "Ireland",
        "France", "Dominican-Republic", "Laos", "Ecuador", "Taiwan", "Haiti",
        "Columbia", "Hungary", "Guatemala", "Nicaragua", "Scotland",
        "Thailand", "Yugoslavia", "El-Salvador", "Trinadad&Tobago", "Peru",
        "Hong", "Holand-Netherlands"],
}

# (column, encoding) in feature order; 123 features in total.
LAYOUT = [
    ("age", "quintile"), ("workclass", "onehot"), ("fnlwgt", "quintile"),
    ("education", "onehot"), ("education-num", "quintile"),
    ("marital-status", "onehot"), ("occupation", "onehot"),
    ("relationship", "onehot"), ("race", "onehot"), ("sex", "onehot"),
    ("capital-gain", "nonzero"), ("capital-loss", "nonzero"),
    ("hours-per-week", "quintile"), ("native-country", "onehot"),
]


def load_adult(args):
    if args.adult_parquet:
        table = pd.read_parquet(args.adult_parquet)
        table.columns = COLUMNS
        test = table.iloc[:args.adult_test_rows].copy()
        train = table.iloc[args.adult_test_rows:].copy()
    else:
        read = lambda p, skip: pd.read_csv(
            p, names=COLUMNS, skipinitialspace=True, skiprows=skip)
        train = read(args.adult_data, 0)
        test = read(args.adult_test, 1)
    for frame in (train, test):
        frame["income"] = frame["income"].astype(str).str.rstrip(".")
    return train.reset_index(drop=True), test.reset_index(drop=True)


def encode_adult(frame, edges):
    rows = []
    for _, rec in frame.iterrows():
        feats = []
        base = 1
        for col, enc in LAYOUT:
            value = rec[col]
            if enc == "quintile":
                feats.append(base + int(np.searchsorted(edges[col], value, side="right")))
                base += 5
            elif enc == "nonzero":
                feats.append(base + (1 if value != 0 else 0))
                base += 2
            else:
                cats = CATEGORIES[col]
                if value in cats:
                    feats.append(base + cats.index(value))
                base += len(cats)
        assert base == 124
        label = "+1" if rec["income"] == ">50K" else "-1"
        rows.append(label + " " + " ".join(f"{f}:1" for f in feats))
    return rows


def write(path, lines):
    with open(path, "w") as out:
        out.write("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(lines)} rows)")


def make_a9a(args):
    train, test = load_adult(args)
    edges = {}
    for col, enc in LAYOUT:
        if enc == "quintile":
            edges[col] = np.quantile(train[col].to_numpy(), [0.2, 0.4, 0.6, 0.8])
    write(os.path.join(args.out, "a9a.train.libsvm"), encode_adult(train, edges))
    write(os.path.join(args.out, "a9a.test.libsvm"), encode_adult(test, edges))


def make_madelon(args):
    from sklearn.datasets import make_classification

    x, y = make_classification(
        n_samples=2600, n_features=500, n_informative=5, n_redundant=15,
        n_repeated=0, n_classes=2, n_clusters_per_class=16, flip_y=0.01,
        class_sep=1.0, hypercube=True, shuffle=True, random_state=args.seed)
    x = np.clip(np.rint(480.0 + 25.0 * x), 0, 999).astype(int)

    def lines(lo, hi):
        out = []
        for i in range(lo, hi):
            label = "+1" if y[i] == 1 else "-1"
            feats = " ".join(f"{j + 1}:{v}" for j, v in enumerate(x[i]) if v != 0)
            out.append(f"{label} {feats}")
        return out

    write(os.path.join(args.out, "madelon.train.libsvm"), lines(0, 2000))
    write(os.path.join(args.out, "madelon.test.libsvm"), lines(2000, 2600))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="data")
    p.add_argument("--adult-parquet")
    p.add_argument("--adult-test-rows", type=int, default=16281)
    p.add_argument("--adult-data")
    p.add_argument("--adult-test")
    p.add_argument("--seed", type=int, default=0, help="madelon generator seed")
    args = p.parse_args()
    os.makedirs(args.out, exist_ok=True)
    if args.adult_parquet or (args.adult_data and args.adult_test):
        make_a9a(args)
    else:
        print("skipping a9a: pass --adult-parquet or --adult-data/--adult-test")
    make_madelon(args)


if __name__ == "__main__":
    main()
