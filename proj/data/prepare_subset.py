"""Builds the bundled MOSES-derived corpora from the upstream molsets CSVs.

usage: python prepare_subset.py <moses_train.csv.gz> <moses_test.csv.gz>
"""
import csv
import gzip
import random
import sys


def read(path):
    with gzip.open(path, "rt") as fh:
        rows = [line.strip() for line in fh]
    return [r for r in rows[1:] if r]


def main():
    train, test = read(sys.argv[1]), read(sys.argv[2])
    rng = random.Random(20240601)
    train_pick = rng.sample(train, 10000)
    test_pick = rng.sample(test, 2000)
    with open("moses_subset.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["SMILES", "SPLIT"])
        w.writerows([s, "train"] for s in train_pick)
        w.writerows([s, "test"] for s in test_pick)

    used = set(train_pick)
    rest = [s for s in train if s not in used]
    rng.shuffle(rest)
    with_cl = [s for s in rest if "Cl" in s and "F" not in s and len(s) <= 40][:240]
    with_f = [s for s in rest if "F" in s and "Cl" not in s and len(s) <= 40][:240]
    with open("finetune_halogen.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["smiles", "target"])
        w.writerows([s, "A"] for s in with_cl[:200])
        w.writerows([s, "B"] for s in with_f[:200])
    with open("finetune_halogen_heldout.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["smiles", "target"])
        w.writerows([s, "A"] for s in with_cl[200:240])
        w.writerows([s, "B"] for s in with_f[200:240])


if __name__ == "__main__":
    main()
