#!/usr/bin/env python3
"""Convert the Hillenbrand vowel table (vowdata.dat) to the vowel,f1,f2 CSV
read by `phasegrad --data`.

The input is not fetched; pass the path of a local copy. Rows with a zero
(unmeasured) steady-state F1 or F2 are dropped.

    python3 scripts/hillenbrand_to_csv.py vowdata.dat > vowels.csv
"""

import argparse
import csv
import sys

# Two-letter vowel suffix of the file code -> single-letter label.
VOWELS = {"ae": "ae", "ah": "a", "aw": "aw", "eh": "e", "ei": "ei", "er": "er",
          "ih": "ih", "iy": "i", "oa": "o", "oo": "oo", "uh": "uh", "uw": "u"}


def rows(lines):
    for line in lines:
        parts = line.split()
        # data rows start with a file code such as m01ae
        if len(parts) < 5 or len(parts[0]) != 5 or not parts[0][1:3].isdigit():
            continue
        label = VOWELS.get(parts[0][3:])
        if label is None:
            continue
        # columns: code, duration, f0, F1, F2, F3, ...
        f1, f2 = int(parts[3]), int(parts[4])
        if f1 > 0 and f2 > 0:
            yield label, f1, f2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input", type=argparse.FileType("r"))
    ap.add_argument("-o", "--output", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()
    w = csv.writer(args.output, lineterminator="\n")
    w.writerow(["vowel", "f1", "f2"])
    n = 0
    for row in rows(args.input):
        w.writerow(row)
        n += 1
    print(f"wrote {n} rows", file=sys.stderr)


if __name__ == "__main__":
    main()
