#!/usr/bin/env python3
"""toy_fpga cost model as an external evaluator.

Reads the request CSV (one configuration per row) on stdin and writes the
response CSV on stdout: the parameter columns echoed back plus the
objectives and the feasibility flag.
"""
import csv
import math
import sys


def cost(t, p, pipelined, b):
    cycles = math.ceil(4096 / t) * math.ceil(t / p) * (1 if pipelined else 2) + 64 * b
    logic = 5 * p + 3 * t * (2 if pipelined else 1) + 7 * b
    return cycles, logic, logic <= 120


def main():
    reader = csv.DictReader(sys.stdin)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(reader.fieldnames + ["cycles", "logic", "feasible"])
    for row in reader:
        cycles, logic, ok = cost(int(row["T"]), int(row["P"]), row["S"] == "true", int(row["B"]))
        out.writerow([row[k] for k in reader.fieldnames] + [cycles, logic, "true" if ok else "false"])


if __name__ == "__main__":
    main()
